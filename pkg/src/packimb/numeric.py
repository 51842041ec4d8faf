"""Forward-Euler integration of the coupled SOC dynamics.

The integrator mirrors the discrete-time approach used for the nonlinear
OCV study: fixed-step explicit Euler on z_i' = -I_i / Q_i, with the branch
currents resolved algebraically at each step (CC or CV).  Termination
events (voltage ceiling, SOC target, elapsed time, current cutoff) are
refined by linear interpolation inside the crossing step, which places the
event with O(dt^2) error -- below Euler's own O(dt) error.

On an SOC range violation the run aborts with a structured error rather
than clamping; clamping would silently violate charge conservation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import NonTerminationError, SeriesStructureError
from .pack import BranchSolution, PackParams, PackState, solve_branches_cc, solve_branches_cv


@dataclass(frozen=True)
class IntegratorConfig:
    dt_h: float = 1e-3
    voltage_tolerance_v: float = 1e-4
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.dt_h <= 0:
            raise ValueError(f"dt_h must be positive, got {self.dt_h}")
        if self.voltage_tolerance_v <= 0:
            raise ValueError(f"voltage_tolerance_v must be positive, got {self.voltage_tolerance_v}")
        if self.max_steps <= 0:
            raise ValueError(f"max_steps must be positive, got {self.max_steps}")


# -- termination conditions for CC segments ---------------------------------

@dataclass(frozen=True)
class VoltageReached:
    volts: float


@dataclass(frozen=True)
class TimeElapsed:
    hours: float


@dataclass(frozen=True)
class SocReached:
    cell: str  # "a" or "b"
    soc: float

    def __post_init__(self):
        if self.cell not in ("a", "b"):
            raise ValueError(f"cell must be 'a' or 'b', got {self.cell!r}")


Termination = Union[VoltageReached, TimeElapsed, SocReached]


@dataclass(frozen=True)
class Leg:
    """Half-open record range [start, stop) belonging to one protocol segment."""

    kind: str  # "cc" | "cv" | "rest"
    current_a: float | None  # applied current for cc/rest, None for cv
    start: int
    stop: int


CSV_HEADER = "t,mode,z_a,z_b,i_a,i_b,v_t,i_total,dz,di"


@dataclass
class TimeSeries:
    """Sampled simulation output, column-wise.

    Time is strictly increasing within a leg; at a leg boundary the state is
    duplicated (same t and SOCs, new currents) so that both the end of one
    segment and the start of the next are on record.
    """

    t: np.ndarray
    mode: list[str]
    z_a: np.ndarray
    z_b: np.ndarray
    i_a: np.ndarray
    i_b: np.ndarray
    v_t: np.ndarray
    applied_i: np.ndarray
    legs: list[Leg] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dz(self) -> np.ndarray:
        return self.z_a - self.z_b

    @property
    def di(self) -> np.ndarray:
        return self.i_a - self.i_b

    @property
    def i_total(self) -> np.ndarray:
        return self.i_a + self.i_b

    def final_state(self) -> PackState:
        return PackState(time_h=float(self.t[-1]), z_a=float(self.z_a[-1]), z_b=float(self.z_b[-1]))

    def leg(self, index: int) -> "TimeSeries":
        """View of one leg as its own series."""
        lg = self.legs[index]
        s = slice(lg.start, lg.stop)
        return TimeSeries(
            t=self.t[s], mode=self.mode[s], z_a=self.z_a[s], z_b=self.z_b[s],
            i_a=self.i_a[s], i_b=self.i_b[s], v_t=self.v_t[s],
            applied_i=self.applied_i[s],
            legs=[Leg(lg.kind, lg.current_a, 0, lg.stop - lg.start)],
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for k in range(len(self)):
                row = [
                    repr(float(self.t[k])), self.mode[k],
                    repr(float(self.z_a[k])), repr(float(self.z_b[k])),
                    repr(float(self.i_a[k])), repr(float(self.i_b[k])),
                    repr(float(self.v_t[k])), repr(float(self.i_total[k])),
                    repr(float(self.dz[k])), repr(float(self.di[k])),
                ]
                fh.write(",".join(row) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "t": [float(v) for v in self.t],
            "mode": list(self.mode),
            "z_a": [float(v) for v in self.z_a],
            "z_b": [float(v) for v in self.z_b],
            "i_a": [float(v) for v in self.i_a],
            "i_b": [float(v) for v in self.i_b],
            "v_t": [float(v) for v in self.v_t],
            "i_total": [float(v) for v in self.i_total],
            "dz": [float(v) for v in self.dz],
            "di": [float(v) for v in self.di],
            "legs": [
                {"kind": lg.kind, "current_a": lg.current_a, "start": lg.start, "stop": lg.stop}
                for lg in self.legs
            ],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")


class _Builder:
    """Accumulates records and finalizes them into a TimeSeries."""

    def __init__(self):
        self.t: list[float] = []
        self.mode: list[str] = []
        self.z_a: list[float] = []
        self.z_b: list[float] = []
        self.i_a: list[float] = []
        self.i_b: list[float] = []
        self.v_t: list[float] = []
        self.applied_i: list[float] = []
        self.legs: list[Leg] = []

    def append(self, mode: str, state: PackState, branch: BranchSolution, applied: float):
        self.t.append(state.time_h)
        self.mode.append(mode)
        self.z_a.append(state.z_a)
        self.z_b.append(state.z_b)
        self.i_a.append(branch.i_a)
        self.i_b.append(branch.i_b)
        self.v_t.append(branch.v_t)
        self.applied_i.append(applied)

    def replace_last(self, mode: str, state: PackState, branch: BranchSolution, applied: float):
        for col in (self.t, self.mode, self.z_a, self.z_b, self.i_a, self.i_b,
                    self.v_t, self.applied_i):
            col.pop()
        self.append(mode, state, branch, applied)

    def series(self, kind: str, current_a: float | None) -> TimeSeries:
        leg = Leg(kind=kind, current_a=current_a, start=0, stop=len(self.t))
        return TimeSeries(
            t=np.array(self.t), mode=self.mode,
            z_a=np.array(self.z_a), z_b=np.array(self.z_b),
            i_a=np.array(self.i_a), i_b=np.array(self.i_b),
            v_t=np.array(self.v_t), applied_i=np.array(self.applied_i),
            legs=[leg],
        )


def step_cc(params: PackParams, state: PackState, applied_current: float, dt: float) -> PackState:
    """One explicit Euler step under constant current."""
    branch = solve_branches_cc(params, state, applied_current)
    return _euler(params, state, branch, dt)


def step_cv(params: PackParams, state: PackState, setpoint_voltage: float, dt: float) -> PackState:
    """One explicit Euler step under a voltage hold."""
    branch = solve_branches_cv(params, state, setpoint_voltage)
    return _euler(params, state, branch, dt)


def _euler(params: PackParams, state: PackState, branch: BranchSolution, dt: float) -> PackState:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    new = PackState(
        time_h=state.time_h + dt,
        z_a=state.z_a - dt * branch.i_a / params.cell_a.capacity_ah,
        z_b=state.z_b - dt * branch.i_b / params.cell_b.capacity_ah,
    )
    return new.validate()


def _interp_state(prev: PackState, curr: PackState, theta: float) -> PackState:
    return PackState(
        time_h=prev.time_h + theta * (curr.time_h - prev.time_h),
        z_a=prev.z_a + theta * (curr.z_a - prev.z_a),
        z_b=prev.z_b + theta * (curr.z_b - prev.z_b),
    )


def run_cc_until(
    params: PackParams,
    state: PackState,
    applied_current: float,
    until: Termination,
    config: IntegratorConfig,
    *,
    _mode: str = "CC",
) -> TimeSeries:
    """Integrate at constant current until a termination event.

    The final record is placed on the event by linear interpolation inside
    the crossing step: within ``voltage_tolerance_v`` of a voltage target,
    exactly at the requested time for TimeElapsed, and within roundoff of
    an SOC target.
    """
    state.validate()
    b = _Builder()
    branch = solve_branches_cc(params, state, applied_current)
    b.append(_mode, state, branch, applied_current)

    def event_value(st: PackState, br: BranchSolution) -> float:
        if isinstance(until, VoltageReached):
            return br.v_t - until.volts
        if isinstance(until, SocReached):
            return (st.z_a if until.cell == "a" else st.z_b) - until.soc
        raise TypeError(f"unknown termination {until!r}")

    if isinstance(until, TimeElapsed):
        if until.hours < 0:
            raise ValueError(f"TimeElapsed must be nonnegative, got {until.hours}")
        t_end = state.time_h + until.hours
        steps = 0
        while state.time_h < t_end - 1e-15:
            if steps >= config.max_steps:
                raise NonTerminationError(
                    f"CC segment exceeded max_steps={config.max_steps}", time_h=state.time_h)
            dt = min(config.dt_h, t_end - state.time_h)
            state = _euler(params, state, branch, dt)
            if state.time_h > t_end:  # land exactly on the requested end time
                state = PackState(time_h=t_end, z_a=state.z_a, z_b=state.z_b)
            branch = solve_branches_cc(params, state, applied_current)
            b.append(_mode, state, branch, applied_current)
            steps += 1
        return b.series("rest" if applied_current == 0.0 else "cc", applied_current)

    tol = config.voltage_tolerance_v if isinstance(until, VoltageReached) else 1e-12
    v0 = event_value(state, branch)
    if abs(v0) <= tol:
        return b.series("cc", applied_current)
    if isinstance(until, VoltageReached) and applied_current != 0.0:
        # charging raises the terminal voltage, discharging lowers it; a
        # target already behind the direction of travel is treated as met
        rising = applied_current < 0.0
        if (v0 > 0.0) == rising:
            return b.series("cc", applied_current)
    side = v0 > 0
    steps = 0
    while True:
        if steps >= config.max_steps:
            raise NonTerminationError(
                f"CC segment exceeded max_steps={config.max_steps}", time_h=state.time_h)
        prev_state, prev_val = state, event_value(state, branch)
        state = _euler(params, state, branch, config.dt_h)
        branch = solve_branches_cc(params, state, applied_current)
        b.append(_mode, state, branch, applied_current)
        val = event_value(state, branch)
        steps += 1
        if abs(val) <= tol or (val > 0) != side:
            if abs(val) > tol:
                theta = prev_val / (prev_val - val)
                state = _interp_state(prev_state, state, theta)
                branch = solve_branches_cc(params, state, applied_current)
                b.replace_last(_mode, state, branch, applied_current)
            return b.series("cc", applied_current)


def run_cv_until(
    params: PackParams,
    state: PackState,
    setpoint_voltage: float,
    cutoff_current_abs: float,
    config: IntegratorConfig,
) -> TimeSeries:
    """Hold the terminal voltage until |total current| falls below the cutoff."""
    if cutoff_current_abs <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff_current_abs}")
    state.validate()
    b = _Builder()
    branch = solve_branches_cv(params, state, setpoint_voltage)
    b.append("CV", state, branch, branch.i_total)
    steps = 0
    while abs(branch.i_total) >= cutoff_current_abs:
        if steps >= config.max_steps:
            raise NonTerminationError(
                f"CV segment exceeded max_steps={config.max_steps}", time_h=state.time_h)
        state = _euler(params, state, branch, config.dt_h)
        branch = solve_branches_cv(params, state, setpoint_voltage)
        b.append("CV", state, branch, branch.i_total)
        steps += 1
    return b.series("cv", None)


def concatenate(segments: list[TimeSeries]) -> TimeSeries:
    """Join per-segment series into one, preserving leg boundaries.

    Boundary records are kept on both sides (same time and state, currents
    re-solved for the new operating mode), so time is non-decreasing overall
    and strictly increasing within each leg.
    """
    if not segments:
        raise SeriesStructureError("cannot concatenate zero segments")
    legs: list[Leg] = []
    offset = 0
    for seg in segments:
        for lg in seg.legs:
            legs.append(Leg(lg.kind, lg.current_a, lg.start + offset, lg.stop + offset))
        offset += len(seg)
    return TimeSeries(
        t=np.concatenate([s.t for s in segments]),
        mode=[m for s in segments for m in s.mode],
        z_a=np.concatenate([s.z_a for s in segments]),
        z_b=np.concatenate([s.z_b for s in segments]),
        i_a=np.concatenate([s.i_a for s in segments]),
        i_b=np.concatenate([s.i_b for s in segments]),
        v_t=np.concatenate([s.v_t for s in segments]),
        applied_i=np.concatenate([s.applied_i for s in segments]),
        legs=legs,
    )
