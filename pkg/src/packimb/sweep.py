"""(q, r) mismatch maps.

Cell a is held fixed; cell b is derived per grid point from the mismatch
ratios q = Q_a/Q_b and r = R_a/R_b.  Analytic mode fills the steady-state
imbalance maps; simulate mode runs a CC charge to a voltage ceiling per
point (any OCV model) and records the end-of-charge imbalance.

Grid points are independent; with jobs > 1 they are evaluated in a process
pool, with results keyed by grid index so the output is deterministic.
"""

from __future__ import annotations

import concurrent.futures
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import steady_state_map_point
from .errors import NonTerminationError, SocDomainError
from .numeric import IntegratorConfig, VoltageReached, run_cc_until
from .pack import CellParams, PackParams, PackState

STATUS_OK = "ok"
STATUS_RANGE = "range-error"
STATUS_NON_TERMINATED = "non-terminated"

GRID_CSV_HEADER = "q,r,dz,di,status"


def default_axis(n_points: int = 41, lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    """Log-spaced mismatch axis, symmetric under q <-> 1/q."""
    return np.geomspace(lo, hi, n_points)


@dataclass(frozen=True)
class SweepSpec:
    base_cell: CellParams
    q_values: np.ndarray
    r_values: np.ndarray
    applied_current_a: float
    mode: str = "analytic_ss"  # or "simulate_to_voltage"
    v_max: Optional[float] = None
    z_a0: float = 0.85
    z_b0: float = 0.90

    def __post_init__(self):
        if self.mode not in ("analytic_ss", "simulate_to_voltage"):
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        for name, ax in (("q_values", self.q_values), ("r_values", self.r_values)):
            ax = np.asarray(ax, dtype=float)
            if len(ax) < 2:
                raise ValueError(f"{name} needs at least two points")
            if np.any(ax <= 0):
                raise ValueError(f"{name} must be strictly positive")
            object.__setattr__(self, name, ax)
        if self.mode == "simulate_to_voltage" and self.v_max is None:
            raise ValueError("simulate_to_voltage mode requires v_max")

    def pack_at(self, q: float, r: float) -> PackParams:
        cell_b = CellParams(
            capacity_ah=self.base_cell.capacity_ah / q,
            resistance_ohm=self.base_cell.resistance_ohm / r,
            ocv=self.base_cell.ocv,
        )
        return PackParams(cell_a=self.base_cell, cell_b=cell_b)


@dataclass
class SweepGrid:
    q_values: np.ndarray
    r_values: np.ndarray
    dz: np.ndarray  # shape (len(q), len(r))
    di: np.ndarray
    status: np.ndarray  # same shape, dtype=object strings
    mode: str = "analytic_ss"

    def to_csv(self, path) -> None:
        """Long-form rows in q-major, then r order (deterministic)."""
        with open(path, "w", newline="") as fh:
            fh.write(GRID_CSV_HEADER + "\n")
            for i, q in enumerate(self.q_values):
                for j, r in enumerate(self.r_values):
                    row = [repr(float(q)), repr(float(r)), repr(float(self.dz[i, j])),
                           repr(float(self.di[i, j])), str(self.status[i, j])]
                    fh.write(",".join(row) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "q_values": [float(v) for v in self.q_values],
            "r_values": [float(v) for v in self.r_values],
            "dz": [[float(v) for v in row] for row in self.dz],
            "di": [[float(v) for v in row] for row in self.di],
            "status": [list(row) for row in self.status],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")


def _eval_point(spec: SweepSpec, config: IntegratorConfig, q: float, r: float):
    params = spec.pack_at(q, r)
    if spec.mode == "analytic_ss":
        dz, di = steady_state_map_point(params, spec.applied_current_a)
        return dz, di, STATUS_OK
    try:
        series = run_cc_until(
            params,
            PackState(time_h=0.0, z_a=spec.z_a0, z_b=spec.z_b0),
            spec.applied_current_a,
            VoltageReached(spec.v_max),
            config,
        )
    except SocDomainError:
        return float("nan"), float("nan"), STATUS_RANGE
    except NonTerminationError:
        return float("nan"), float("nan"), STATUS_NON_TERMINATED
    return float(series.dz[-1]), float(series.di[-1]), STATUS_OK


def _eval_index(args):
    spec, config, i, j = args
    return i, j, _eval_point(spec, config, float(spec.q_values[i]), float(spec.r_values[j]))


def run_sweep(
    spec: SweepSpec, config: IntegratorConfig | None = None, jobs: int = 1
) -> SweepGrid:
    config = config or IntegratorConfig()
    nq, nr = len(spec.q_values), len(spec.r_values)
    dz = np.full((nq, nr), np.nan)
    di = np.full((nq, nr), np.nan)
    status = np.full((nq, nr), STATUS_OK, dtype=object)

    tasks = [(spec, config, i, j) for i in range(nq) for j in range(nr)]
    if jobs > 1 and spec.mode == "simulate_to_voltage":
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_eval_index, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))
            for i, j, (vz, vi, st) in results:
                dz[i, j], di[i, j], status[i, j] = vz, vi, st
    else:
        for task in tasks:
            i, j, (vz, vi, st) = _eval_index(task)
            dz[i, j], di[i, j], status[i, j] = vz, vi, st
    return SweepGrid(
        q_values=np.asarray(spec.q_values, dtype=float),
        r_values=np.asarray(spec.r_values, dtype=float),
        dz=dz, di=di, status=status, mode=spec.mode,
    )


def _scan_zeros(values: np.ndarray, axis: np.ndarray, other: float, status_row) -> list[tuple[float, float]]:
    """Zero crossings of one grid row by linear interpolation along `axis`.

    Returns (axis_value, other) pairs; `other` is the fixed second coordinate.
    """
    out = []
    for k in range(len(axis) - 1):
        if status_row[k] != STATUS_OK or status_row[k + 1] != STATUS_OK:
            continue
        a, b = values[k], values[k + 1]
        if a == 0.0:
            out.append((float(axis[k]), other))
        elif (a < 0) != (b < 0):
            x = axis[k] + (axis[k + 1] - axis[k]) * (0.0 - a) / (b - a)
            out.append((float(x), other))
    if len(axis) and values[-1] == 0.0 and status_row[-1] == STATUS_OK:
        out.append((float(axis[-1]), other))
    return out


def zero_contours(grid: SweepGrid) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Zero-crossing loci of the dz and di maps as lists of (q, r) points.

    Crossings are located by linear interpolation along the q axis for each
    fixed r.  A grid with no sign change yields an empty curve.
    """
    dz_curve: list[tuple[float, float]] = []
    di_curve: list[tuple[float, float]] = []
    for j, r in enumerate(grid.r_values):
        dz_curve += _scan_zeros(grid.dz[:, j], grid.q_values, float(r), grid.status[:, j])
        di_curve += _scan_zeros(grid.di[:, j], grid.q_values, float(r), grid.status[:, j])
    return dz_curve, di_curve


def contours_to_csv(path, dz_curve, di_curve) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("curve,q,r\n")
        for q, r in dz_curve:
            fh.write(f"dz,{float(q)!r},{float(r)!r}\n")
        for q, r in di_curve:
            fh.write(f"di,{float(q)!r},{float(r)!r}\n")
