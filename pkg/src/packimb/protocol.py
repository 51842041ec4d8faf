"""Composition of CC and CV segments into full cycling protocols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import PackSimError, ProtocolError, SeriesStructureError
from .numeric import (
    IntegratorConfig,
    Termination,
    TimeElapsed,
    TimeSeries,
    concatenate,
    run_cc_until,
    run_cv_until,
)
from .pack import PackParams, PackState


@dataclass(frozen=True)
class CCStep:
    current_a: float
    until: Termination


@dataclass(frozen=True)
class CVStep:
    setpoint_v: float
    cutoff_a: float

    def __post_init__(self):
        if self.cutoff_a <= 0:
            raise ValueError(f"CV cutoff must be positive, got {self.cutoff_a}")


@dataclass(frozen=True)
class RestStep:
    """Zero-current dwell; runs as a CC segment with I = 0."""

    duration_h: float

    def __post_init__(self):
        if self.duration_h < 0:
            raise ValueError(f"rest duration must be nonnegative, got {self.duration_h}")


ProtocolStep = Union[CCStep, CVStep, RestStep]


@dataclass(frozen=True)
class Protocol:
    steps: tuple[ProtocolStep, ...]
    initial_state: PackState

    def __post_init__(self):
        if not self.steps:
            raise ValueError("protocol must contain at least one step")


def run_protocol(
    params: PackParams, protocol: Protocol, config: IntegratorConfig
) -> TimeSeries:
    """Run every step in order, threading the pack state across boundaries.

    A failing segment aborts the whole run with the step index attached.
    """
    state = protocol.initial_state
    segments: list[TimeSeries] = []
    for index, step in enumerate(protocol.steps):
        try:
            if isinstance(step, CCStep):
                seg = run_cc_until(params, state, step.current_a, step.until, config)
            elif isinstance(step, CVStep):
                seg = run_cv_until(params, state, step.setpoint_v, step.cutoff_a, config)
            elif isinstance(step, RestStep):
                seg = run_cc_until(params, state, 0.0, TimeElapsed(step.duration_h), config)
            else:
                raise TypeError(f"unknown protocol step {step!r}")
        except PackSimError as e:
            raise ProtocolError(index, e) from e
        segments.append(seg)
        state = seg.final_state()
    return concatenate(segments)


@dataclass(frozen=True)
class CycleSummary:
    dz_end_of_charge: float
    di_end_of_charge: float
    dz_end_of_discharge: Optional[float]
    di_end_of_discharge: Optional[float]
    peak_abs_i_a: float
    peak_abs_i_b: float

    def to_dict(self) -> dict:
        return {
            "dz_end_of_charge": self.dz_end_of_charge,
            "di_end_of_charge": self.di_end_of_charge,
            "dz_end_of_discharge": self.dz_end_of_discharge,
            "di_end_of_discharge": self.di_end_of_discharge,
            "peak_abs_i_a": self.peak_abs_i_a,
            "peak_abs_i_b": self.peak_abs_i_b,
        }


def summarize_cycle(series: TimeSeries) -> CycleSummary:
    """End-of-leg imbalance values and per-cell peak current magnitudes.

    The charge leg is the first CC leg with negative current; the discharge
    leg is the first CC leg with positive current (fields are None when the
    protocol has no discharge).  A series without a charge leg is an error.
    """
    charge = next(
        (lg for lg in series.legs if lg.kind == "cc" and (lg.current_a or 0) < 0), None)
    if charge is None:
        raise SeriesStructureError("series has no constant-current charge leg")
    discharge = next(
        (lg for lg in series.legs if lg.kind == "cc" and (lg.current_a or 0) > 0), None)

    k = charge.stop - 1
    dz_c = float(series.dz[k])
    di_c = float(series.di[k])
    dz_d = di_d = None
    if discharge is not None:
        k = discharge.stop - 1
        dz_d = float(series.dz[k])
        di_d = float(series.di[k])
    return CycleSummary(
        dz_end_of_charge=dz_c,
        di_end_of_charge=di_c,
        dz_end_of_discharge=dz_d,
        di_end_of_discharge=di_d,
        peak_abs_i_a=float(np.max(np.abs(series.i_a))),
        peak_abs_i_b=float(np.max(np.abs(series.i_b))),
    )
