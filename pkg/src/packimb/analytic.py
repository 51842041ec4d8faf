"""Closed-form imbalance dynamics for affine OCV.

Constant-current operation reduces the SOC imbalance dz = z_a - z_b to a
single stable first-order LTI state with time constant ``tau`` and
steady-state gain ``kappa`` (dz_ss = kappa * I).  The current imbalance is
the corresponding output equation.  Constant-voltage operation decouples
the two cells into independent first-order decays with per-cell time
constants Q_i * R_i / alpha.

All formulas here require the affine OCV model; other models raise
UnsupportedModelError and are handled numerically instead (see
:mod:`packimb.numeric`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TimeDomainError
from .pack import PackParams


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise TimeDomainError(f"negative time in closed-form trajectory: {t}")
    return t


@dataclass(frozen=True)
class GalvanostaticSolution:
    """Closed-form constant-current imbalance solution.

    tau_h is the rebalancing time constant in hours; kappa_soc_per_a maps
    applied current (A) to steady-state SOC imbalance.
    """

    tau_h: float
    kappa_soc_per_a: float
    dz0: float
    applied_current_a: float
    dz_ss: float
    di_ss: float


def galvanostatic_solution(
    params: PackParams, dz0: float, applied_current: float
) -> GalvanostaticSolution:
    model = params.require_affine()
    q_a = params.cell_a.capacity_ah
    q_b = params.cell_b.capacity_ah
    tau = params.total_resistance / model.alpha * (q_a * q_b / (q_a + q_b))
    kappa = (
        params.cell_a.resistance_ohm * q_a - params.cell_b.resistance_ohm * q_b
    ) / (model.alpha * (q_a + q_b))
    return GalvanostaticSolution(
        tau_h=tau,
        kappa_soc_per_a=kappa,
        dz0=dz0,
        applied_current_a=applied_current,
        dz_ss=kappa * applied_current,
        di_ss=(q_a - q_b) / (q_a + q_b) * applied_current,
    )


def dz_of_t(sol: GalvanostaticSolution, t):
    """SOC imbalance dz(t) = dz0*exp(-t/tau) - kappa*(exp(-t/tau)-1)*I."""
    t = _check_time(t)
    decay = np.exp(-t / sol.tau_h)
    out = sol.dz0 * decay - sol.kappa_soc_per_a * (decay - 1.0) * sol.applied_current_a
    return float(out) if out.ndim == 0 else out


def di_of_t(sol: GalvanostaticSolution, params: PackParams, t):
    """Current imbalance dI(t) = (2*alpha/R_total)*dz(t) - (dR/R_total)*I."""
    model = params.require_affine()
    rr = params.total_resistance
    dz = dz_of_t(sol, t)
    return 2.0 * model.alpha / rr * dz - params.delta_r / rr * sol.applied_current_a


def cc_soc_of_t(
    params: PackParams, z_a0: float, z_b0: float, applied_current: float, t
):
    """Per-cell SOC trajectories under constant current.

    Not needed for the imbalance state itself, but required when stitching
    a CC segment into a CV segment and for cross-checking the numeric
    integrator.  Derived from two facts: the total stored charge
    Q_a*z_a + Q_b*z_b decreases at exactly the applied current, and dz(t)
    follows the closed form.
    """
    sol = galvanostatic_solution(params, z_a0 - z_b0, applied_current)
    t = _check_time(t)
    q_a = params.cell_a.capacity_ah
    q_b = params.cell_b.capacity_ah
    charge = q_a * z_a0 + q_b * z_b0 - applied_current * t
    dz = sol.dz0 * np.exp(-t / sol.tau_h) - sol.kappa_soc_per_a * (
        np.exp(-t / sol.tau_h) - 1.0
    ) * applied_current
    z_a = (charge + q_b * dz) / (q_a + q_b)
    z_b = (charge - q_a * dz) / (q_a + q_b)
    if np.ndim(t) == 0:
        return float(z_a), float(z_b)
    return z_a, z_b


def steady_state_map_point(
    params: PackParams, applied_current: float
) -> tuple[float, float]:
    """(dz_ss, di_ss) for one parameter point; dz_ss = 0 iff R_a*Q_a = R_b*Q_b,
    di_ss = 0 iff Q_a = Q_b."""
    sol = galvanostatic_solution(params, 0.0, applied_current)
    return sol.dz_ss, sol.di_ss


def crate_observability_bound(
    params: PackParams, z_min: float, z_max: float
) -> float:
    """Largest C-rate (1/h) at which a cycle spanning [z_min, z_max] lasts at
    least 3*tau, i.e. long enough for the imbalance to reach ~95% of its
    steady-state value.  Necessary, not claimed sufficient."""
    if not (0.0 <= z_min <= z_max <= 1.0):
        raise ValueError(f"need 0 <= z_min <= z_max <= 1, got [{z_min}, {z_max}]")
    sol = galvanostatic_solution(params, 0.0, 0.0)
    return (z_max - z_min) / (3.0 * sol.tau_h)


@dataclass(frozen=True)
class PotentiostaticSolution:
    """Closed-form constant-voltage solution parameters."""

    tau_a_h: float
    tau_b_h: float
    delta_u_v: float
    z_a0: float
    z_b0: float


def potentiostatic_solution(
    params: PackParams, setpoint_voltage: float, z_a0: float, z_b0: float
) -> PotentiostaticSolution:
    model = params.require_affine()
    return PotentiostaticSolution(
        tau_a_h=params.cell_a.capacity_ah * params.cell_a.resistance_ohm / model.alpha,
        tau_b_h=params.cell_b.capacity_ah * params.cell_b.resistance_ohm / model.alpha,
        delta_u_v=setpoint_voltage - model.u0,
        z_a0=z_a0,
        z_b0=z_b0,
    )


def _cell_fields(psol: PotentiostaticSolution, cell: str) -> tuple[float, float]:
    if cell == "a":
        return psol.z_a0, psol.tau_a_h
    if cell == "b":
        return psol.z_b0, psol.tau_b_h
    raise ValueError(f"cell must be 'a' or 'b', got {cell!r}")


def potentiostatic_z_of_t(psol: PotentiostaticSolution, params: PackParams, cell: str, t):
    """z_i(t) under a voltage hold; asymptote is delta_u / alpha."""
    model = params.require_affine()
    z0, tau = _cell_fields(psol, cell)
    t = _check_time(t)
    decay = np.exp(-t / tau)
    out = z0 * decay - (decay - 1.0) * psol.delta_u_v / model.alpha
    return float(out) if out.ndim == 0 else out


def potentiostatic_current(psol: PotentiostaticSolution, params: PackParams, cell: str, t):
    """Branch current (alpha*z_i(t) - delta_u) / R_i; decays to zero."""
    model = params.require_affine()
    z = potentiostatic_z_of_t(psol, params, cell, t)
    r = params.cell_a.resistance_ohm if cell == "a" else params.cell_b.resistance_ohm
    return (model.alpha * z - psol.delta_u_v) / r
