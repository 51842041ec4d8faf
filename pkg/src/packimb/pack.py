"""Two-cell parallel circuit: parameters, state, and the algebraic solve.

Units are fixed throughout the package: hours, ampere-hours, amperes,
volts, ohms.  With these, the rebalancing time constant comes out directly
in hours with no conversion factors.

Sign convention: applied current is negative for charge and positive for
discharge.  Everything downstream depends on this, and the tests assert it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import SocDomainError, UnsupportedModelError
from .ocv import AffineOcv, OcvModel, SOC_TOL


@dataclass(frozen=True)
class CellParams:
    """One battery: capacity Q (Ah), internal resistance R (ohm), OCV model."""

    capacity_ah: float
    resistance_ohm: float
    ocv: OcvModel

    def __post_init__(self):
        if self.capacity_ah <= 0:
            raise ValueError(f"capacity_ah must be positive, got {self.capacity_ah}")
        if self.resistance_ohm <= 0:
            raise ValueError(f"resistance_ohm must be positive, got {self.resistance_ohm}")


@dataclass(frozen=True)
class PackParams:
    """Two cells in parallel sharing one OCV model instance."""

    cell_a: CellParams
    cell_b: CellParams

    def __post_init__(self):
        # The analytic theory assumes identical OCV curves; requiring the
        # same instance makes the assumption impossible to violate quietly.
        if self.cell_a.ocv is not self.cell_b.ocv:
            raise ValueError("both cells must share the same OCV model instance")

    @property
    def ocv(self) -> OcvModel:
        return self.cell_a.ocv

    @property
    def total_resistance(self) -> float:
        return self.cell_a.resistance_ohm + self.cell_b.resistance_ohm

    @property
    def delta_r(self) -> float:
        return self.cell_a.resistance_ohm - self.cell_b.resistance_ohm

    @property
    def q_ratio(self) -> float:
        """Capacity mismatch q = Q_a / Q_b."""
        return self.cell_a.capacity_ah / self.cell_b.capacity_ah

    @property
    def r_ratio(self) -> float:
        """Resistance mismatch r = R_a / R_b."""
        return self.cell_a.resistance_ohm / self.cell_b.resistance_ohm

    def require_affine(self) -> AffineOcv:
        model = self.ocv
        if not isinstance(model, AffineOcv):
            raise UnsupportedModelError(
                f"operation requires an affine OCV model, got {type(model).__name__}"
            )
        return model

    def swapped(self) -> "PackParams":
        return PackParams(cell_a=self.cell_b, cell_b=self.cell_a)


@dataclass(frozen=True)
class PackState:
    """Simulation time and per-cell SOCs."""

    time_h: float
    z_a: float
    z_b: float

    @property
    def delta_z(self) -> float:
        return self.z_a - self.z_b

    def validate(self) -> "PackState":
        for name, z in (("a", self.z_a), ("b", self.z_b)):
            if not (-SOC_TOL <= z <= 1.0 + SOC_TOL):
                raise SocDomainError(z, cell=name, time_h=self.time_h)
        return self


class BranchSolution(NamedTuple):
    """Instantaneous branch currents and terminal voltage."""

    i_a: float
    i_b: float
    v_t: float

    @property
    def delta_i(self) -> float:
        return self.i_a - self.i_b

    @property
    def i_total(self) -> float:
        return self.i_a + self.i_b


class CurrentDecomposition(NamedTuple):
    rebalance_a: float
    ohmic_a: float
    rebalance_b: float
    ohmic_b: float


def solve_branches_cc(
    params: PackParams, state: PackState, applied_current: float
) -> BranchSolution:
    """Branch currents and terminal voltage under a fixed applied current.

    Valid for any OCV model: the parallel circuit is algebraic in the
    instantaneous OCVs.
    """
    state.validate()
    u_a = params.ocv.evaluate(state.z_a)
    u_b = params.ocv.evaluate(state.z_b)
    r_a = params.cell_a.resistance_ohm
    r_b = params.cell_b.resistance_ohm
    rr = params.total_resistance
    # Written as rebalance + Ohmic term so decompose_current reproduces the
    # branch currents bit-for-bit.
    i_a = (u_a - u_b) / rr + r_b * applied_current / rr
    i_b = (u_b - u_a) / rr + r_a * applied_current / rr
    v_t = (r_b * u_a + r_a * u_b - r_a * r_b * applied_current) / rr
    return BranchSolution(i_a=i_a, i_b=i_b, v_t=v_t)


def solve_branches_cv(
    params: PackParams, state: PackState, setpoint_voltage: float
) -> BranchSolution:
    """Branch currents with the terminal voltage held at a setpoint.

    Each branch is independent under voltage control:
    I_i = (U_i(z_i) - setpoint) / R_i.
    """
    state.validate()
    u_a = params.ocv.evaluate(state.z_a)
    u_b = params.ocv.evaluate(state.z_b)
    i_a = (u_a - setpoint_voltage) / params.cell_a.resistance_ohm
    i_b = (u_b - setpoint_voltage) / params.cell_b.resistance_ohm
    return BranchSolution(i_a=i_a, i_b=i_b, v_t=setpoint_voltage)


def decompose_current(
    params: PackParams, state: PackState, applied_current: float
) -> CurrentDecomposition:
    """Split each branch current into its rebalancing and Ohmic parts.

    Defined only for affine OCV, where the split is exact:
    I_a = +alpha*dz/R_total + (R_b/R_total)*I and
    I_b = -alpha*dz/R_total + (R_a/R_total)*I.
    """
    model = params.require_affine()
    state.validate()
    rr = params.total_resistance
    # Same expressions (and op order) as solve_branches_cc, so the identity
    # rebalance + ohmic == branch current holds exactly, not just to roundoff.
    u_a = model.evaluate(state.z_a)
    u_b = model.evaluate(state.z_b)
    return CurrentDecomposition(
        rebalance_a=(u_a - u_b) / rr,
        ohmic_a=params.cell_b.resistance_ohm * applied_current / rr,
        rebalance_b=(u_b - u_a) / rr,
        ohmic_b=params.cell_a.resistance_ohm * applied_current / rr,
    )
