"""SOC and current imbalance dynamics for two parallel-connected battery cells.

Closed-form constant-current and constant-voltage solutions for affine
open-circuit voltage, a forward-Euler simulator valid for arbitrary
monotone OCV curves, CC-CV cycling protocols, and (q, r) mismatch maps.

Units throughout: hours, ampere-hours, amperes, volts, ohms.  Applied
current is negative for charge, positive for discharge.
"""

from .analytic import (
    GalvanostaticSolution,
    PotentiostaticSolution,
    cc_soc_of_t,
    crate_observability_bound,
    di_of_t,
    dz_of_t,
    galvanostatic_solution,
    potentiostatic_current,
    potentiostatic_solution,
    potentiostatic_z_of_t,
    steady_state_map_point,
)
from .errors import (
    ConfigError,
    FitError,
    NonTerminationError,
    OcvTableError,
    PackSimError,
    ProtocolError,
    SeriesStructureError,
    SocDomainError,
    TimeDomainError,
    UnsupportedModelError,
)
from .numeric import (
    IntegratorConfig,
    SocReached,
    TimeElapsed,
    TimeSeries,
    VoltageReached,
    run_cc_until,
    run_cv_until,
    step_cc,
    step_cv,
)
from .ocv import (
    AffineOcv,
    OcvModel,
    PiecewiseAffineOcv,
    TabulatedOcv,
    default_nmc_table,
    fit_piecewise,
    load_table,
)
from .pack import (
    BranchSolution,
    CellParams,
    CurrentDecomposition,
    PackParams,
    PackState,
    decompose_current,
    solve_branches_cc,
    solve_branches_cv,
)
from .protocol import (
    CCStep,
    CVStep,
    CycleSummary,
    Protocol,
    RestStep,
    run_protocol,
    summarize_cycle,
)
from .sweep import SweepGrid, SweepSpec, default_axis, run_sweep, zero_contours

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
