"""Open-circuit-voltage models.

Three interchangeable model kinds are provided:

* :class:`AffineOcv` -- U(z) = u0 + alpha * z, the form the closed-form
  imbalance theory requires.
* :class:`PiecewiseAffineOcv` -- a small number of linear segments.
* :class:`TabulatedOcv` -- a dense monotone (z, u) lookup table with
  piecewise-linear interpolation.

All models are strictly increasing in z and immutable after construction,
so they can be shared freely across parallel sweep workers.

Out-of-range SOC is a hard error rather than a clamp or extrapolation: a
silent clamp would mask integrator bugs.  A roundoff tolerance of 1e-9 is
allowed at both ends so integrator endpoints like z = 1 + 3e-16 still
evaluate.
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import FitError, OcvTableError, SocDomainError

SOC_TOL = 1e-9

DEFAULT_NMC_TABLE = "nmc_graphite_ocv.csv"


def _check_soc(z: float) -> float:
    """Validate z against [0, 1] with roundoff slack; return the clamped value."""
    if not (-SOC_TOL <= z <= 1.0 + SOC_TOL):
        raise SocDomainError(z)
    return min(max(z, 0.0), 1.0)


@dataclass(frozen=True)
class AffineOcv:
    """U(z) = u0 + alpha * z with u0, alpha > 0."""

    u0: float
    alpha: float

    def __post_init__(self):
        if self.u0 <= 0:
            raise ValueError(f"u0 must be positive, got {self.u0}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def evaluate(self, z: float) -> float:
        z = _check_soc(z)
        return self.u0 + self.alpha * z

    def slope_at(self, z: float) -> float:
        _check_soc(z)
        return self.alpha

    @property
    def voltage_range(self) -> tuple[float, float]:
        return (self.u0, self.u0 + self.alpha)


def _validate_knots(z: np.ndarray, u: np.ndarray, what: str) -> None:
    if len(z) < 2:
        raise ValueError(f"{what} needs at least two points")
    if z[0] != 0.0 or z[-1] != 1.0:
        raise ValueError(f"{what} must span z=0 to z=1, got [{z[0]}, {z[-1]}]")
    if np.any(np.diff(z) <= 0):
        raise ValueError(f"{what} z values must be strictly increasing")
    if np.any(np.diff(u) <= 0):
        raise ValueError(f"{what} u values must be strictly increasing (monotone OCV)")


class _InterpolatedOcv:
    """Shared piecewise-linear evaluation over (z, u) knots."""

    _z: np.ndarray
    _u: np.ndarray

    def evaluate(self, z: float) -> float:
        z = _check_soc(z)
        return float(np.interp(z, self._z, self._u))

    def slope_at(self, z: float) -> float:
        # Convention at a knot: slope of the segment to its right (the last
        # segment is used at z = 1).
        z = _check_soc(z)
        i = int(np.searchsorted(self._z, z, side="right")) - 1
        i = min(max(i, 0), len(self._z) - 2)
        return float((self._u[i + 1] - self._u[i]) / (self._z[i + 1] - self._z[i]))

    @property
    def voltage_range(self) -> tuple[float, float]:
        return (float(self._u[0]), float(self._u[-1]))


@dataclass(frozen=True)
class PiecewiseAffineOcv(_InterpolatedOcv):
    """Monotone piecewise-linear OCV given by a short list of breakpoints."""

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        z = np.array([p[0] for p in self.breakpoints], dtype=float)
        u = np.array([p[1] for p in self.breakpoints], dtype=float)
        _validate_knots(z, u, "breakpoints")
        object.__setattr__(self, "_z", z)
        object.__setattr__(self, "_u", u)

    @property
    def n_segments(self) -> int:
        return len(self.breakpoints) - 1


@dataclass(frozen=True)
class TabulatedOcv(_InterpolatedOcv):
    """Dense monotone OCV table, evaluated by piecewise-linear interpolation."""

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        z = np.array([p[0] for p in self.samples], dtype=float)
        u = np.array([p[1] for p in self.samples], dtype=float)
        _validate_knots(z, u, "samples")
        object.__setattr__(self, "_z", z)
        object.__setattr__(self, "_u", u)

    @property
    def z_grid(self) -> np.ndarray:
        return self._z.copy()

    @property
    def u_grid(self) -> np.ndarray:
        return self._u.copy()


OcvModel = Union[AffineOcv, PiecewiseAffineOcv, TabulatedOcv]


def is_affine(model: OcvModel) -> bool:
    return isinstance(model, AffineOcv)


def load_table(path) -> TabulatedOcv:
    """Load a tabulated OCV from a two-column csv file (header ``z,u``).

    Parsing is strict: a bad header, a short row, or a non-monotone column
    raises :class:`OcvTableError`.
    """
    rows: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise OcvTableError(f"{path}: empty file") from None
        if [h.strip() for h in header] != ["z", "u"]:
            raise OcvTableError(f"{path}: expected header 'z,u', got {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise OcvTableError(f"{path}:{lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError as e:
                raise OcvTableError(f"{path}:{lineno}: {e}") from None
    try:
        return TabulatedOcv(samples=tuple(rows))
    except ValueError as e:
        raise OcvTableError(f"{path}: {e}") from None


def default_nmc_table() -> TabulatedOcv:
    """The shipped NMC/graphite-like OCV table (101 points, 3.0 V to 4.2 V)."""
    ref = importlib.resources.files("packimb").joinpath("data", DEFAULT_NMC_TABLE)
    with importlib.resources.as_file(ref) as path:
        return load_table(path)


def fit_piecewise(table: TabulatedOcv, n_segments: int) -> tuple[PiecewiseAffineOcv, float]:
    """Fit a piecewise-affine model with ``n_segments`` segments to a table.

    Breakpoints are restricted to the table grid (so all segment endpoints
    lie on the tabulated curve) and chosen to minimize the maximum absolute
    voltage deviation over the grid.  The optimum over grid breakpoints is
    found exactly by dynamic programming; ties resolve deterministically to
    the leftmost breakpoint set.

    Returns the fitted model and the achieved max deviation.
    """
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    z = table.z_grid
    u = table.u_grid
    m = len(z)
    n_segments = min(n_segments, m - 1)  # more segments than intervals: exact fit

    # seg_err[i, j]: max |table - chord| over grid points i..j
    seg_err = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 2, m):
            zz = z[i : j + 1]
            chord = u[i] + (u[j] - u[i]) * (zz - z[i]) / (z[j] - z[i])
            seg_err[i, j] = np.max(np.abs(u[i : j + 1] - chord))

    # best[s, j]: minimal achievable max-deviation covering 0..j with s segments
    INF = float("inf")
    best = np.full((n_segments + 1, m), INF)
    choice = np.zeros((n_segments + 1, m), dtype=int)
    best[1, 1:] = seg_err[0, 1:]
    for s in range(2, n_segments + 1):
        for j in range(s, m):
            cands = np.maximum(best[s - 1, s - 1 : j], seg_err[s - 1 : j, j])
            k = int(np.argmin(cands))
            best[s, j] = cands[k]
            choice[s, j] = k + s - 1

    # Recover breakpoint indices.
    idx = [m - 1]
    j = m - 1
    for s in range(n_segments, 1, -1):
        j = int(choice[s, j])
        idx.append(j)
    idx.append(0)
    idx.reverse()

    bps = tuple((float(z[i]), float(u[i])) for i in idx)
    uu = [p[1] for p in bps]
    if any(b <= a for a, b in zip(uu, uu[1:])):
        raise FitError(f"fit produced a non-monotone segment: breakpoints {bps}")
    model = PiecewiseAffineOcv(breakpoints=bps)

    fit_u = np.interp(z, [p[0] for p in bps], uu)
    max_dev = float(np.max(np.abs(fit_u - u)))
    return model, max_dev
