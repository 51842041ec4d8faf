"""Declarative run configuration.

One JSON document per experiment, with nested sections::

    {
      "pack":       {"cell_a": {"capacity_ah": ..., "resistance_ohm": ...},
                     "cell_b": {...}},
      "ocv":        {"kind": "affine", "u0": ..., "alpha": ...}
                    | {"kind": "table", "path": "...csv"}
                    | {"kind": "table", "builtin": "nmc"}
                    | {"kind": "piecewise", "breakpoints": [[z, u], ...]},
      "protocol":   {"initial_soc": {"z_a": ..., "z_b": ...},
                     "steps": [{"kind": "cc", "current_a": ...,
                                "until": {"voltage_v": ...} | {"time_h": ...}
                                         | {"cell": "a", "soc": ...}},
                               {"kind": "cv", "setpoint_v": ..., "cutoff_a": ...},
                               {"kind": "rest", "duration_h": ...}]},
      "integrator": {"dt_h": ..., "voltage_tolerance_v": ..., "max_steps": ...},
      "sweep":      {"mode": "analytic_ss" | "simulate_to_voltage",
                     "q_range": [min, max, n], "r_range": [min, max, n],
                     "current_a": ..., "v_max": ..., "z_a0": ..., "z_b0": ...},
      "compare":    {"current_a": ..., "v_max": ..., "z_a0": ..., "z_b0": ...,
                     "affine": {"u0": ..., "alpha": ...},
                     "piecewise_segments": 4, "sample_every": 10},
      "output":     {"basename": "run"}
    }

Sections beyond ``pack``/``ocv``/``integrator`` are required only by the
commands that use them.  Table paths resolve relative to the config file.
Validation reports the full field path of the first offending entry.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Optional

from .errors import ConfigError, OcvTableError
from .numeric import IntegratorConfig, SocReached, TimeElapsed, VoltageReached
from .ocv import (
    AffineOcv,
    OcvModel,
    PiecewiseAffineOcv,
    default_nmc_table,
    load_table,
)
from .pack import CellParams, PackParams, PackState
from .protocol import CCStep, CVStep, Protocol, RestStep
from .sweep import SweepSpec

_MISSING = object()


def _get(d: dict, path: str, key: str, typ=None, default=_MISSING):
    if key not in d:
        if default is not _MISSING:
            return default
        raise ConfigError(f"{path}.{key}", "missing required field")
    val = d[key]
    if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if typ is not None and not isinstance(val, typ):
        raise ConfigError(f"{path}.{key}", f"expected {getattr(typ, '__name__', typ)}, got {type(val).__name__}")
    return val


def _positive(value: float, path: str) -> float:
    if value <= 0:
        raise ConfigError(path, f"must be positive, got {value}")
    return value


def _soc(value: float, path: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise ConfigError(path, f"must be in [0, 1], got {value}")
    return value


@dataclass
class RunConfig:
    """Validated configuration, with constructed model objects."""

    raw: dict
    base_dir: str
    ocv_model: OcvModel
    pack: PackParams
    integrator: IntegratorConfig
    protocol: Optional[Protocol]
    basename: str

    def to_dict(self) -> dict:
        """Re-emit the config; reloading the result is semantics-preserving."""
        return json.loads(json.dumps(self.raw))

    def sweep_spec(self) -> SweepSpec:
        return _build_sweep(self.raw, self.base_dir, self.pack)

    def compare_spec(self) -> dict:
        return _build_compare(self.raw)


def _build_ocv(cfg: dict, base_dir: str) -> OcvModel:
    section = _get(cfg, "config", "ocv", dict)
    kind = _get(section, "ocv", "kind", str)
    try:
        if kind == "affine":
            return AffineOcv(
                u0=_positive(_get(section, "ocv", "u0", float), "ocv.u0"),
                alpha=_positive(_get(section, "ocv", "alpha", float), "ocv.alpha"),
            )
        if kind == "table":
            builtin = _get(section, "ocv", "builtin", str, default=None)
            if builtin is not None:
                if builtin != "nmc":
                    raise ConfigError("ocv.builtin", f"unknown builtin table {builtin!r}")
                return default_nmc_table()
            path = _get(section, "ocv", "path", str)
            full = os.path.join(base_dir, path)
            if not os.path.exists(full):
                raise ConfigError("ocv.path", f"OCV table file not found: {full}")
            return load_table(full)
        if kind == "piecewise":
            bps = _get(section, "ocv", "breakpoints", list)
            return PiecewiseAffineOcv(breakpoints=tuple((float(z), float(u)) for z, u in bps))
    except OcvTableError as e:
        raise ConfigError("ocv.path", str(e)) from e
    except (ValueError, TypeError) as e:
        raise ConfigError("ocv", str(e)) from e
    raise ConfigError("ocv.kind", f"unknown OCV kind {kind!r}")


def _build_cell(cfg: dict, path: str, model: OcvModel) -> CellParams:
    return CellParams(
        capacity_ah=_positive(_get(cfg, path, "capacity_ah", float), f"{path}.capacity_ah"),
        resistance_ohm=_positive(_get(cfg, path, "resistance_ohm", float), f"{path}.resistance_ohm"),
        ocv=model,
    )


def _build_pack(cfg: dict, model: OcvModel) -> PackParams:
    section = _get(cfg, "config", "pack", dict)
    return PackParams(
        cell_a=_build_cell(_get(section, "pack", "cell_a", dict), "pack.cell_a", model),
        cell_b=_build_cell(_get(section, "pack", "cell_b", dict), "pack.cell_b", model),
    )


def _build_termination(until: dict, path: str):
    keys = set(until)
    if keys == {"voltage_v"}:
        return VoltageReached(_get(until, path, "voltage_v", float))
    if keys == {"time_h"}:
        t = _get(until, path, "time_h", float)
        if t < 0:
            raise ConfigError(f"{path}.time_h", f"must be nonnegative, got {t}")
        return TimeElapsed(t)
    if keys == {"cell", "soc"}:
        cell = _get(until, path, "cell", str)
        if cell not in ("a", "b"):
            raise ConfigError(f"{path}.cell", f"must be 'a' or 'b', got {cell!r}")
        return SocReached(cell, _soc(_get(until, path, "soc", float), f"{path}.soc"))
    raise ConfigError(path, f"unknown termination fields {sorted(keys)}")


def _build_protocol(cfg: dict) -> Optional[Protocol]:
    section = cfg.get("protocol")
    if section is None:
        return None
    initial = _get(section, "protocol", "initial_soc", dict)
    state = PackState(
        time_h=0.0,
        z_a=_soc(_get(initial, "protocol.initial_soc", "z_a", float), "protocol.initial_soc.z_a"),
        z_b=_soc(_get(initial, "protocol.initial_soc", "z_b", float), "protocol.initial_soc.z_b"),
    )
    raw_steps = _get(section, "protocol", "steps", list)
    if not raw_steps:
        raise ConfigError("protocol.steps", "must contain at least one step")
    steps = []
    for k, raw in enumerate(raw_steps):
        path = f"protocol.steps[{k}]"
        if not isinstance(raw, dict):
            raise ConfigError(path, "each step must be an object")
        kind = _get(raw, path, "kind", str)
        try:
            if kind == "cc":
                steps.append(CCStep(
                    current_a=_get(raw, path, "current_a", float),
                    until=_build_termination(_get(raw, path, "until", dict), f"{path}.until"),
                ))
            elif kind == "cv":
                steps.append(CVStep(
                    setpoint_v=_get(raw, path, "setpoint_v", float),
                    cutoff_a=_positive(_get(raw, path, "cutoff_a", float), f"{path}.cutoff_a"),
                ))
            elif kind == "rest":
                steps.append(RestStep(duration_h=_get(raw, path, "duration_h", float)))
            else:
                raise ConfigError(f"{path}.kind", f"unknown step kind {kind!r}")
        except ValueError as e:
            raise ConfigError(path, str(e)) from e
    return Protocol(steps=tuple(steps), initial_state=state)


def _build_integrator(cfg: dict) -> IntegratorConfig:
    section = cfg.get("integrator", {})
    if not isinstance(section, dict):
        raise ConfigError("integrator", "must be an object")
    try:
        return IntegratorConfig(
            dt_h=_get(section, "integrator", "dt_h", float, default=1e-3),
            voltage_tolerance_v=_get(section, "integrator", "voltage_tolerance_v", float, default=1e-4),
            max_steps=_get(section, "integrator", "max_steps", int, default=2_000_000),
        )
    except ValueError as e:
        raise ConfigError("integrator", str(e)) from e


def _axis(rng, path: str):
    import numpy as np

    if not (isinstance(rng, list) and len(rng) == 3):
        raise ConfigError(path, "expected [min, max, n_points]")
    lo, hi, n = float(rng[0]), float(rng[1]), int(rng[2])
    if lo <= 0 or hi <= lo:
        raise ConfigError(path, f"need 0 < min < max, got [{lo}, {hi}]")
    if n < 2:
        raise ConfigError(path, f"n_points must be >= 2, got {n}")
    return np.geomspace(lo, hi, n)


def _build_sweep(cfg: dict, base_dir: str, pack: PackParams) -> SweepSpec:
    section = cfg.get("sweep")
    if section is None:
        raise ConfigError("sweep", "missing section (required by the sweep command)")
    mode = _get(section, "sweep", "mode", str)
    try:
        return SweepSpec(
            base_cell=pack.cell_a,
            q_values=_axis(_get(section, "sweep", "q_range", list), "sweep.q_range"),
            r_values=_axis(_get(section, "sweep", "r_range", list), "sweep.r_range"),
            applied_current_a=_get(section, "sweep", "current_a", float),
            mode=mode,
            v_max=_get(section, "sweep", "v_max", float, default=None),
            z_a0=_soc(_get(section, "sweep", "z_a0", float, default=0.85), "sweep.z_a0"),
            z_b0=_soc(_get(section, "sweep", "z_b0", float, default=0.90), "sweep.z_b0"),
        )
    except ValueError as e:
        raise ConfigError("sweep", str(e)) from e


def _build_compare(cfg: dict) -> dict:
    section = cfg.get("compare")
    if section is None:
        raise ConfigError("compare", "missing section (required by the compare command)")
    affine = _get(section, "compare", "affine", dict)
    out = {
        "current_a": _get(section, "compare", "current_a", float),
        "v_max": _get(section, "compare", "v_max", float),
        "z_a0": _soc(_get(section, "compare", "z_a0", float), "compare.z_a0"),
        "z_b0": _soc(_get(section, "compare", "z_b0", float), "compare.z_b0"),
        "u0": _positive(_get(affine, "compare.affine", "u0", float), "compare.affine.u0"),
        "alpha": _positive(_get(affine, "compare.affine", "alpha", float), "compare.affine.alpha"),
        "piecewise_segments": _get(section, "compare", "piecewise_segments", int, default=4),
        "sample_every": _get(section, "compare", "sample_every", int, default=10),
    }
    if out["piecewise_segments"] < 1:
        raise ConfigError("compare.piecewise_segments", "must be >= 1")
    if out["sample_every"] < 1:
        raise ConfigError("compare.sample_every", "must be >= 1")
    return out


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from e
    return load_config_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def load_config_dict(raw: dict, base_dir: str = ".") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    model = _build_ocv(raw, base_dir)
    try:
        pack = _build_pack(raw, model)
    except ValueError as e:
        raise ConfigError("pack", str(e)) from e
    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "must be an object")
    basename = _get(output, "output", "basename", str, default="run")
    return RunConfig(
        raw=raw,
        base_dir=base_dir,
        ocv_model=model,
        pack=pack,
        integrator=_build_integrator(raw),
        protocol=_build_protocol(raw),
        basename=basename,
    )
