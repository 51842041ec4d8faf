"""Command-line front end.

Subcommands::

    packimb simulate     --config fig2.cfg [--out DIR] [--json]
    packimb steady-state --qa 5 --ra 0.05 --qb 5.6 --rb 0.033 \
                         --alpha 1.2 --u0 3.0 --current -1.67 [--json]
    packimb sweep        --config fig3.cfg [--out DIR] [--jobs N]
    packimb compare      --config fig4.cfg [--out DIR]

Exit codes: 0 success, 2 config/validation error, 3 runtime simulation
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analytic
from .config import RunConfig, load_config
from .errors import ConfigError, PackSimError
from .numeric import IntegratorConfig, VoltageReached, run_cc_until
from .ocv import AffineOcv, TabulatedOcv, fit_piecewise
from .pack import CellParams, PackParams, PackState
from .protocol import run_protocol, summarize_cycle
from .sweep import contours_to_csv, run_sweep, zero_contours

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _out_path(args, cfg_basename: str, suffix: str) -> str:
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, f"{cfg_basename}{suffix}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.protocol is None:
        raise ConfigError("protocol", "missing section (required by the simulate command)")
    series = run_protocol(cfg.pack, cfg.protocol, cfg.integrator)
    csv_path = _out_path(args, cfg.basename, "_timeseries.csv")
    series.to_csv(csv_path)
    series.to_json(_out_path(args, cfg.basename, "_timeseries.json"))
    summary = summarize_cycle(series)
    if args.json:
        print(json.dumps(summary.to_dict(), indent=1))
    else:
        print(f"wrote {csv_path}")
        for key, val in summary.to_dict().items():
            print(f"  {key}: {val}")
    return EXIT_OK


def cmd_steady_state(args) -> int:
    for name in ("qa", "ra", "qb", "rb", "alpha", "u0"):
        if getattr(args, name) <= 0:
            raise ConfigError(f"--{name}", f"must be positive, got {getattr(args, name)}")
    model = AffineOcv(u0=args.u0, alpha=args.alpha)
    pack = PackParams(
        cell_a=CellParams(capacity_ah=args.qa, resistance_ohm=args.ra, ocv=model),
        cell_b=CellParams(capacity_ah=args.qb, resistance_ohm=args.rb, ocv=model),
    )
    sol = analytic.galvanostatic_solution(pack, 0.0, args.current)
    bound = analytic.crate_observability_bound(pack, args.zmin, args.zmax)
    if args.json:
        print(json.dumps({
            "tau_h": sol.tau_h,
            "kappa_soc_per_a": sol.kappa_soc_per_a,
            "dz_ss": sol.dz_ss,
            "di_ss": sol.di_ss,
            "crate_bound_per_h": bound,
        }, indent=1))
    else:
        print(f"tau          = {sol.tau_h} h  (3*tau = {3 * sol.tau_h} h)")
        print(f"kappa        = {sol.kappa_soc_per_a} SOC/A")
        print(f"dz_ss        = {sol.dz_ss} SOC")
        print(f"di_ss        = {sol.di_ss} A")
        print(f"C-rate bound = {bound} 1/h  (SOC window [{args.zmin}, {args.zmax}])")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.sweep_spec()
    grid = run_sweep(spec, cfg.integrator, jobs=args.jobs)
    csv_path = _out_path(args, cfg.basename, "_grid.csv")
    grid.to_csv(csv_path)
    grid.to_json(_out_path(args, cfg.basename, "_grid.json"))
    dz_curve, di_curve = zero_contours(grid)
    contours_to_csv(_out_path(args, cfg.basename, "_contours.csv"), dz_curve, di_curve)
    n_bad = int(np.sum(grid.status != "ok"))
    if args.json:
        print(json.dumps({"points": grid.dz.size, "failed_points": n_bad}, indent=1))
    else:
        print(f"wrote {csv_path} ({grid.dz.size} points, {n_bad} flagged)")
    return EXIT_OK


def _compare_variants(cfg: RunConfig, spec: dict):
    base = cfg.ocv_model
    affine = AffineOcv(u0=spec["u0"], alpha=spec["alpha"])
    if isinstance(base, TabulatedOcv):
        piecewise, _ = fit_piecewise(base, spec["piecewise_segments"])
    else:
        piecewise = base
    return [("affine", affine), ("piecewise", piecewise), ("nonlinear", base)]


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.compare_spec()
    q_a = cfg.pack.cell_a.capacity_ah
    r_a = cfg.pack.cell_a.resistance_ohm
    q_b = cfg.pack.cell_b.capacity_ah
    r_b = cfg.pack.cell_b.resistance_ohm

    runs = {}
    for name, model in _compare_variants(cfg, spec):
        pack = PackParams(
            cell_a=CellParams(capacity_ah=q_a, resistance_ohm=r_a, ocv=model),
            cell_b=CellParams(capacity_ah=q_b, resistance_ohm=r_b, ocv=model),
        )
        runs[name] = run_cc_until(
            pack,
            PackState(time_h=0.0, z_a=spec["z_a0"], z_b=spec["z_b0"]),
            spec["current_a"],
            VoltageReached(spec["v_max"]),
            cfg.integrator,
        )

    # Shared time grid: uniform-dt records common to all three runs (each
    # run's interpolated final record is excluded), sampled every N steps.
    n_common = min(len(s) for s in runs.values())
    kmax = max(n_common - 2, 0)
    idx = list(range(0, kmax + 1, spec["sample_every"]))
    csv_path = _out_path(args, cfg.basename, "_compare.csv")
    names = ["affine", "piecewise", "nonlinear"]
    with open(csv_path, "w", newline="") as fh:
        fh.write("t," + ",".join(f"dz_{n},di_{n}" for n in names) + "\n")
        t = runs["affine"].t
        for k in idx:
            cells = [repr(float(t[k]))]
            for n in names:
                cells.append(repr(float(runs[n].dz[k])))
                cells.append(repr(float(runs[n].di[k])))
            fh.write(",".join(cells) + "\n")
    if args.json:
        print(json.dumps({"rows": len(idx), "path": csv_path}, indent=1))
    else:
        print(f"wrote {csv_path} ({len(idx)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packimb",
        description="SOC and current imbalance simulation for two parallel-connected cells",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", default=None, help="output directory (default: cwd)")
        p.add_argument("--json", action="store_true", help="machine-readable stdout")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    p = sub.add_parser("simulate", help="run a cycling protocol and write the time series")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steady-state", help="print closed-form imbalance quantities")
    for name, hint in (
        ("--qa", "cell a capacity (Ah)"), ("--ra", "cell a resistance (ohm)"),
        ("--qb", "cell b capacity (Ah)"), ("--rb", "cell b resistance (ohm)"),
        ("--alpha", "OCV slope (V)"), ("--u0", "OCV minimum voltage (V)"),
        ("--current", "applied current (A, negative = charge)"),
    ):
        p.add_argument(name, type=float, required=True, help=hint)
    p.add_argument("--zmin", type=float, default=0.0, help="cycle SOC window lower bound")
    p.add_argument("--zmax", type=float, default=1.0, help="cycle SOC window upper bound")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("sweep", help="build a (q,r) imbalance map")
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="affine vs piecewise vs nonlinear OCV time series")
    add_common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PackSimError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
