"""Command-line entry point.

Subcommands:

    resetburgers run         --config FILE --out DIR [--seed S] [--threads K] [--force]
    resetburgers experiment  [KIND] --config FILE --out DIR [--seed S] [--threads K] [--force]
    resetburgers oracle-check [--out DIR] [--seed S]

Exit status: 0 success, 1 parse/validation/usage error, 2 oracle-check
failure.  Diagnostics go to stderr; stdout carries a single summary line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .config import config_echo, parse_config
from .errors import ParseError, ResetBurgersError, ValidationError
from .experiments import EXPERIMENTS, ExperimentSpec
from .fields import make_grid, norms, sample, field_from_values, write_field_csv
from .noise import NoiseDriver
from .output import MANIFEST_NAME, write_manifest, write_table_csv
from .particles import DIAG_COLUMNS, RunConfig, run
from .reference import burgers_solve, cole_hopf, ito_euler_spde, spde_v_shift_oracle

__all__ = ["main", "dispatch"]


class _Parser(argparse.ArgumentParser):
    # usage problems should exit 1 per the status contract, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="resetburgers", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand")

    def common(sp, config_required=True):
        sp.add_argument("--config", type=Path, required=config_required,
                        help="INI config file")
        sp.add_argument("--out", type=Path, required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        sp.add_argument("--threads", type=int,
                        default=max(1, os.cpu_count() or 1),
                        help="worker processes (never affects results)")
        sp.add_argument("--force", action="store_true",
                        help="overwrite an existing manifest")

    common(sub.add_parser("run", help="single particle-system realization"))
    pe = sub.add_parser("experiment", help="Monte Carlo experiment")
    pe.add_argument("kind", nargs="?", default=None,
                    help=f"one of {sorted(EXPERIMENTS)} (else from config)")
    common(pe)
    po = sub.add_parser("oracle-check",
                        help="closed-form oracle equivalence checks")
    po.add_argument("--out", type=Path, default=None)
    po.add_argument("--seed", type=int, default=42)
    po.add_argument("--force", action="store_true")
    return p


def _prepare_out(out_dir: Path, force: bool) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / MANIFEST_NAME
    if manifest.exists() and not force:
        raise ValidationError(
            f"{manifest} exists; pass --force to overwrite"
        )
    return out_dir


def _dispatch_run(args) -> int:
    cfg = parse_config(args.config.read_text(), seed_override=args.seed)
    if isinstance(cfg, ExperimentSpec):
        raise ValidationError("config contains [experiment]; use the "
                              "'experiment' subcommand")
    out = _prepare_out(args.out, args.force)
    t0 = time.perf_counter()
    report = run(cfg, NoiseDriver(cfg.seed, cfg.n_copies, cfg.h))
    rows = list(zip(*(report.series[c] for c in DIAG_COLUMNS)))
    diag = out / "diagnostics.csv"
    write_table_csv(diag, DIAG_COLUMNS, rows)
    final = out / "final_u.csv"
    write_field_csv(report.u_final, final)
    job = {
        "subcommand": "run",
        "config": config_echo(cfg),
        "seed": cfg.seed,
        "stop": report.stop,
        "t_stop": report.t_stop,
        "epochs": report.epochs,
    }
    write_manifest(out, job, [diag, final], time.perf_counter() - t0)
    print(f"run {report.stop} at t={report.t_stop:.6g} -> {out}")
    return 0


def _dispatch_experiment(args) -> int:
    spec = parse_config(args.config.read_text(), seed_override=args.seed,
                        threads=args.threads)
    if isinstance(spec, RunConfig):
        raise ValidationError("config has no [experiment] section")
    if args.kind is not None:
        kind = args.kind.replace("-", "_").lower()
        if kind not in EXPERIMENTS:
            raise ValidationError(
                f"unknown experiment {args.kind!r}; choose from {sorted(EXPERIMENTS)}"
            )
        if kind != spec.kind:
            from dataclasses import replace
            spec = replace(spec, kind=kind)
    out = _prepare_out(args.out, args.force)
    t0 = time.perf_counter()
    result = EXPERIMENTS[spec.kind](spec)
    outputs = []
    for name, (cols, rows) in result.tables.items():
        path = out / f"{name}.csv"
        write_table_csv(path, cols, rows)
        outputs.append(path)
    summary = dict(result.summary)
    if result.fit is not None:
        summary["fit"] = {
            "slope": result.fit.slope,
            "intercept": result.fit.intercept,
            "residual": result.fit.residual,
            "n_points": result.fit.n_points,
        }
    summary["master_seed"] = spec.base.seed
    spath = out / "summary.json"
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    outputs.append(spath)
    job = {
        "subcommand": "experiment",
        "config": config_echo(spec),
        "seed": spec.base.seed,
    }
    write_manifest(out, job, outputs, time.perf_counter() - t0)
    print(f"experiment {spec.kind} done -> {out}")
    return 0


def _dispatch_oracle_check(args) -> int:
    """Closed-form equivalence checks with the reference-solver tolerances."""
    t0 = time.perf_counter()
    checks = []

    # deterministic solver vs log-transform closed form
    g = make_grid(256)
    u0 = sample(lambda x: math.sin(2 * math.pi * x), g)
    _, fs = burgers_solve(u0, 0.5, 0.5, 1e-4)
    exact = cole_hopf(u0, 0.5, 0.5, g.points)
    err1 = float(np.abs(fs[-1].values - exact).max())
    checks.append(("cole_hopf_vs_spectral_linf", err1, 1e-8, err1 < 1e-8))

    # SPDE shift representation vs literal Ito Euler scheme
    seed = args.seed if args.seed is not None else 42
    h = 1e-4
    N, T = 2, 0.25
    driver = NoiseDriver(seed, N, h)
    v_euler = ito_euler_spde(u0, 0.5, N, driver, T, h)
    xi_T = driver.aggregate(0, round(T / h))
    v_shift = spde_v_shift_oracle(u0, 0.5, N, xi_T, T, dt_ref=5e-5)
    err2 = norms(field_from_values(g, v_euler.values - v_shift.values), 0)
    checks.append(("spde_shift_vs_ito_euler_l2", err2, 2e-3, err2 < 2e-3))

    ok = all(c[3] for c in checks)
    for name, err, tol, passed in checks:
        print(f"oracle-check {name}: err={err:.3e} tol={tol:.0e} "
              f"{'PASS' if passed else 'FAIL'}", file=sys.stderr)
    if args.out is not None:
        out = _prepare_out(args.out, args.force)
        path = out / "oracle_check.json"
        with open(path, "w") as fh:
            json.dump(
                {
                    "seed": seed,
                    "checks": [
                        {"name": n, "error": e, "tolerance": t, "pass": p}
                        for n, e, t, p in checks
                    ],
                },
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
        write_manifest(out, {"subcommand": "oracle-check", "seed": seed},
                       [path], time.perf_counter() - t0)
    print("oracle-check " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 2


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.subcommand == "run":
            return _dispatch_run(args)
        if args.subcommand == "experiment":
            return _dispatch_experiment(args)
        return _dispatch_oracle_check(args)
    except (ParseError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ResetBurgersError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
