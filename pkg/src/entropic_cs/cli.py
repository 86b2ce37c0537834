"""Command-line harness: ``entropic-cs <generate|solve|experiment|online|verify>``.

Exit codes: 0 success, 1 verification mismatch, 2 configuration error,
3 solver failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import evaluate
from .config import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    load_config,
    load_preset,
    parse_config,
)
from .experiment import (
    SOLVER_ERRORS,
    config_echo,
    make_case,
    run_experiment,
    run_online,
    timestamp,
    verify,
    write_case,
    write_trace,
)
from .fileio import FileFormatError, read_json, read_matrix, read_vector, write_csv, write_json, write_vector
from .functionals import FunctionalKind
from .solver import SolverConfig, solve_system

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

log = logging.getLogger("entropic_cs")


def _load(args) -> ExperimentConfig:
    """Base config from --preset / --config, then --set, --seed, --kind, --out."""
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError("use either --preset or --config, not both")
    if getattr(args, "preset", None):
        cfg = load_preset(args.preset)
    elif getattr(args, "config", None):
        path = Path(args.config)
        if path.suffix == ".json":
            cfg = parse_config(read_json(path)["config_text"], source=path)
        else:
            cfg = load_config(path)
    else:
        cfg = ExperimentConfig()
    pairs = []
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        pairs.append((None, key.strip(), value.strip()))
    if getattr(args, "seed", None) is not None:
        pairs.append((None, "seeds", str(args.seed)))
    if getattr(args, "kind", None):
        pairs.append((None, "kinds", args.kind))
    if getattr(args, "out", None):
        pairs.append((None, "output_dir", args.out))
    cfg = apply_overrides(cfg, pairs, source="command line")
    return cfg.validate()


def _solver_config(args, kind) -> SolverConfig:
    cfg = _load(args)
    return replace(cfg.solver, kind=FunctionalKind.parse(kind))


def cmd_generate(args) -> int:
    cfg = _load(args)
    seed = cfg.seeds[0]
    out = Path(cfg.output_dir)
    case = make_case(cfg, seed)
    files = write_case(out, case, matrices=("phi", "psi", "theta"))
    write_json(out / "manifest.json", {
        **config_echo(replace(cfg, seeds=(seed,))),
        "seed": seed,
        "files": files,
        "timestamp": timestamp(),
    })
    print(f"wrote N={cfg.n} M={cfg.m} S={cfg.sparsity} seed={seed} to {out}")
    return EXIT_OK


def _read_inputs(d: Path):
    theta = read_matrix(d / "theta.txt")
    y = read_vector(d / "y.txt")
    if y.shape != (theta.shape[0],):
        raise FileFormatError(f"y has {y.size} entries but theta has {theta.shape[0]} rows")
    psi = read_matrix(d / "psi.txt") if (d / "psi.txt").exists() else np.eye(theta.shape[1])
    s_true = read_vector(d / "s_true.txt") if (d / "s_true.txt").exists() else None
    return theta, y, psi, s_true


def cmd_solve(args) -> int:
    d = Path(args.input)
    out = Path(args.out or d / args.kind)
    scfg = _solver_config(args, args.kind)
    theta, y, psi, s_true = _read_inputs(d)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status, code, trace = "ok", EXIT_OK, None
    try:
        s_hat, trace = solve_system(theta, y, scfg)
    except SOLVER_ERRORS as exc:
        s_hat = getattr(exc, "best_iterate", None)
        trace = getattr(exc, "trace", None)
        status, code = f"failed: {exc}", EXIT_SOLVER
        print(f"solver failure: {exc}", file=sys.stderr)
    wall = time.perf_counter() - t0
    files = {}
    report = None
    if s_hat is not None:
        files["s_hat"] = str(write_vector(out / "s_hat.txt", s_hat))
        files["x_hat"] = str(write_vector(out / "x_hat.txt", psi @ s_hat))
        if s_true is not None:
            report = evaluate(s_hat, s_true, theta, y, wall_time=wall).as_dict()
    if trace is not None:
        files["trace"] = str(write_trace(out / "trace.csv", trace))
    manifest = {
        "toolkit_version": __version__,
        "inputs": str(d),
        "kind": scfg.kind.value,
        "solver": {k: getattr(scfg, k) for k in
                   ("max_sweeps", "feas_tol", "delta_tol", "newton_tol", "newton_cap")},
        "m": int(theta.shape[0]),
        "n": int(theta.shape[1]),
        "status": status,
        "report": report,
        "files": files,
        "timestamp": timestamp(),
    }
    if trace is not None:
        manifest["sweeps_run"] = trace.sweeps_run
        manifest["termination"] = trace.termination.value if trace.termination else None
        manifest["final_residual"] = trace.final_residual
    write_json(out / "manifest.json", manifest)
    if trace is not None and code == EXIT_OK:
        msg = f"{scfg.kind.value}: {trace.termination.value} after {trace.sweeps_run} sweeps"
        if report:
            msg += f", rel_l2_error={report['rel_l2_error']:.3e}"
        print(msg)
    return code


def cmd_experiment(args) -> int:
    cfg = _load(args)

    def progress(row):
        if not args.quiet:
            print(f"seed {row[0]:>4} {row[1]:<17} {row[2]:<6} rel_l2_error={row[3]:.3e} "
                  f"time={row[7]:.2f}s")

    manifest = run_experiment(cfg, progress=progress)
    print(f"summary: {manifest['summary']} ({manifest['failures']} failed runs)")
    return EXIT_SOLVER if manifest["failures"] else EXIT_OK


def cmd_online(args) -> int:
    d = Path(args.input)
    out = Path(args.out or d / f"online-{args.kind}")
    scfg = _solver_config(args, args.kind)
    theta, y, psi, s_true = _read_inputs(d)
    out.mkdir(parents=True, exist_ok=True)
    try:
        run = run_online(theta, y, scfg, args.refresh_sweeps, s_true, settle=not args.no_settle)
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        write_json(out / "manifest.json", {"status": f"failed: {exc}", "timestamp": timestamp()})
        return EXIT_SOLVER
    write_csv(out / "error_curve.csv",
              ["measurements", "rel_l2_error", "max_residual", "projections"], run.curve)
    files = {
        "s_hat": str(write_vector(out / "s_hat.txt", run.s_hat)),
        "x_hat": str(write_vector(out / "x_hat.txt", psi @ run.s_hat)),
        "error_curve": str(out / "error_curve.csv"),
    }
    if run.settle_trace is not None:
        files["settle_trace"] = str(write_trace(out / "settle_trace.csv", run.settle_trace))
    write_json(out / "manifest.json", {
        "toolkit_version": __version__,
        "inputs": str(d),
        "kind": scfg.kind.value,
        "refresh_sweeps": args.refresh_sweeps,
        "settled": not args.no_settle,
        "projections_streaming": run.projections_streaming,
        "projections_total": run.projections_total,
        "final_residual": run.final_residual,
        "settle_termination": run.settle_trace.termination.value if run.settle_trace else None,
        "status": "ok",
        "files": files,
        "timestamp": timestamp(),
    })
    print(f"{theta.shape[0]} rows streamed, {run.projections_total} projections, "
          f"final residual {run.final_residual:.2e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    problems = verify(args.directory)
    for p in problems:
        print(p)
    if problems:
        return EXIT_MISMATCH
    print("summary reproduced from emitted vectors")
    return EXIT_OK


def _config_flags(p, kind=False):
    p.add_argument("--config", help="key = value config file, or a run manifest (.json)")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    if kind:
        p.add_argument("--kind", default="shifted-entropy",
                       choices=[k.value for k in FunctionalKind])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entropic-cs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write signal, ensemble and measurements")
    _config_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="reconstruct from theta.txt / y.txt")
    p.add_argument("--in", dest="input", required=True, help="directory written by generate")
    _config_flags(p, kind=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="seeds x solvers, with summary tables")
    _config_flags(p)
    p.add_argument("--kind", help="comma-separated functional kinds (overrides config)")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("online", help="stream measurement rows one at a time")
    p.add_argument("--in", dest="input", required=True)
    _config_flags(p, kind=True)
    p.add_argument("--refresh-sweeps", type=int, default=1)
    p.add_argument("--no-settle", action="store_true",
                   help="stop after the last append instead of sweeping to convergence")
    p.set_defaults(func=cmd_online)

    p = sub.add_parser("verify", help="recompute an experiment summary from its files")
    p.add_argument("directory")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FileFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
