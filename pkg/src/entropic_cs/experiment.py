"""Experiment plumbing behind the CLI: generate, solve, evaluate, write, verify.

Directory layout written by :func:`run_experiment`::

    <out>/manifest.json         config echo, resolved sizes, every run
    <out>/summary.csv           one row per (seed, solver)
    <out>/aggregate.csv         mean/median per solver
    <out>/seed-<seed>/          s_true.txt, x.txt, y.txt, theta.txt
    <out>/seed-<seed>/<solver>/ s_hat.txt, x_hat.txt, trace.csv, manifest.json
"""
from __future__ import annotations

import datetime as _dt
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import InfeasibleAtKError, RankDeficientError, evaluate, l0_oracle, pseudo_inverse_solve
from .config import ExperimentConfig, parse_config
from .fileio import (
    read_csv,
    read_json,
    read_matrix,
    read_vector,
    write_csv,
    write_json,
    write_matrix,
    write_vector,
)
from .functionals import FunctionalKind
from .projection import InfeasibleProjectionError, ProjectionSolverError
from .signals import (
    SensingEnsemble,
    SparseSignalSpec,
    make_cusp,
    make_gaussian_ensemble,
    make_random_sparse,
    measure,
)
from .solver import (
    SolverConfig,
    SolverFailure,
    SolverTrace,
    hyperplanes_from_system,
    online_append,
    online_init,
    online_settle,
    scaled_residual,
    solve_system,
)

log = logging.getLogger(__name__)

TRACE_HEADER = [
    "sweep",
    "max_residual",
    "iterate_delta",
    "lambda_max_abs",
    "projection_residual",
    "newton_iters",
]
SUMMARY_HEADER = [
    "seed",
    "solver",
    "status",
    "rel_l2_error",
    "support_precision",
    "support_recall",
    "residual_inf",
    "wall_time",
    "sweeps",
    "termination",
]
METRICS = ("rel_l2_error", "support_precision", "support_recall", "residual_inf")
SOLVER_ERRORS = (SolverFailure, ProjectionSolverError, InfeasibleProjectionError,
                 RankDeficientError, InfeasibleAtKError)


@dataclass(frozen=True)
class Case:
    seed: int
    x: np.ndarray
    s_true: np.ndarray
    ens: SensingEnsemble
    y: np.ndarray


def make_case(cfg: ExperimentConfig, seed: int) -> Case:
    sig = cfg.signal
    if sig.type == "cusp":
        x, s = make_cusp(sig.n, sig.sparsity, sig.amplitude)
    else:
        spec = SparseSignalSpec(sig.n, sig.sparsity, (sig.amplitude_min, sig.amplitude_max), seed)
        s = make_random_sparse(spec)
    ens = make_gaussian_ensemble(sig.n, cfg.m, seed, cfg.resolved_transform)
    if sig.type != "cusp":
        x = ens.psi @ s
    return Case(seed, x, s, ens, measure(ens, s))


def timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "config": dict(cfg.to_pairs()),
        "config_text": cfg.to_text(),
        "n": cfg.n,
        "m": cfg.m,
        "sparsity": cfg.sparsity,
        "toolkit_version": __version__,
    }


def config_from_manifest(path) -> ExperimentConfig:
    return parse_config(read_json(path)["config_text"], source=path)


def write_case(directory, case: Case, matrices=("theta",)) -> dict:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = {
        "x": write_vector(d / "x.txt", case.x),
        "s_true": write_vector(d / "s_true.txt", case.s_true),
        "y": write_vector(d / "y.txt", case.y),
    }
    for name in matrices:
        files[name] = write_matrix(d / f"{name}.txt", getattr(case.ens, name))
    return {k: str(v) for k, v in files.items()}


def write_trace(path, trace: SolverTrace) -> Path:
    rows = [
        [i, st.max_residual, st.iterate_delta, st.lambda_max_abs, st.projection_residual, st.newton_iters]
        for i, st in enumerate(trace.per_sweep)
    ]
    return write_csv(path, TRACE_HEADER, rows)


@dataclass
class RunResult:
    seed: int
    solver: str
    status: str
    s_hat: np.ndarray | None
    trace: SolverTrace | None
    wall_time: float
    report: dict | None = None


def run_solver(name: str, case: Case, solver_cfg: SolverConfig) -> RunResult:
    """Run one solver by name: a functional kind or a baseline."""
    theta, y = case.ens.theta, case.y
    t0 = time.perf_counter()
    trace = None
    try:
        if name == "pseudo-inverse":
            s_hat = pseudo_inverse_solve(case.ens, y)
        elif name == "l0-oracle":
            s_hat = l0_oracle(case.ens, y)
        else:
            kind = FunctionalKind.parse(name)
            cfg = SolverConfig(
                kind=kind,
                max_sweeps=solver_cfg.max_sweeps,
                feas_tol=solver_cfg.feas_tol,
                delta_tol=solver_cfg.delta_tol,
                newton_tol=solver_cfg.newton_tol,
                newton_cap=solver_cfg.newton_cap,
            )
            s_hat, trace = solve_system(theta, y, cfg)
        status = "ok"
    except SOLVER_ERRORS as exc:
        log.warning("seed %s, %s failed: %s", case.seed, name, exc)
        s_hat = getattr(exc, "best_iterate", None)
        trace = getattr(exc, "trace", None)
        status = f"failed: {exc}"
    return RunResult(case.seed, name, status, s_hat, trace, time.perf_counter() - t0)


def _seed_dir(out: Path, seed: int) -> Path:
    return out / f"seed-{seed:04d}"


def write_run(directory, result: RunResult, case: Case, cfg: ExperimentConfig) -> dict:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = {}
    if result.s_hat is not None:
        files["s_hat"] = str(write_vector(d / "s_hat.txt", result.s_hat))
        files["x_hat"] = str(write_vector(d / "x_hat.txt", case.ens.psi @ result.s_hat))
        rep = evaluate(result.s_hat, case.s_true, case.ens, case.y, cfg.support_eps, result.wall_time)
        result.report = rep.as_dict()
    if result.trace is not None:
        files["trace"] = str(write_trace(d / "trace.csv", result.trace))
    manifest = {
        **config_echo(cfg),
        "seed": result.seed,
        "solver": result.solver,
        "status": result.status,
        "report": result.report,
        "files": files,
        "timestamp": timestamp(),
    }
    if result.trace is not None:
        manifest["sweeps_run"] = result.trace.sweeps_run
        term = result.trace.termination
        manifest["termination"] = term.value if term else None
    write_json(d / "manifest.json", manifest)
    return manifest


def summary_row(result: RunResult) -> list:
    rep = result.report or {}
    nan = float("nan")
    trace = result.trace
    return [
        result.seed,
        result.solver,
        "ok" if result.status == "ok" else "failed",
        *(float(rep.get(k, nan)) for k in METRICS),
        float(result.wall_time),
        trace.sweeps_run if trace else 0,
        trace.termination.value if trace and trace.termination else "",
    ]


def aggregate(rows: list[list]) -> list[list]:
    out = []
    solvers = list(dict.fromkeys(r[1] for r in rows))
    for name in solvers:
        sel = [r for r in rows if r[1] == name]
        ok = [r for r in sel if r[2] == "ok"]
        cols = np.array([r[3:8] for r in ok], dtype=float).reshape(len(ok), 5)
        with np.errstate(all="ignore"):
            mean = cols.mean(axis=0) if len(ok) else np.full(5, np.nan)
            med = np.median(cols, axis=0) if len(ok) else np.full(5, np.nan)
        out.append([name, len(sel), len(sel) - len(ok), *(float(v) for v in mean), float(med[0])])
    return out


AGGREGATE_HEADER = [
    "solver",
    "runs",
    "failures",
    "mean_rel_l2_error",
    "mean_support_precision",
    "mean_support_recall",
    "mean_residual_inf",
    "mean_wall_time",
    "median_rel_l2_error",
]


def run_experiment(cfg: ExperimentConfig, out=None, progress=None) -> dict:
    """Every seed x (kinds + baselines); per-run directories plus summary tables."""
    out = Path(out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    solvers = [k.value for k in cfg.kinds] + list(cfg.baselines)
    rows, runs = [], []
    for seed in cfg.seeds:
        case = make_case(cfg, seed)
        sd = _seed_dir(out, seed)
        write_case(sd, case)
        for name in solvers:
            result = run_solver(name, case, cfg.solver)
            manifest = write_run(sd / name, result, case, cfg)
            rows.append(summary_row(result))
            runs.append({"seed": seed, "solver": name, "status": manifest["status"],
                         "manifest": str(sd / name / "manifest.json")})
            if progress:
                progress(rows[-1])
    write_csv(out / "summary.csv", SUMMARY_HEADER, rows)
    write_csv(out / "aggregate.csv", AGGREGATE_HEADER, aggregate(rows))
    manifest = {
        **config_echo(cfg),
        "seeds": list(cfg.seeds),
        "solvers": solvers,
        "runs": runs,
        "failures": sum(1 for r in rows if r[2] != "ok"),
        "summary": str(out / "summary.csv"),
        "timestamp": timestamp(),
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def verify(out) -> list[str]:
    """Recompute every summary metric from the emitted vectors.

    Returns a list of mismatch descriptions (empty when everything agrees to
    1e-12).  Wall times are not recomputable and are skipped.
    """
    out = Path(out)
    cfg = config_from_manifest(out / "manifest.json")
    problems = []
    cache = {}
    for row in read_csv(out / "summary.csv"):
        seed, solver = int(row["seed"]), row["solver"]
        if row["status"] != "ok":
            continue
        sd = _seed_dir(out, seed)
        if seed not in cache:
            cache[seed] = (read_vector(sd / "s_true.txt"), read_vector(sd / "y.txt"),
                           read_matrix(sd / "theta.txt"))
        s_true, y, theta = cache[seed]
        s_hat = read_vector(sd / solver / "s_hat.txt")
        rep = evaluate(s_hat, s_true, theta, y, cfg.support_eps).as_dict()
        for key in METRICS:
            want = float(row[key])
            got = rep[key]
            if not abs(got - want) <= 1e-12 * max(1.0, abs(want)):
                problems.append(f"seed {seed} {solver} {key}: summary {want!r} != recomputed {got!r}")
    return problems


@dataclass
class OnlineRun:
    s_hat: np.ndarray
    curve: list[list]
    projections_streaming: int
    projections_total: int
    final_residual: float
    settle_trace: SolverTrace | None


def run_online(theta, y, solver_cfg: SolverConfig, refresh_sweeps: int = 1,
               s_true=None, settle: bool = True) -> OnlineRun:
    """Feed rows one at a time; optionally sweep to convergence at the end.

    The curve holds, after every append: number of measurements, relative
    l2 error against ``s_true`` (nan without it), worst scaled residual over
    the rows seen so far, and the running projection count.
    """
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    state = online_init(theta.shape[1], solver_cfg)
    ref = float(np.linalg.norm(s_true)) if s_true is not None else 0.0
    curve = []
    for i, h in enumerate(hyperplanes_from_system(theta, y)):
        online_append(state, h, refresh_sweeps)
        err = float(np.linalg.norm(state.current - s_true) / ref) if ref else float("nan")
        res = scaled_residual(theta[: i + 1], y[: i + 1], state.current)
        curve.append([i + 1, err, res, state.projections])
    streaming = state.projections
    trace = online_settle(state) if settle else None
    return OnlineRun(
        state.current.copy(),
        curve,
        streaming,
        state.projections,
        scaled_residual(theta, y, state.current),
        trace,
    )
