"""Cyclic row-action solver: successive D-projections over all hyperplanes.

Rows are visited in ascending order, 0..M-1, then again from 0.  After each
full sweep the solver checks the scaled residual

    max_i |<theta_i, s> - y_i| / (1 + |y_i|)

and stops when it is <= ``feas_tol`` (Feasible), when the sweep moved the
iterate by less than ``delta_tol`` in the max norm (Stalled), or at
``max_sweeps`` (SweepCapReached).

Entropy kinds are iterated in gradient coordinates u = g'(s).  Starting from
s = 0 (u = 0) every update adds a multiple of a row to u, so u stays in the
row space of theta, which is the optimality condition for
min sum g(s) subject to theta s = y.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .functionals import DomainError, FunctionalKind, gradient, gradient_inverse
from .projection import (
    DEFAULT_NEWTON_CAP,
    DEFAULT_NEWTON_TOL,
    Hyperplane,
    InfeasibleProjectionError,
    ProjectionSolverError,
    _check_positive_feasible,
    project,
)


class Termination(enum.Enum):
    FEASIBLE = "feasible"
    STALLED = "stalled"
    SWEEP_CAP = "sweep-cap-reached"


class SolverFailure(RuntimeError):
    """A projection inside a sweep failed; carries where it happened."""

    def __init__(self, message, sweep, row, best_iterate=None, trace=None):
        super().__init__(message)
        self.sweep = sweep
        self.row = row
        self.best_iterate = best_iterate
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    kind: FunctionalKind = FunctionalKind.SHIFTED_ENTROPY
    max_sweeps: int = 2000
    feas_tol: float = 1e-8
    delta_tol: float = 1e-12
    newton_tol: float = DEFAULT_NEWTON_TOL
    newton_cap: int = DEFAULT_NEWTON_CAP
    # None means the kind's default start: ones for positive entropy, zeros otherwise
    initial_point: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FunctionalKind.parse(self.kind))
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        for name in ("feas_tol", "delta_tol", "newton_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.newton_cap < 1:
            raise ValueError("newton_cap must be >= 1")
        if self.initial_point is not None:
            p = np.array(self.initial_point, dtype=np.float64)
            p.setflags(write=False)
            object.__setattr__(self, "initial_point", p)

    def start(self, n: int) -> np.ndarray:
        if self.initial_point is not None:
            if self.initial_point.shape != (n,):
                raise ValueError(
                    f"initial point has shape {self.initial_point.shape}, expected ({n},)"
                )
            return self.initial_point.copy()
        if self.kind is FunctionalKind.POSITIVE_ENTROPY:
            return np.ones(n)
        return np.zeros(n)


@dataclass(frozen=True)
class SweepStats:
    max_residual: float
    iterate_delta: float
    lambda_max_abs: float
    # worst residual of a hyperplane right after it was projected onto
    projection_residual: float
    newton_iters: int


@dataclass
class SolverTrace:
    kind: FunctionalKind
    per_sweep: list[SweepStats] = field(default_factory=list)
    termination: Termination | None = None

    @property
    def sweeps_run(self) -> int:
        return len(self.per_sweep)

    @property
    def final_residual(self) -> float:
        return self.per_sweep[-1].max_residual if self.per_sweep else float("nan")


def stack_hyperplanes(hyperplanes) -> tuple[np.ndarray, np.ndarray]:
    hyperplanes = list(hyperplanes)
    if not hyperplanes:
        raise ValueError("need at least one hyperplane")
    n = hyperplanes[0].dim
    for i, h in enumerate(hyperplanes):
        if h.dim != n:
            raise ValueError(f"hyperplane {i} has dimension {h.dim}, expected {n}")
    theta = np.ascontiguousarray(np.stack([h.row for h in hyperplanes]))
    y = np.array([h.value for h in hyperplanes], dtype=np.float64)
    return theta, y


def hyperplanes_from_system(theta, y) -> list[Hyperplane]:
    theta = np.asarray(theta, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if theta.ndim != 2 or y.shape != (theta.shape[0],):
        raise ValueError(f"incompatible system shapes {theta.shape} and {y.shape}")
    return [Hyperplane(theta[i], y[i]) for i in range(theta.shape[0])]


def scaled_residual(theta, y, s) -> float:
    return float(np.max(np.abs(theta @ s - y) / (1.0 + np.abs(y))))


class _Iterate:
    """Primal point plus, for entropy kinds, its gradient coordinates."""

    def __init__(self, kind: FunctionalKind, s: np.ndarray):
        self.kind = kind
        if kind is FunctionalKind.EUCLIDEAN:
            self.u = None
            self.s = np.ascontiguousarray(s, dtype=np.float64)
        else:
            if kind is FunctionalKind.POSITIVE_ENTROPY and np.any(s <= 0):
                raise DomainError("positive-entropy iterations need a strictly positive start")
            self.u = np.ascontiguousarray(gradient(kind, s), dtype=np.float64)
            self.s = np.ascontiguousarray(gradient_inverse(kind, self.u))

    def sweep(self, theta, y, row_sq, config: SolverConfig, sweep_index: int):
        m = theta.shape[0]
        lams = np.zeros(m)
        if self.kind is FunctionalKind.EUCLIDEAN:
            worst = _kernels.sweep_euclidean(theta, y, self.s, row_sq, lams)
            return lams, worst, 0
        iters = np.zeros(m, dtype=np.int64)
        failed, status, worst = _kernels.sweep_dual(
            self.kind.code, theta, y, self.u, self.s,
            config.newton_tol, config.newton_cap, lams, iters,
        )
        if failed >= 0:
            what = "cap exceeded" if status == _kernels.CAP_EXCEEDED else "no bracket below overflow bound"
            raise SolverFailure(
                f"projection onto row {failed} failed in sweep {sweep_index} ({what})",
                sweep_index,
                failed,
                best_iterate=self.s.copy(),
            )
        return lams, worst, int(iters.sum())


def _run_sweeps(it: _Iterate, theta, y, config: SolverConfig, trace: SolverTrace, sweeps: int,
                stop: bool):
    row_sq = np.einsum("ij,ij->i", theta, theta)
    for k in range(sweeps):
        before = it.s.copy()
        try:
            lams, proj_res, iters = it.sweep(theta, y, row_sq, config, trace.sweeps_run)
        except SolverFailure as exc:
            exc.trace = trace
            raise
        stats = SweepStats(
            max_residual=scaled_residual(theta, y, it.s),
            iterate_delta=float(np.max(np.abs(it.s - before))),
            lambda_max_abs=float(np.max(np.abs(lams))),
            projection_residual=float(proj_res),
            newton_iters=iters,
        )
        trace.per_sweep.append(stats)
        if not stop:
            continue
        if stats.max_residual <= config.feas_tol:
            trace.termination = Termination.FEASIBLE
            return
        if stats.iterate_delta < config.delta_tol:
            trace.termination = Termination.STALLED
            return
    if stop:
        trace.termination = Termination.SWEEP_CAP


def _check_domain(kind, theta, y):
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        for i in range(theta.shape[0]):
            try:
                _check_positive_feasible(Hyperplane(theta[i], y[i]))
            except InfeasibleProjectionError as exc:
                raise InfeasibleProjectionError(f"row {i}: {exc}") from None


def solve(hyperplanes, config: SolverConfig = SolverConfig()):
    """Cyclic D-projections until feasible, stalled, or out of sweeps.

    Returns ``(solution, trace)``.  Projection failures are raised as
    :class:`SolverFailure` with the sweep and row where they occurred.
    """
    theta, y = stack_hyperplanes(hyperplanes)
    return solve_system(theta, y, config)


def solve_system(theta, y, config: SolverConfig = SolverConfig()):
    """:func:`solve` for a dense system given as a matrix and right-hand side."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if theta.ndim != 2 or y.shape != (theta.shape[0],):
        raise ValueError(f"incompatible system shapes {theta.shape} and {y.shape}")
    if np.any(~np.any(theta != 0.0, axis=1)):
        raise ValueError("system has an all-zero row")
    _check_domain(config.kind, theta, y)
    it = _Iterate(config.kind, config.start(theta.shape[1]))
    trace = SolverTrace(config.kind)
    _run_sweeps(it, theta, y, config, trace, config.max_sweeps, stop=True)
    return it.s.copy(), trace


@dataclass
class OnlineSolverState:
    """Running estimate for measurements that arrive one row at a time.

    Single owner: append from one thread; ``current`` may be read in between.
    """

    n: int
    config: SolverConfig
    current: np.ndarray
    hyperplanes: list[Hyperplane] = field(default_factory=list)
    projections: int = 0
    _it: _Iterate | None = field(default=None, repr=False)

    def system(self):
        return stack_hyperplanes(self.hyperplanes)


def online_init(n: int, config: SolverConfig = SolverConfig()) -> OnlineSolverState:
    if n < 1:
        raise ValueError("n must be >= 1")
    it = _Iterate(config.kind, config.start(n))
    return OnlineSolverState(n=n, config=config, current=it.s.copy(), _it=it)


def online_append(state: OnlineSolverState, h: Hyperplane, refresh_sweeps: int = 0) -> OnlineSolverState:
    """Project the estimate onto the new hyperplane, then re-sweep all stored rows.

    The state is updated in place and returned.
    """
    if h.dim != state.n:
        raise ValueError(f"hyperplane has dimension {h.dim}, state has {state.n}")
    if refresh_sweeps < 0:
        raise ValueError("refresh_sweeps must be >= 0")
    cfg = state.config
    it = state._it
    if cfg.kind is FunctionalKind.POSITIVE_ENTROPY:
        _check_positive_feasible(h)
    # a single projection is the same compiled sweep over a one-row system
    theta1 = h.row.reshape(1, -1)
    y1 = np.array([h.value])
    try:
        it.sweep(theta1, y1, np.array([h.row @ h.row]), cfg, 0)
    except SolverFailure as exc:
        exc.row = len(state.hyperplanes)
        raise
    state.hyperplanes.append(h)
    state.projections += 1
    if refresh_sweeps:
        theta, y = state.system()
        trace = SolverTrace(cfg.kind)
        _run_sweeps(it, theta, y, cfg, trace, refresh_sweeps, stop=False)
        state.projections += refresh_sweeps * theta.shape[0]
    state.current = it.s.copy()
    return state


def online_settle(state: OnlineSolverState) -> SolverTrace:
    """Keep sweeping the stored rows under the state's stopping rules.

    Continues from the current estimate (and its gradient coordinates), so the
    final point is what batch :func:`solve` would reach from the same history.
    """
    theta, y = state.system()
    trace = SolverTrace(state.config.kind)
    _run_sweeps(state._it, theta, y, state.config, trace, state.config.max_sweeps, stop=True)
    state.projections += trace.sweeps_run * theta.shape[0]
    state.current = state._it.s.copy()
    return trace


def project_once(s0, h: Hyperplane, config: SolverConfig):
    """Single D-projection with the config's kind and Newton settings."""
    return project(s0, h, config.kind, config.newton_tol, config.newton_cap)


def with_kind(config: SolverConfig, kind) -> SolverConfig:
    return replace(config, kind=FunctionalKind.parse(kind))


__all__ = [
    "OnlineSolverState",
    "SolverConfig",
    "SolverFailure",
    "SolverTrace",
    "SweepStats",
    "Termination",
    "online_append",
    "online_init",
    "online_settle",
    "solve",
    "solve_system",
]
