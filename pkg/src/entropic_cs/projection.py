"""D-projections of a point onto a single hyperplane ``<row, s> = value``.

For a separable potential g, the projection s_p of s0 satisfies

    g'(s_p) = g'(s0) + lam * row,    <row, s_p> = value,

so s_p = (g')^{-1}(g'(s0) + lam * row) and only the scalar multiplier lam has
to be found.  The Euclidean case has lam in closed form; the entropy cases
solve a strictly monotone scalar equation with a safeguarded Newton iteration.

Multiplier convention: for the Euclidean potential ``multiplier`` is the
Kaczmarz step ``(value - <row, s0>) / ||row||**2`` so that
``s_p = s0 + multiplier * row``.  Because g'(v) = 2v there, the gradient-space
multiplier is twice that number.  Entropy kinds report the gradient-space
multiplier directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .functionals import DomainError, FunctionalKind, gradient, gradient_inverse

DEFAULT_NEWTON_TOL = 1e-12
DEFAULT_NEWTON_CAP = 100


class InvalidHyperplaneError(ValueError):
    pass


class InfeasibleProjectionError(ValueError):
    """No point of the potential's domain lies on the hyperplane."""


class ProjectionSolverError(RuntimeError):
    """The multiplier iteration did not converge."""

    def __init__(self, message, best_multiplier=float("nan"), residual=float("nan")):
        super().__init__(message)
        self.best_multiplier = best_multiplier
        self.residual = residual


@dataclass(frozen=True)
class Hyperplane:
    row: np.ndarray
    value: float

    def __post_init__(self):
        row = np.ascontiguousarray(self.row, dtype=np.float64)
        if row.ndim != 1:
            raise InvalidHyperplaneError("hyperplane row must be one-dimensional")
        if not np.all(np.isfinite(row)) or not np.isfinite(self.value):
            raise InvalidHyperplaneError("hyperplane has non-finite entries")
        if not np.any(row != 0.0):
            raise InvalidHyperplaneError("zero row defines no hyperplane")
        object.__setattr__(self, "row", row)
        object.__setattr__(self, "value", float(self.value))

    @property
    def dim(self) -> int:
        return self.row.shape[0]

    def residual(self, s) -> float:
        return float(self.row @ np.asarray(s, dtype=float) - self.value)


@dataclass(frozen=True)
class ProjectionResult:
    point: np.ndarray
    multiplier: float
    newton_iters: int
    residual: float
    kind: FunctionalKind


@dataclass(frozen=True)
class MultiplierSolve:
    multiplier: float
    iters: int
    residual: float
    brackets: np.ndarray  # (k, 2) array of [lo, hi] held by the safeguarded phase


def _as_point(s0, h: Hyperplane) -> np.ndarray:
    s0 = np.ascontiguousarray(s0, dtype=np.float64)
    if s0.shape != h.row.shape:
        raise ValueError(f"point has shape {s0.shape}, hyperplane row has {h.row.shape}")
    return s0


def _check_positive_feasible(h: Hyperplane):
    row, y = h.row, h.value
    if np.all(row >= 0) and y <= 0 or np.all(row <= 0) and y >= 0:
        raise InfeasibleProjectionError(
            f"no strictly positive point satisfies <row, s> = {y!r} "
            "for a row of constant sign"
        )


def solve_multiplier(
    s0,
    h: Hyperplane,
    kind: FunctionalKind,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iters: int = DEFAULT_NEWTON_CAP,
    *,
    detailed: bool = False,
):
    """Root of F(lam) = <row, (g')^{-1}(g'(s0) + lam * row)> - value.

    Stops once ``|F| <= tol * (1 + |value|)``.  Returns ``(lam, iters)``, or a
    :class:`MultiplierSolve` carrying the bracket history when ``detailed``.
    """
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.EUCLIDEAN:
        raise ValueError("the Euclidean multiplier is closed-form; use project_euclidean")
    s0 = _as_point(s0, h)
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        if np.any(s0 <= 0):
            raise DomainError("positive-entropy projection needs a strictly positive point")
        _check_positive_feasible(h)
    u0 = np.ascontiguousarray(gradient(kind, s0))
    log = np.empty((max_iters + 1, 2))
    lam, iters, status, f, n_log = _kernels.solve_root(
        kind.code, u0, h.row, h.value, tol, max_iters, log
    )
    if status == _kernels.NO_BRACKET:
        if kind is FunctionalKind.POSITIVE_ENTROPY:
            raise InfeasibleProjectionError(
                "multiplier exceeds the exponent overflow bound; "
                "treating the hyperplane as infeasible"
            )
        raise ProjectionSolverError(
            "multiplier root lies beyond the exponent overflow bound", lam, f
        )
    if status == _kernels.CAP_EXCEEDED:
        raise ProjectionSolverError(
            f"multiplier iteration hit the cap of {max_iters} steps "
            f"(best lam={lam:.17g}, residual={f:.3g})",
            lam,
            f,
        )
    if detailed:
        return MultiplierSolve(lam, iters, f, log[:n_log].copy())
    return lam, iters


def _dual_projection(s0, h, kind, tol, max_iters) -> ProjectionResult:
    s0 = _as_point(s0, h)
    lam, iters = solve_multiplier(s0, h, kind, tol, max_iters)
    u = gradient(kind, s0) + lam * h.row
    point = gradient_inverse(kind, u)
    # untouched coordinates keep their exact input value
    still = h.row == 0.0
    point[still] = s0[still]
    return ProjectionResult(point, lam, iters, h.residual(point), kind)


def project_euclidean(s0, h: Hyperplane) -> ProjectionResult:
    """Orthogonal projection: s0 + lam * row, lam = (value - <row,s0>)/||row||^2."""
    s0 = _as_point(s0, h)
    lam = (h.value - h.row @ s0) / (h.row @ h.row)
    point = s0 + lam * h.row
    return ProjectionResult(point, float(lam), 0, h.residual(point), FunctionalKind.EUCLIDEAN)


def project_positive_entropy(
    s0, h: Hyperplane, tol: float = DEFAULT_NEWTON_TOL, max_iters: int = DEFAULT_NEWTON_CAP
) -> ProjectionResult:
    """Multiplicative update s0 * exp(lam * row); needs s0 > 0."""
    return _dual_projection(s0, h, FunctionalKind.POSITIVE_ENTROPY, tol, max_iters)


def project_shifted_entropy(
    s0, h: Hyperplane, tol: float = DEFAULT_NEWTON_TOL, max_iters: int = DEFAULT_NEWTON_CAP
) -> ProjectionResult:
    """D-projection under the shifted entropy; defined for signed points.

    The sign of each output coordinate is the sign of the shifted gradient
    g'(s0[n]) + lam * row[n], so no sign has to be guessed up front.
    """
    return _dual_projection(s0, h, FunctionalKind.SHIFTED_ENTROPY, tol, max_iters)


def project(
    s0,
    h: Hyperplane,
    kind: FunctionalKind,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iters: int = DEFAULT_NEWTON_CAP,
) -> ProjectionResult:
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.EUCLIDEAN:
        return project_euclidean(s0, h)
    return _dual_projection(s0, h, kind, tol, max_iters)
