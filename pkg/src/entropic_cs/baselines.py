"""Comparator solvers and reconstruction metrics."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .signals import SensingEnsemble

L0_MAX_N = 16
L0_MAX_K = 3


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class InfeasibleAtKError(ValueError):
    pass


def _theta(ens_or_theta) -> np.ndarray:
    if isinstance(ens_or_theta, SensingEnsemble):
        return ens_or_theta.theta
    return np.asarray(ens_or_theta, dtype=float)


def pseudo_inverse_solve(ens, y) -> np.ndarray:
    """Minimum-l2-norm solution of theta s = y for a wide, full-row-rank theta.

    Uses a QR factorization of theta.T = Q R, giving s = Q R^{-T} y without
    forming theta theta.T.
    """
    theta = _theta(ens)
    y = np.asarray(y, dtype=float)
    m, n = theta.shape
    if m > n:
        raise ValueError(f"expected m <= n, got a {m}x{n} system")
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    q, r = np.linalg.qr(theta.T, mode="reduced")
    diag = np.abs(np.diag(r))
    cond = diag.max() / diag.min() if diag.min() > 0 else math.inf
    if cond > 1.0 / (n * np.finfo(float).eps):
        raise RankDeficientError(
            f"theta is numerically rank deficient (R-diagonal condition estimate {cond:.3g})",
            cond,
        )
    return q @ solve_triangular(r, y, trans="T")


def l0_oracle(ens, y, k_max: int = L0_MAX_K, rel_tol: float = 1e-8) -> np.ndarray:
    """Sparsest exact solution by exhaustive search over supports of size <= k_max.

    Each support is fitted by least squares and accepted when
    ``||theta s - y|| <= rel_tol * ||y||``.  Among accepted supports of the
    smallest size the lowest residual wins, then the lexicographically first
    support.
    """
    theta = _theta(ens)
    y = np.asarray(y, dtype=float)
    m, n = theta.shape
    if n > L0_MAX_N or k_max > L0_MAX_K:
        raise ValueError(f"l0 oracle is capped at n <= {L0_MAX_N}, k_max <= {L0_MAX_K}")
    ynorm = float(np.linalg.norm(y))
    if ynorm == 0.0:
        return np.zeros(n)
    bound = rel_tol * ynorm
    for k in range(1, k_max + 1):
        best = None
        for support in itertools.combinations(range(n), k):
            cols = theta[:, support]
            coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
            res = float(np.linalg.norm(cols @ coef - y))
            if res <= bound and (best is None or res < best[0]):
                best = (res, support, coef)
        if best is not None:
            s = np.zeros(n)
            s[list(best[1])] = best[2]
            return s
    raise InfeasibleAtKError(f"no support of size <= {k_max} reproduces y")


@dataclass(frozen=True)
class ReconReport:
    rel_l2_error: float
    support_precision: float
    support_recall: float
    residual_inf: float
    wall_time: float = 0.0
    # False when s_star == 0 and rel_l2_error holds the absolute error instead
    relative: bool = True

    def as_dict(self):
        return asdict(self)


def estimated_support(s_hat, support_eps: float = 1e-3) -> np.ndarray:
    s_hat = np.asarray(s_hat, dtype=float)
    peak = np.max(np.abs(s_hat)) if s_hat.size else 0.0
    if peak == 0.0:
        return np.zeros(s_hat.shape, dtype=bool)
    return np.abs(s_hat) > support_eps * peak


def evaluate(s_hat, s_star, ens, y, support_eps: float = 1e-3, wall_time: float = 0.0) -> ReconReport:
    """Error, support precision/recall and constraint residual of ``s_hat``.

    The estimated support is ``|s_hat| > support_eps * max|s_hat|``; the true
    support is the nonzeros of ``s_star``.  An empty estimate has precision 1
    (it claims nothing false).
    """
    s_hat = np.asarray(s_hat, dtype=float)
    s_star = np.asarray(s_star, dtype=float)
    if s_hat.shape != s_star.shape:
        raise ValueError(f"length mismatch: {s_hat.shape} vs {s_star.shape}")
    theta = _theta(ens)
    err = float(np.linalg.norm(s_hat - s_star))
    ref = float(np.linalg.norm(s_star))
    relative = ref > 0
    if relative:
        err /= ref
    est = estimated_support(s_hat, support_eps)
    true = s_star != 0
    hits = int(np.sum(est & true))
    precision = hits / int(est.sum()) if est.any() else 1.0
    recall = hits / int(true.sum()) if true.any() else 1.0
    residual = float(np.max(np.abs(theta @ s_hat - np.asarray(y, dtype=float))))
    return ReconReport(err, precision, recall, residual, float(wall_time), relative)
