"""Compiled inner loops: the multiplier root solve and full row-action sweeps.

Entropy-type projections are carried out in the dual (gradient) coordinates
u = g'(s).  Projecting onto the hyperplane <row, s> = y moves u along the row,
u -> u + lam * row, and lam is the root of

    F(lam) = sum_k row[k] * ginv(u[k] + lam * row[k]) - y,

which is strictly increasing with F'(lam) = sum_k row[k]**2 * ginv'(...).
Kind codes: 0 euclidean, 1 positive entropy, 2 shifted entropy.
"""
import math

import numpy as np
from numba import njit

INV_E = math.exp(-1.0)
# exp(709.8) overflows float64; keep a margin
U_MAX = 700.0
EPS = np.finfo(np.float64).eps

OK = 0
CAP_EXCEEDED = 1
NO_BRACKET = 2


@njit(cache=True)
def ginv(kind, u):
    if kind == 0:
        return 0.5 * u
    if kind == 1:
        return math.exp(u - 1.0)
    v = math.exp(abs(u) - 1.0) - INV_E
    return v if u >= 0.0 else -v


@njit(cache=True)
def ginv_prime(kind, u):
    if kind == 0:
        return 0.5
    if kind == 1:
        return math.exp(u - 1.0)
    return math.exp(abs(u) - 1.0)


@njit(cache=True)
def residual(kind, u0, row, y, lam):
    """F(lam) and F'(lam)."""
    f = -y
    df = 0.0
    for k in range(u0.shape[0]):
        r = row[k]
        if r == 0.0:
            continue
        w = u0[k] + lam * r
        f += r * ginv(kind, w)
        df += r * r * ginv_prime(kind, w)
    return f, df


@njit(cache=True)
def _safe_lambda(u0, row):
    # largest |lam| keeping every |u0 + lam*row| <= U_MAX
    umax = 0.0
    rmax = 0.0
    for k in range(u0.shape[0]):
        if row[k] != 0.0:
            if abs(u0[k]) > umax:
                umax = abs(u0[k])
            if abs(row[k]) > rmax:
                rmax = abs(row[k])
    return (U_MAX - umax) / rmax


@njit(cache=True)
def solve_root(kind, u0, row, y, tol, cap, log):
    """Safeguarded Newton for F(lam) = 0.

    Returns (lam, iters, status, f_at_lam, n_logged).  Every bracket
    [lo, hi] held during the Newton/bisection phase is appended to ``log``
    while it has room.
    """
    thr = tol * (1.0 + abs(y))
    f0, d0 = residual(kind, u0, row, y, 0.0)
    if abs(f0) <= thr:
        return 0.0, 0, OK, f0, 0
    lam_safe = _safe_lambda(u0, row)
    if not lam_safe > 0.0:
        return 0.0, 0, NO_BRACKET, f0, 0

    # bracket growth: trial points d*step, d*2*step, d*4*step, ...
    direction = 1.0 if f0 < 0.0 else -1.0
    step = abs(f0) / d0 if d0 > 0.0 else 1.0
    if not step > 0.0 or step > lam_safe:
        step = lam_safe
    a, fa, da = 0.0, f0, d0
    iters = 0
    while True:
        if iters >= cap:
            return a, iters, CAP_EXCEEDED, fa, 0
        iters += 1
        b = direction * step
        fb, db = residual(kind, u0, row, y, b)
        if abs(fb) <= thr:
            return b, iters, OK, fb, 0
        if (fb > 0.0) != (f0 > 0.0):
            break
        a, fa, da = b, fb, db
        if step >= lam_safe:
            return a, iters, NO_BRACKET, fa, 0
        step = min(2.0 * step, lam_safe)

    if fa < 0.0:
        lo, hi = a, b
    else:
        lo, hi = b, a
    if abs(fa) < abs(fb):
        lam, f, df = a, fa, da
    else:
        lam, f, df = b, fb, db
    n_log = 0
    if n_log < log.shape[0]:
        log[n_log, 0] = lo
        log[n_log, 1] = hi
        n_log += 1

    best_lam, best_f = lam, f
    dx_old = hi - lo
    dx = dx_old
    while iters < cap:
        iters += 1
        newton_inside = df > 0.0 and ((lam - hi) * df - f) * ((lam - lo) * df - f) < 0.0
        if newton_inside and abs(2.0 * f) <= abs(dx_old * df):
            dx_old = dx
            dx = f / df
            lam = lam - dx
        else:
            dx_old = dx
            dx = 0.5 * (hi - lo)
            lam = lo + dx
        f, df = residual(kind, u0, row, y, lam)
        if abs(f) < abs(best_f):
            best_lam, best_f = lam, f
        if abs(f) <= thr:
            return lam, iters, OK, f, n_log
        if f < 0.0:
            lo = lam
        else:
            hi = lam
        if n_log < log.shape[0]:
            log[n_log, 0] = lo
            log[n_log, 1] = hi
            n_log += 1
        if hi - lo <= 4.0 * EPS * max(abs(lo), abs(hi)):
            # interval exhausted at double precision
            return best_lam, iters, OK, best_f, n_log
    return best_lam, iters, CAP_EXCEEDED, best_f, n_log


@njit(cache=True)
def sweep_dual(kind, theta, y, u, s, tol, cap, lams, iters_out):
    """One cyclic pass of entropy-type D-projections, rows 0..m-1 in order.

    Updates ``u`` and ``s`` in place.  Returns (failed_row, status,
    max_relative_projection_residual); failed_row is -1 on success.
    """
    m, n = theta.shape
    log = np.empty((0, 2))
    worst = 0.0
    for i in range(m):
        row = theta[i]
        lam, it, status, f, _ = solve_root(kind, u, row, y[i], tol, cap, log)
        iters_out[i] = it
        if status != OK:
            lams[i] = lam
            return i, status, worst
        lams[i] = lam
        if lam != 0.0:
            for k in range(n):
                if row[k] != 0.0:
                    u[k] += lam * row[k]
                    s[k] = ginv(kind, u[k])
        r = abs(f) / (1.0 + abs(y[i]))
        if r > worst:
            worst = r
    return -1, OK, worst


@njit(cache=True)
def sweep_euclidean(theta, y, s, row_sq, lams):
    """One Kaczmarz pass: s += (y_i - <row, s>) / ||row||^2 * row."""
    m, n = theta.shape
    worst = 0.0
    for i in range(m):
        row = theta[i]
        dot = 0.0
        for k in range(n):
            dot += row[k] * s[k]
        lam = (y[i] - dot) / row_sq[i]
        lams[i] = lam
        after = 0.0
        for k in range(n):
            s[k] += lam * row[k]
            after += row[k] * s[k]
        r = abs(after - y[i]) / (1.0 + abs(y[i]))
        if r > worst:
            worst = r
    return worst
