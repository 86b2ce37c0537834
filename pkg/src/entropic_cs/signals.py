"""Test signals, the DCT pair, Gaussian sensing ensembles and the forward model.

Random numbers come from numpy's Philox4x64-10 counter-based generator keyed
by ``(seed, stream)``; uniforms are the generator's 53-bit doubles and
Gaussians are produced from them by the Box-Muller transform (below), not by
numpy's ziggurat.  Streams keep the signal and the measurement matrix
independent for a given seed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

STREAM_SIGNAL = 0
STREAM_ENSEMBLE = 1

CUSP_LOCATION = 0.37


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=[seed, stream]))


def uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size)


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals from pairs of uniforms (u1, u2).

    z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2), with
    u1 taken from (0, 1] so the log is finite.  Pairs are emitted in order
    z0, z1, and an odd trailing value is dropped.
    """
    pairs = (size + 1) // 2
    u = uniforms(rng, 2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))
    angle = 2.0 * math.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return z.reshape(-1)[:size]


@lru_cache(maxsize=8)
def _dct_matrix_cached(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(math.pi * (2 * i + 1) * k / (2 * n)) * math.sqrt(2.0 / n)
    c[0, :] = math.sqrt(1.0 / n)
    c.setflags(write=False)
    return c


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II analysis matrix C, so that s = C x and x = C.T s."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _dct_matrix_cached(int(n))


def dct_forward(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return dct_matrix(x.shape[0]) @ x


def dct_inverse(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return dct_matrix(s.shape[0]).T @ s


def keep_largest(s: np.ndarray, k: int) -> np.ndarray:
    """Zero all but the k largest-magnitude entries (ties broken by lower index)."""
    order = np.argsort(-np.abs(s), kind="stable")
    out = np.zeros_like(s)
    out[order[:k]] = s[order[:k]]
    return out


def make_cusp(n: int, target_sparsity: int, amplitude: float = 1.0):
    """Cusp sqrt(|t - 0.37|) at t = (i + 0.5)/n, made exactly sparse in the DCT domain.

    Returns ``(x, s)`` where ``s`` keeps the ``target_sparsity`` largest DCT
    coefficients of the scaled cusp and ``x = dct_inverse(s)``.
    """
    if not 1 <= target_sparsity <= n:
        raise ValueError("need 1 <= target_sparsity <= n")
    t = (np.arange(n) + 0.5) / n
    raw = amplitude * np.sqrt(np.abs(t - CUSP_LOCATION))
    s = keep_largest(dct_forward(raw), target_sparsity)
    return dct_inverse(s), s


@dataclass(frozen=True)
class SparseSignalSpec:
    n: int
    sparsity: int
    # magnitudes are drawn from this range; each nonzero gets an independent sign
    amplitude_range: tuple[float, float] = (1.0, 2.0)
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.sparsity <= self.n:
            raise ValueError("need 1 <= sparsity <= n")
        lo, hi = self.amplitude_range
        if not 0 < lo <= hi:
            raise ValueError("amplitude_range must satisfy 0 < lo <= hi")


def make_random_sparse(spec: SparseSignalSpec) -> np.ndarray:
    """Exactly ``spec.sparsity`` nonzeros at distinct uniform positions.

    Positions come from a partial Fisher-Yates shuffle, then magnitudes and
    signs, all from the signal stream of ``spec.seed``.
    """
    rng = philox(spec.seed, STREAM_SIGNAL)
    k = spec.sparsity
    perm = np.arange(spec.n)
    for i, u in enumerate(uniforms(rng, k)):
        j = i + min(int(u * (spec.n - i)), spec.n - i - 1)
        perm[i], perm[j] = perm[j], perm[i]
    lo, hi = spec.amplitude_range
    magnitude = lo + (hi - lo) * uniforms(rng, k)
    sign = np.where(uniforms(rng, k) < 0.5, -1.0, 1.0)
    s = np.zeros(spec.n)
    s[perm[:k]] = sign * magnitude
    return s


@dataclass(frozen=True)
class SensingEnsemble:
    phi: np.ndarray
    psi: np.ndarray
    theta: np.ndarray
    seed: int
    transform: str

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]


def make_gaussian_ensemble(n: int, m: int, seed: int, transform: str = "identity") -> SensingEnsemble:
    """phi with iid N(0, 1/m) entries, psi = I or the inverse DCT, theta = phi psi."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    transform = transform.lower()
    if m > n:
        warnings.warn(f"m={m} > n={n}: more measurements than unknowns", stacklevel=2)
    rng = philox(seed, STREAM_ENSEMBLE)
    phi = box_muller(rng, m * n).reshape(m, n) / math.sqrt(m)
    if transform == "identity":
        psi = np.eye(n)
        theta = phi.copy()
    elif transform == "dct":
        psi = dct_matrix(n).T.copy()
        theta = phi @ psi
    else:
        raise ValueError(f"unknown transform {transform!r}; expected 'identity' or 'dct'")
    for a in (phi, psi, theta):
        a.setflags(write=False)
    return SensingEnsemble(phi, psi, np.ascontiguousarray(theta), int(seed), transform)


def measure(ens: SensingEnsemble, s) -> np.ndarray:
    """y = theta s."""
    s = np.asarray(s, dtype=float)
    if s.shape != (ens.n,):
        raise ValueError(f"coefficient vector has shape {s.shape}, expected ({ens.n},)")
    return ens.theta @ s
