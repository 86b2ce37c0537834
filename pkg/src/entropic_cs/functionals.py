"""Bregman potentials used by the projection and solver layers.

Three separable potentials are supported, each written per component:

    euclidean          g(v) = v**2
    positive-entropy   g(v) = v log v                 (v >= 0, g(0) = 0)
    shifted-entropy    g(v) = (|v| + 1/e) log(|v| + 1/e) + 1/e

The shifted form carries the additive ``+1/e`` so that g(0) = 0; constants
do not move minimizers.  Its gradient sgn(v) (log(|v| + 1/e) + 1) is an odd,
strictly increasing bijection of the reals, which is what makes the
closed-form inverse below possible.

Bregman distance convention: ``D(a, b) = g(a) - g(b) - <grad g(b), a - b>``,
i.e. the second argument is the anchor point.  A D-projection of ``s0`` onto a
set C minimizes ``D(s, s0)`` over s in C.
"""
from __future__ import annotations

import enum
import math

import numpy as np

INV_E = math.exp(-1.0)


class DomainError(ValueError):
    """Argument outside the domain of a potential."""


class FunctionalKind(enum.Enum):
    EUCLIDEAN = "euclidean"
    POSITIVE_ENTROPY = "positive-entropy"
    SHIFTED_ENTROPY = "shifted-entropy"

    @classmethod
    def parse(cls, name: "str | FunctionalKind") -> "FunctionalKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(
            f"unknown functional kind {name!r}; expected one of "
            + ", ".join(k.value for k in cls)
        )

    @property
    def code(self) -> int:
        """Small integer tag used by the compiled kernels."""
        return _KIND_CODES[self]


_KIND_CODES = {
    FunctionalKind.EUCLIDEAN: 0,
    FunctionalKind.POSITIVE_ENTROPY: 1,
    FunctionalKind.SHIFTED_ENTROPY: 2,
}


def _out(v, arr):
    # scalars in, float out
    return float(arr) if np.ndim(v) == 0 else arr


def _check_positive(v, strict):
    a = np.asarray(v, dtype=float)
    bad = a <= 0 if strict else a < 0
    if np.any(bad):
        rel = ">" if strict else ">="
        raise DomainError(f"positive-entropy requires v {rel} 0")
    return a


def potential(kind: FunctionalKind, v):
    """Per-component potential g(v); accepts a scalar or an array."""
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.EUCLIDEAN:
        a = np.asarray(v, dtype=float)
        return _out(v, a * a)
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        a = _check_positive(v, strict=False)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)
        return _out(v, out)
    a = np.abs(np.asarray(v, dtype=float)) + INV_E
    return _out(v, a * np.log(a) + INV_E)


def gradient(kind: FunctionalKind, v):
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.EUCLIDEAN:
        return _out(v, 2.0 * np.asarray(v, dtype=float))
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        a = _check_positive(v, strict=True)
        return _out(v, np.log(a) + 1.0)
    a = np.asarray(v, dtype=float)
    return _out(v, np.sign(a) * (np.log(np.abs(a) + INV_E) + 1.0))


def gradient_inverse(kind: FunctionalKind, u):
    """The unique v with ``gradient(kind, v) == u``.  Total on the reals."""
    kind = FunctionalKind.parse(kind)
    a = np.asarray(u, dtype=float)
    if kind is FunctionalKind.EUCLIDEAN:
        return _out(u, 0.5 * a)
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        return _out(u, np.exp(a - 1.0))
    return _out(u, np.sign(a) * (np.exp(np.abs(a) - 1.0) - INV_E))


def gradient_inverse_derivative(kind: FunctionalKind, u):
    """d/du of ``gradient_inverse``; the curvature weight in the multiplier solve."""
    kind = FunctionalKind.parse(kind)
    a = np.asarray(u, dtype=float)
    if kind is FunctionalKind.EUCLIDEAN:
        return _out(u, np.full_like(a, 0.5))
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        return _out(u, np.exp(a - 1.0))
    return _out(u, np.exp(np.abs(a) - 1.0))


def bregman_distance(kind: FunctionalKind, a, b) -> float:
    """D(a, b) = sum g(a) - g(b) - g'(b) (a - b), anchored at ``b``.

    For the Euclidean potential this is the squared l2 norm ``||a - b||**2``.
    """
    kind = FunctionalKind.parse(kind)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if kind is FunctionalKind.EUCLIDEAN:
        d = a - b
        return float(d @ d)
    if kind is FunctionalKind.POSITIVE_ENTROPY:
        _check_positive(a, strict=False)
        _check_positive(b, strict=True)
        return float(np.sum(_relative_entropy_terms(a, b)))
    # Per component, with A = |a| + 1/e and B = |b| + 1/e:
    #   D = A log(A/B) - A + B + (log B + 1) * ((A - B) - sgn(b) (a - b))
    # The last factor is 0 unless a and b have opposite signs, then 2|a|.
    big_a = np.abs(a) + INV_E
    big_b = np.abs(b) + INV_E
    cross = np.where(np.sign(a) * np.sign(b) < 0, 2.0 * np.abs(a), 0.0)
    terms = _relative_entropy_terms(big_a, big_b) + (np.log(big_b) + 1.0) * cross
    return float(np.sum(terms))


def _relative_entropy_terms(a, b):
    """a log(a/b) - a + b for a >= 0, b > 0, evaluated without cancellation."""
    r = (a - b) / b
    with np.errstate(divide="ignore", invalid="ignore"):
        t = b * ((1.0 + r) * np.log1p(r) - r)
    t = np.where(a > 0, t, b)
    # rounding can leave -1 ulp when a ~ b
    return np.maximum(t, 0.0)
