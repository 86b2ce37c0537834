import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic_cs.functionals import (
    DomainError,
    FunctionalKind,
    bregman_distance,
    gradient,
    gradient_inverse,
    gradient_inverse_derivative,
    potential,
)

from oracles import central_difference

E = math.e
SE = FunctionalKind.SHIFTED_ENTROPY
PE = FunctionalKind.POSITIVE_ENTROPY
EU = FunctionalKind.EUCLIDEAN
finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("v, g, dg", [
    (0.0, 0.0, 0.0),
    (1.0, (1 + 1 / E) * math.log(1 + 1 / E) + 1 / E, math.log(1 + 1 / E) + 1),
    (-1.0, (1 + 1 / E) * math.log(1 + 1 / E) + 1 / E, -(math.log(1 + 1 / E) + 1)),
    (1 - 1 / E, 1 / E, 1.0),
    (2.0, (2 + 1 / E) * math.log(2 + 1 / E) + 1 / E, math.log(2 + 1 / E) + 1),
])
def test_shifted_entropy_hand_values(v, g, dg):
    assert potential(SE, v) == pytest.approx(g, abs=1e-15)
    assert gradient(SE, v) == pytest.approx(dg, abs=1e-15)


def test_positive_entropy_hand_values():
    assert potential(PE, 0.0) == 0.0
    assert potential(PE, 1.0) == 0.0
    assert potential(PE, E) == pytest.approx(E)
    assert gradient(PE, 1.0) == 1.0
    assert gradient_inverse(PE, 1.0) == 1.0


def test_euclidean_hand_values():
    assert potential(EU, 3.0) == 9.0
    assert gradient(EU, -2.0) == -4.0
    assert gradient_inverse(EU, 5.0) == 2.5


def test_positive_entropy_domain():
    with pytest.raises(DomainError):
        potential(PE, -1e-3)
    with pytest.raises(DomainError):
        gradient(PE, 0.0)


def test_kind_parsing():
    assert FunctionalKind.parse("shifted-entropy") is SE
    assert FunctionalKind.parse(PE) is PE
    with pytest.raises(ValueError):
        FunctionalKind.parse("l1")


@pytest.mark.parametrize("kind", list(FunctionalKind))
def test_gradient_matches_finite_differences(kind):
    lo = 0.05 if kind is PE else -10.0
    grid = np.linspace(lo, 10.0, 2001)
    grid = grid[np.abs(grid) > 1e-3]  # the shifted entropy has a kink-free but curved origin
    fd = central_difference(lambda v: potential(kind, v), grid, 1e-5)
    assert np.max(np.abs(fd - gradient(kind, grid))) <= 1e-6


@given(finite)
def test_shifted_gradient_roundtrip(v):
    assert gradient_inverse(SE, gradient(SE, v)) == pytest.approx(v, abs=1e-12 * (1 + abs(v)))


@given(finite)
def test_shifted_entropy_is_even_with_odd_gradient(v):
    assert potential(SE, -v) == potential(SE, v)
    assert gradient(SE, -v) == -gradient(SE, v)


@given(finite, finite, st.floats(0, 1))
def test_shifted_entropy_convex(a, b, t):
    mid = potential(SE, t * a + (1 - t) * b)
    assert mid <= t * potential(SE, a) + (1 - t) * potential(SE, b) + 1e-9 * (1 + abs(a) + abs(b)) ** 2


@given(st.floats(-30, 30))
def test_gradient_inverse_derivative(u):
    fd = central_difference(lambda w: gradient_inverse(SE, w), u, 1e-6)
    assert gradient_inverse_derivative(SE, u) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def _naive_distance(kind, a, b):
    return float(np.sum(potential(kind, a) - potential(kind, b) - gradient(kind, b) * (a - b)))


@pytest.mark.parametrize("kind", list(FunctionalKind))
def test_distance_matches_definition(kind, rng):
    for _ in range(50):
        a = rng.uniform(0.1, 3, 5) if kind is PE else rng.normal(0, 2, 5)
        b = rng.uniform(0.1, 3, 5) if kind is PE else rng.normal(0, 2, 5)
        assert bregman_distance(kind, a, b) == pytest.approx(_naive_distance(kind, a, b), rel=1e-9, abs=1e-12)


@given(st.lists(finite, min_size=1, max_size=6), st.lists(finite, min_size=1, max_size=6))
def test_shifted_distance_nonnegative_and_zero_on_diagonal(a, b):
    n = min(len(a), len(b))
    a, b = np.array(a[:n]), np.array(b[:n])
    assert bregman_distance(SE, a, b) >= 0.0
    assert bregman_distance(SE, a, a) == 0.0


def test_positive_distance_at_zero_boundary():
    # D(0, b) = b for the positive entropy
    assert bregman_distance(PE, np.array([0.0, 0.0]), np.array([2.0, 0.5])) == pytest.approx(2.5)


def test_euclidean_distance_is_squared_norm():
    assert bregman_distance(EU, np.array([1.0, 2.0]), np.array([0.0, 0.0])) == 5.0
