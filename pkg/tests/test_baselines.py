import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic_cs.baselines import (
    InfeasibleAtKError,
    RankDeficientError,
    estimated_support,
    evaluate,
    l0_oracle,
    pseudo_inverse_solve,
)
from entropic_cs.signals import SparseSignalSpec, make_gaussian_ensemble, make_random_sparse


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_pseudo_inverse_matches_numpy(seed, m):
    rng = np.random.default_rng(seed)
    theta = rng.normal(size=(m, 16))
    y = rng.normal(size=m)
    np.testing.assert_allclose(pseudo_inverse_solve(theta, y), np.linalg.pinv(theta) @ y, atol=1e-9)


def test_pseudo_inverse_is_minimum_norm_solution():
    rng = np.random.default_rng(1)
    theta = rng.normal(size=(5, 12))
    y = rng.normal(size=5)
    s = pseudo_inverse_solve(theta, y)
    np.testing.assert_allclose(theta @ s, y, atol=1e-12)
    null = np.linalg.svd(theta)[2][5:]
    for v in null:
        assert np.linalg.norm(s + 0.1 * v) > np.linalg.norm(s)


def test_pseudo_inverse_square_case_and_errors():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(pseudo_inverse_solve(a, [3.0, 4.0]), [1.0, 1.0])
    with pytest.raises(RankDeficientError):
        pseudo_inverse_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 2.0])
    with pytest.raises(ValueError):
        pseudo_inverse_solve(np.ones((3, 2)), np.ones(3))


def test_l0_oracle_recovers_planted_support():
    e = make_gaussian_ensemble(12, 8, 0)
    s = np.zeros(12)
    s[[2, 9]] = [1.5, -1.2]
    got = l0_oracle(e, e.theta @ s)
    np.testing.assert_allclose(got, s, atol=1e-10)


def test_l0_oracle_zero_and_infeasible():
    e = make_gaussian_ensemble(10, 4, 2)
    np.testing.assert_array_equal(l0_oracle(e, np.zeros(4)), np.zeros(10))
    with pytest.raises(InfeasibleAtKError):
        # a dense signal is not reproducible from 1 column when k_max = 1
        l0_oracle(e, e.theta @ np.ones(10), k_max=1)
    with pytest.raises(ValueError):
        l0_oracle(np.ones((3, 20)), np.ones(3))


def test_l0_oracle_is_row_scaling_invariant():
    e = make_gaussian_ensemble(12, 8, 4)
    s = make_random_sparse(SparseSignalSpec(12, 2, seed=4))
    d = np.diag(np.linspace(0.5, 3.0, 8))
    np.testing.assert_allclose(l0_oracle(d @ e.theta, d @ (e.theta @ s)), l0_oracle(e, e.theta @ s),
                               atol=1e-10)


def test_l0_oracle_permutation_symmetry():
    e = make_gaussian_ensemble(12, 8, 6)
    s = make_random_sparse(SparseSignalSpec(12, 2, seed=6))
    perm = np.random.default_rng(0).permutation(12)
    got = l0_oracle(e.theta[:, perm], e.theta @ s)
    np.testing.assert_allclose(got, s[perm], atol=1e-10)


def test_evaluate_exact_recovery():
    e = make_gaussian_ensemble(16, 6, 0)
    s = np.zeros(16)
    s[[1, 5]] = [1.0, -2.0]
    rep = evaluate(s, s, e, e.theta @ s)
    assert rep.rel_l2_error == 0.0
    assert rep.support_precision == rep.support_recall == 1.0
    assert rep.residual_inf == 0.0


def test_evaluate_partial_support():
    theta = np.eye(4)
    s_star = np.array([1.0, 1.0, 0.0, 0.0])
    s_hat = np.array([1.0, 0.0, 0.5, 0.0])
    rep = evaluate(s_hat, s_star, theta, theta @ s_star)
    assert rep.support_precision == 0.5 and rep.support_recall == 0.5
    assert rep.rel_l2_error == pytest.approx(np.sqrt(1.25 / 2))
    assert rep.residual_inf == 1.0


def test_evaluate_empty_estimate_and_zero_truth():
    theta = np.eye(3)
    rep = evaluate(np.zeros(3), np.array([0.0, 1.0, 0.0]), theta, [0.0, 1.0, 0.0])
    assert rep.support_precision == 1.0 and rep.support_recall == 0.0
    rep = evaluate(np.array([0.0, 0.5, 0.0]), np.zeros(3), theta, np.zeros(3))
    assert not rep.relative and rep.rel_l2_error == 0.5
    with pytest.raises(ValueError):
        evaluate(np.zeros(3), np.zeros(4), theta, np.zeros(3))


def test_estimated_support_threshold_is_relative():
    s = np.array([1000.0, 0.9, 1.1, 0.0])
    np.testing.assert_array_equal(estimated_support(s, 1e-3), [True, False, True, False])
    np.testing.assert_array_equal(estimated_support(s / 1000, 1e-3), [True, False, True, False])
