import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoptsense.errors import InvalidArgumentError, RankDeficiencyError
from eoptsense.recovery import LassoConfig, irls_lasso, lasso_objective, ml_covariance, ml_estimate


def soft_threshold(y, t):
    return np.sign(y) * np.maximum(np.abs(y) - t, 0.0)


def subgradient_reference(A, y, lam, iters=10_000):
    """Independent first-order oracle: subgradient descent, best iterate."""
    L = 2.0 * np.linalg.norm(A, 2) ** 2
    x = np.linalg.lstsq(A, y, rcond=None)[0] if A.shape[0] >= A.shape[1] else np.zeros(A.shape[1])
    best = lasso_objective(A, y, x, lam)
    for k in range(iters):
        g = -2.0 * A.T @ (y - A @ x) + lam * np.sign(x)
        x = x - g / (L * np.sqrt(k + 1.0))
        best = min(best, lasso_objective(A, y, x, lam))
    return best


def test_soft_threshold_identity():
    y = np.array([3.0, -2.5, 0.2, -0.1, 0.0, 1.6, 1.0001, -0.9999, 1.0])
    lam = 2.0
    res = irls_lasso(np.eye(y.size), y, cfg=LassoConfig(lam=lam))
    assert np.allclose(res.estimate, soft_threshold(y, lam / 2), atol=1e-4)
    assert res.converged


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_soft_threshold_property(vals):
    y = np.array(vals)
    res = irls_lasso(np.eye(len(y)), y, cfg=LassoConfig(lam=1.0))
    assert np.allclose(res.estimate, soft_threshold(y, 0.5), atol=1e-4)


def test_least_squares_limit(rng):
    A = rng.standard_normal((20, 5))
    x = np.array([1.0, 0.0, -2.0, 0.5, 0.0])
    res = irls_lasso(A, A @ x, cfg=LassoConfig(lam=1e-9))
    assert np.linalg.norm(res.estimate - x) <= 1e-3 * np.linalg.norm(x)


def test_matches_subgradient_reference():
    r = np.random.default_rng(7)
    A = r.standard_normal((20, 8))
    x = np.zeros(8)
    x[[1, 4, 6]] = [1.0, -0.7, 1.5]
    y = A @ x + 0.05 * r.standard_normal(20)
    res = irls_lasso(A, y, cfg=LassoConfig(lam=0.01))
    ref = subgradient_reference(A, y, 0.01)
    assert res.final_objective <= ref * 1.01


def test_history_monotone_and_final_objective(rng):
    for _ in range(20):
        A = rng.standard_normal((12, 9))
        y = rng.standard_normal(12)
        res = irls_lasso(A, y, range(0, 12, 2))
        h = np.array(res.history)
        assert np.all(np.diff(h) <= 1e-12 * h[1:])
        sel = list(range(0, 12, 2))
        f = lasso_objective(A[sel], y[sel], res.estimate, res.lam)
        assert res.final_objective == pytest.approx(f, rel=1e-9)
        assert res.iterations <= 100
        assert np.all(np.isfinite(res.estimate))


def test_default_lambda_scales_with_data(rng):
    A = rng.standard_normal((6, 4))
    y = rng.standard_normal(6)
    assert irls_lasso(A, y).lam == pytest.approx(0.01 * np.max(np.abs(A.T @ y)))
    assert irls_lasso(A, y, cfg=LassoConfig(lam_scale=0.2)).lam == pytest.approx(0.2 * np.max(np.abs(A.T @ y)))


@given(st.integers(0, 10_000))
def test_unselected_rows_do_not_matter(seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((10, 6))
    y = r.standard_normal(10)
    sel = [1, 3, 4, 8]
    base = irls_lasso(A, y, sel).estimate
    others = [i for i in range(10) if i not in sel]
    perm = np.arange(10)
    perm[others] = r.permutation(others)
    A2, y2 = A[perm], y[perm]
    assert np.array_equal(irls_lasso(A2, y2, sel).estimate, base)


@given(st.integers(0, 10_000), st.floats(0.01, 5.0), st.floats(1.1, 10.0))
def test_l1_norm_shrinks_with_lambda(seed, lam, factor):
    r = np.random.default_rng(seed)
    A = r.standard_normal((8, 5))
    y = r.standard_normal(8)
    small = irls_lasso(A, y, cfg=LassoConfig(lam=lam)).estimate
    big = irls_lasso(A, y, cfg=LassoConfig(lam=lam * factor)).estimate
    assert np.abs(big).sum() <= np.abs(small).sum() + 1e-6


def test_invalid_inputs():
    with pytest.raises(InvalidArgumentError):
        irls_lasso(np.eye(3), np.ones(3), [])
    with pytest.raises(InvalidArgumentError):
        irls_lasso(np.eye(3), np.ones(2))
    with pytest.raises(InvalidArgumentError):
        irls_lasso(np.eye(3), np.array([1.0, np.nan, 0.0]))
    with pytest.raises(InvalidArgumentError):
        LassoConfig(lam=-1.0)
    with pytest.raises(InvalidArgumentError):
        LassoConfig(max_iterations=0)


# -- maximum likelihood ----------------------------------------------------------------------

def test_ml_orthonormal(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((7, 3)))
    y = rng.standard_normal(7)
    assert np.allclose(ml_estimate(Q, y), Q.T @ y)


def test_ml_noiseless(rng):
    A = rng.standard_normal((9, 4))
    x = rng.standard_normal(4)
    assert np.allclose(ml_estimate(A, A @ x), x, atol=1e-9)


def test_ml_rank_deficient():
    with pytest.raises(RankDeficiencyError):
        ml_estimate(np.ones((4, 2)), np.ones(4))
    with pytest.raises(RankDeficiencyError):
        ml_covariance(np.eye(3)[:2], 1.0)


def test_ml_covariance_monte_carlo():
    r = np.random.default_rng(2)
    A = r.standard_normal((30, 5))
    sigma = 0.3
    x = r.standard_normal(5)
    Y = (A @ x)[:, None] + sigma * r.standard_normal((30, 10_000))
    est = np.linalg.solve(A.T @ A, A.T @ Y)
    emp = np.cov(est - x[:, None])
    theory = ml_covariance(A, sigma**2)
    assert np.max(np.abs(emp - theory)) <= 0.1 * np.max(np.abs(theory))
    assert np.allclose(ml_estimate(A, Y[:, 0]), est[:, 0])
