import itertools
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eoptsense import matrixdiag as md
from eoptsense.errors import CapacityError, DegenerateDistributionError, InvalidArgumentError
from eoptsense.selection import (SubsetDistribution, eoptimal_bound_diagnostic, eoptimal_distribution,
                                 expected_projection_error, greedy_doptimal, greedy_eoptimal,
                                 logdet_objective, oracle_best_subset, random_selection,
                                 volume_distribution, volume_sampling_bound)

THREE = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0]])


def sigma_min_sq(A, T):
    """Oracle: squared smallest singular value, via SVD of the chosen rows."""
    rows = A[list(T)]
    s = np.linalg.svd(rows, compute_uv=False)
    return s[-1] ** 2 if len(T) <= A.shape[1] else s[A.shape[1] - 1] ** 2


# -- greedy ----------------------------------------------------------------------------

def test_greedy_eopt_forced_choice():
    res = greedy_eoptimal(THREE, 2, init=0)
    assert res.selected == (0, 1)
    assert res.objective_trace == pytest.approx((1.0, 1.0))
    assert res.method == "e-optimal-greedy"


@pytest.mark.parametrize("init", [0, 1, 2])
def test_greedy_k_equals_m(init):
    assert sorted(greedy_eoptimal(THREE, 3, init=init).selected) == [0, 1, 2]
    assert greedy_eoptimal(THREE, 3, init=init).selected[0] == init


def test_greedy_rejects_bad_k():
    with pytest.raises(InvalidArgumentError):
        greedy_eoptimal(THREE, 4)
    with pytest.raises(InvalidArgumentError):
        greedy_eoptimal(THREE, 0)


def test_greedy_trace_matches_svd(rng):
    A = rng.standard_normal((12, 4))
    res = greedy_eoptimal(A, 8, init=3)
    for k in range(8):
        assert res.objective_trace[k] == pytest.approx(sigma_min_sq(A, res.selected[: k + 1]), rel=1e-9, abs=1e-12)
    tail = res.objective_trace[4:]
    assert all(b >= a - 1e-12 for a, b in zip(tail, tail[1:]))


def test_greedy_each_step_is_argmax(rng):
    A = rng.standard_normal((9, 4))
    res = greedy_eoptimal(A, 6, init=2)
    for k in range(1, 6):
        prefix = list(res.selected[:k])
        scores = {m: sigma_min_sq(A, prefix + [m]) for m in range(9) if m not in prefix}
        best = max(scores.values())
        assert scores[res.selected[k]] == pytest.approx(best, rel=1e-9)


def test_greedy_seeded_init_reproducible(rng):
    A = rng.standard_normal((15, 5))
    a, b = greedy_eoptimal(A, 5, seed=11), greedy_eoptimal(A, 5, seed=11)
    assert a == b
    firsts = {greedy_eoptimal(A, 1, seed=s).selected[0] for s in range(60)}
    assert len(firsts) > 5


def test_greedy_beats_median_completion():
    # 50 random 10x6 matrices, init fixed at 0, K = 3
    wins = 0
    for i in range(50):
        A = np.random.default_rng(1000 + i).standard_normal((10, 6))
        g = greedy_eoptimal(A, 3, init=0).objective_trace[-1]
        completions = [sigma_min_sq(A, (0, a, b)) for a, b in itertools.combinations(range(1, 10), 2)]
        assert len(completions) == 36
        wins += g >= np.median(completions)
        assert g <= max(completions) + 1e-12
    assert wins >= 45


def test_greedy_doptimal_forced_choice():
    assert greedy_doptimal(THREE, 2, init=0).selected == (0, 1)


def test_equal_volume_separated_only_by_eopt():
    D = np.diag([2.0, 0.5])
    I = np.eye(2)
    assert logdet_objective(D, [0, 1]) == pytest.approx(logdet_objective(I, [0, 1]), abs=1e-10)
    assert sigma_min_sq(I, [0, 1]) > sigma_min_sq(D, [0, 1])
    # stacked: E-optimal greedy from the identity row picks the other identity row
    stacked = np.vstack([I, D])
    assert greedy_eoptimal(stacked, 2, init=0).selected == (0, 1)


def test_doptimal_each_step_beats_rejected(rng):
    A = rng.standard_normal((10, 4))
    res = greedy_doptimal(A, 4, init=0)
    for k in range(1, 4):
        prefix = list(res.selected[:k])
        # det(eps I_N + B^T B) = eps^(N-k) det(eps I_k + B B^T)
        ref = {m: np.linalg.slogdet(A[prefix + [m]] @ A[prefix + [m]].T + 1e-12 * np.eye(k + 1))[1]
               + (4 - k - 1) * np.log(1e-12) for m in range(10) if m not in prefix}
        assert res.objective_trace[k] == pytest.approx(ref[res.selected[k]], abs=1e-8)
        assert res.objective_trace[k] >= max(ref.values()) - 1e-8
    assert all(b >= a for a, b in zip(res.objective_trace, res.objective_trace[1:]))


@given(st.integers(0, 10_000), st.floats(0.01, 100.0))
def test_argmax_scale_invariance(seed, c):
    A = np.random.default_rng(seed).standard_normal((7, 3))
    assert greedy_eoptimal(A, 4, init=1).selected == greedy_eoptimal(c * A, 4, init=1).selected
    assert greedy_doptimal(A, 3, init=1).selected == greedy_doptimal(c * A, 3, init=1).selected
    assert oracle_best_subset(A, 3).selected == oracle_best_subset(c * A, 3).selected


@given(st.integers(0, 10_000), st.integers(1, 9))
def test_methods_distinct_and_reproducible(seed, K):
    A = np.random.default_rng(seed).standard_normal((9, 4))
    for fn in (lambda: greedy_eoptimal(A, K, seed=seed), lambda: greedy_doptimal(A, K, seed=seed),
               lambda: random_selection(9, K, seed), lambda: oracle_best_subset(A, min(K, 5))):
        r1, r2 = fn(), fn()
        assert r1 == r2
        assert len(set(r1.selected)) == len(r1.selected)


def test_greedy_runtime_linear_in_m():
    N, K = 36, 10
    base = np.random.default_rng(0).standard_normal((800, N))

    def best_time(M):
        greedy_eoptimal(base[:M], K, init=0)
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            greedy_eoptimal(base[:M], K, init=0)
            times.append(time.perf_counter() - t0)
        return min(times)

    assert best_time(800) / best_time(400) <= 3.0


# -- random -------------------------------------------------------------------------------

def test_random_full():
    assert random_selection(6, 6, seed=3).selected == tuple(range(6))


def test_random_same_seed():
    assert random_selection(50, 7, 9) == random_selection(50, 7, 9)


def test_random_uniform_frequency():
    counts = {}
    for s in range(100_000):
        T = random_selection(5, 2, s).selected
        counts[T] = counts.get(T, 0) + 1
    assert len(counts) == 10
    for c in counts.values():
        assert abs(c / 100_000 - 0.1) <= 0.01


def test_random_trace_only_with_matrix():
    assert random_selection(5, 2, 0).objective_trace == ()
    A = np.eye(5)
    assert random_selection(5, 2, 0, A).objective_trace == pytest.approx((1.0, 1.0))


# -- oracle ----------------------------------------------------------------------------------

@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_oracle_identity_lexicographic(K):
    assert oracle_best_subset(np.eye(4), K).selected == tuple(range(K))


def test_oracle_hand_enumeration():
    # {0,1} and {1,2} both give 1, {0,2} is collinear; tie goes to {0,1}
    assert oracle_best_subset(THREE, 2).selected == (0, 1)
    # log-det: det {0,1} = 1, det {1,2} = 4, {0,2} singular
    assert oracle_best_subset(THREE, 2, "log-det").selected == (1, 2)


def test_oracle_dominates_greedy_for_every_init(rng):
    A = rng.standard_normal((8, 5))
    best = oracle_best_subset(A, 3).objective_trace[-1]
    for init in range(8):
        assert greedy_eoptimal(A, 3, init=init).objective_trace[-1] <= best + 1e-12


def test_oracle_unknown_objective():
    with pytest.raises(InvalidArgumentError):
        oracle_best_subset(THREE, 2, "trace")


def test_oracle_cap():
    with pytest.raises(CapacityError):
        oracle_best_subset(np.ones((60, 2)), 10)


# -- distributions -------------------------------------------------------------------------

def test_volume_identity():
    d = volume_distribution(np.eye(2), 1)
    assert d.probabilities.tolist() == pytest.approx([0.5, 0.5])


def test_volume_hand_determinants():
    A = np.array([[2.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    d = volume_distribution(A, 2)
    assert [tuple(s) for s in d.subsets] == [(0, 1), (0, 2), (1, 2)]
    assert d.probabilities[0] == 0.0
    assert d.probabilities.tolist() == pytest.approx([0.0, 0.8, 0.2], abs=1e-15)


def test_eopt_hand_spectra():
    A = np.array([[2.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    d = eoptimal_distribution(A, 2)
    assert d.probabilities[0] == 0.0
    assert d.probabilities.tolist() == pytest.approx([0.0, 0.5, 0.5], abs=1e-15)


@pytest.mark.parametrize("K", [1, 2, 3])
def test_eopt_identity_uniform(K):
    d = eoptimal_distribution(np.eye(5), K)
    assert np.allclose(d.probabilities, 1.0 / len(d.subsets))


@given(st.integers(0, 10_000), st.integers(1, 7))
def test_distributions_normalized(seed, K):
    A = np.random.default_rng(seed).standard_normal((7, 4))
    for d in (volume_distribution(A, K) if K <= 4 else None, eoptimal_distribution(A, K)):
        if d is not None:
            assert abs(d.probabilities.sum() - 1.0) <= 1e-12
            assert np.all(d.probabilities >= 0)


def test_volume_weights_proportional_to_det(rng):
    A = rng.standard_normal((6, 3))
    d = volume_distribution(A, 2)
    dets = np.array([np.linalg.det(A[list(T)] @ A[list(T)].T) for T in d.subsets])
    assert np.allclose(d.probabilities, dets / dets.sum(), rtol=1e-9)


def test_degenerate_distribution():
    with pytest.raises(DegenerateDistributionError):
        volume_distribution(np.zeros((3, 2)), 1)


def test_sampling_reproducible(rng):
    d = eoptimal_distribution(rng.standard_normal((6, 3)), 2)
    assert d.sample(5, 20) == d.sample(5, 20)
    assert d.sample(5) == d.sample(5, 1)[0]


def test_sampling_frequencies(rng):
    d = volume_distribution(rng.standard_normal((5, 2)), 2)
    draws = d.sample(1, 50_000)
    for T, p in zip(d.subsets, d.probabilities):
        freq = sum(1 for s in draws if s == tuple(T)) / 50_000
        assert abs(freq - p) < 0.01


def test_expected_error_point_mass(rng):
    A = rng.standard_normal((6, 4))
    d = SubsetDistribution.point_mass(6, (1, 4))
    assert expected_projection_error(A, d) == pytest.approx(md.projection_residual(A, (1, 4)))


def test_expected_error_zero_at_full_rank(rng):
    A = rng.standard_normal((6, 3))
    assert expected_projection_error(A, volume_distribution(A, 3)) == pytest.approx(0.0, abs=1e-9)


def test_volume_bound_random_instances():
    for i in range(100):
        A = np.random.default_rng(i).standard_normal((8, 5))
        for K in (1, 2, 3, 4):
            lhs, rhs = volume_sampling_bound(A, K)
            assert lhs <= rhs + 1e-9


@given(st.integers(0, 10_000), st.integers(1, 3))
def test_volume_bound_property(seed, K):
    A = np.random.default_rng(seed).standard_normal((6, 3)) * np.array([5.0, 1.0, 0.1])
    lhs, rhs = volume_sampling_bound(A, K)
    assert lhs <= rhs + 1e-9 * max(1.0, rhs)


def test_eopt_bound_diagnostic_reports_both_sides(rng):
    A = rng.standard_normal((7, 4))
    diag = eoptimal_bound_diagnostic(A, 2)
    assert diag.expected_residual > 0
    assert diag.rhs_without_c > 0
    assert diag.implied_c_max == pytest.approx(diag.rhs_without_c / diag.expected_residual)
