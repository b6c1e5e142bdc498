"""Measurement-independent sensor selection.

Greedy E-optimal and D-optimal selection, a uniform random baseline, the
exhaustive oracle, and exact E-optimal / volume sampling distributions over
all K-subsets of rows.

Ties are broken by lowest sensor index (greedy) or lexicographically smallest
subset (oracle). Candidate scores are gathered as an array and reduced with
``np.argmax``, which returns the first maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matrixdiag as md
from .errors import DegenerateDistributionError, InvalidArgumentError

DOPT_EPS = 1e-12

METHODS = ("e-optimal-greedy", "d-optimal-greedy", "random", "oracle",
           "volume-sample", "eopt-sample")


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    objective_trace: tuple[float, ...]
    method: str
    seed: int | None = None

    @property
    def K(self) -> int:
        return len(self.selected)

    def prefix(self, k) -> "SelectionResult":
        """First ``k`` greedy picks; equal to a fresh greedy run with K = k."""
        return SelectionResult(self.selected[:k], self.objective_trace[:k], self.method, self.seed)


def _check_k(M, K):
    if not 1 <= K <= M:
        raise InvalidArgumentError(f"K must lie in [1, {M}], got {K}")


# -- objectives ---------------------------------------------------------------

def candidate_min_eig(A, selected, candidates) -> np.ndarray:
    """row_gram_min_eig(A, selected + [m]) for every m in ``candidates``."""
    A = np.asarray(A, dtype=float)
    candidates = np.asarray(candidates, dtype=np.intp)
    k = len(selected) + 1
    if k <= A.shape[1]:
        subsets = np.empty((candidates.size, k), dtype=np.intp)
        subsets[:, :-1] = np.asarray(selected, dtype=np.intp)
        subsets[:, -1] = candidates
        return md.batch_row_min_eig(A, subsets)
    rows = A[list(selected)]
    G = rows.T @ rows
    cand = A[candidates]
    Gc = G[None, :, :] + cand[:, :, None] * cand[:, None, :]
    return np.maximum(np.linalg.eigvalsh(Gc)[:, 0], 0.0)


def logdet_objective(A, T, eps=DOPT_EPS) -> float:
    """log det(sum_{m in T} a_m a_m^T + eps I_N)."""
    return float(_batch_logdet(np.asarray(A, dtype=float), np.asarray([list(T)], dtype=np.intp), eps)[0])


def _batch_logdet(A, subsets, eps=DOPT_EPS):
    # Nonzero spectrum of the NxN Gram equals that of the smaller kxk Gram;
    # the remaining N - k eigenvalues are exactly eps.
    n = A.shape[1]
    k = subsets.shape[1]
    rows = A[subsets]
    if k <= n:
        G = rows @ rows.transpose(0, 2, 1)
        ev = np.maximum(np.linalg.eigvalsh(G), 0.0)
        return np.log(ev + eps).sum(axis=1) + (n - k) * math.log(eps)
    G = rows.transpose(0, 2, 1) @ rows
    ev = np.maximum(np.linalg.eigvalsh(G), 0.0)
    return np.log(ev + eps).sum(axis=1)


def candidate_logdet(A, selected, candidates, eps=DOPT_EPS) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=np.intp)
    subsets = np.empty((candidates.size, len(selected) + 1), dtype=np.intp)
    subsets[:, :-1] = np.asarray(selected, dtype=np.intp)
    subsets[:, -1] = candidates
    return _batch_logdet(np.asarray(A, dtype=float), subsets, eps)


OBJECTIVES = {
    "min-eig": (md.batch_row_min_eig, candidate_min_eig),
    "log-det": (_batch_logdet, candidate_logdet),
}


# -- greedy ---------------------------------------------------------------------

def _initial_sensor(M, init, seed):
    if init is not None:
        if not 0 <= init < M:
            raise InvalidArgumentError(f"init sensor {init} out of range")
        return int(init)
    return int(np.random.default_rng(seed).integers(M))


def greedy_select(A, K, score_fn, first, bonus=None):
    """Generic forward greedy: ``first`` then K - 1 argmax steps.

    ``score_fn(A, selected, candidates)`` returns base scores; ``bonus`` is an
    optional per-sensor additive term. Returns (selected, objective_trace)
    where the trace holds the base objective of each prefix.
    """
    A = np.asarray(A, dtype=float)
    M = A.shape[0]
    selected = []
    trace = []
    available = np.ones(M, dtype=bool)
    if first is not None:
        selected.append(first)
        available[first] = False
        trace.append(float(score_fn(A, [], [first])[0]))
    while len(selected) < K:
        cand = np.flatnonzero(available)
        base = score_fn(A, selected, cand)
        score = base if bonus is None else base + bonus[cand]
        j = int(np.argmax(score))
        selected.append(int(cand[j]))
        available[cand[j]] = False
        trace.append(float(base[j]))
    return tuple(selected), tuple(trace)


def greedy_eoptimal(A, K, init=None, seed=0) -> SelectionResult:
    """Greedy E-optimal selection: grow the set maximizing sigma_min^2 of the chosen rows.

    The first sensor is ``init`` if given, otherwise drawn uniformly from
    ``seed``.
    """
    A = np.asarray(A, dtype=float)
    _check_k(A.shape[0], K)
    first = _initial_sensor(A.shape[0], init, seed)
    sel, trace = greedy_select(A, K, candidate_min_eig, first)
    return SelectionResult(sel, trace, "e-optimal-greedy", seed)


def greedy_doptimal(A, K, init=None, seed=0, eps=DOPT_EPS) -> SelectionResult:
    A = np.asarray(A, dtype=float)
    _check_k(A.shape[0], K)
    first = _initial_sensor(A.shape[0], init, seed)
    sel, trace = greedy_select(A, K, lambda A_, s, c: candidate_logdet(A_, s, c, eps), first)
    return SelectionResult(sel, trace, "d-optimal-greedy", seed)


def random_selection(M, K, seed, A=None) -> SelectionResult:
    """Uniform K-subset, returned in ascending index order.

    The objective trace (min-eig of each prefix) is only filled when ``A`` is
    supplied.
    """
    _check_k(M, K)
    sel = tuple(int(i) for i in np.sort(np.random.default_rng(seed).choice(M, size=K, replace=False)))
    trace = ()
    if A is not None:
        trace = tuple(md.row_gram_min_eig(A, sel[: k + 1]) for k in range(K))
    return SelectionResult(sel, trace, "random", seed)


# -- exhaustive -----------------------------------------------------------------

def subset_scores(A, K, objective="min-eig"):
    """(subsets, scores) over all K-subsets of rows in lexicographic order."""
    A = np.asarray(A, dtype=float)
    md.check_cap(math.comb(A.shape[0], K))
    batch_fn = OBJECTIVES[objective][0]
    subsets = md.all_subsets(A.shape[0], K)
    if subsets.shape[0] == 0:
        return subsets, np.empty(0)
    scores = np.concatenate([batch_fn(A, subsets[i:i + 8192]) for i in range(0, len(subsets), 8192)])
    return subsets, scores


def oracle_best_subset(A, K, objective="min-eig") -> SelectionResult:
    A = np.asarray(A, dtype=float)
    _check_k(A.shape[0], K)
    if objective not in OBJECTIVES:
        raise InvalidArgumentError(f"unknown objective {objective!r}; expected one of {sorted(OBJECTIVES)}")
    subsets, scores = subset_scores(A, K, objective)
    i = int(np.argmax(scores))
    best = tuple(int(j) for j in subsets[i])
    batch_fn = OBJECTIVES[objective][0]
    trace = tuple(float(batch_fn(A, np.asarray([best[: k + 1]]))[0]) for k in range(K))
    return SelectionResult(best, trace, "oracle", None)


# -- sampling distributions -----------------------------------------------------

@dataclass(frozen=True)
class SubsetDistribution:
    subsets: np.ndarray  # (C, K), lexicographic
    probabilities: np.ndarray
    method: str = ""

    def sample(self, seed, size=None):
        """Inverse-CDF draw(s) over the lexicographic subset list."""
        rng = np.random.default_rng(seed)
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        u = rng.random(size)
        idx = np.searchsorted(cdf, u, side="right")
        idx = np.minimum(idx, len(cdf) - 1)
        if size is None:
            return tuple(int(j) for j in self.subsets[int(idx)])
        return [tuple(int(j) for j in self.subsets[i]) for i in np.atleast_1d(idx)]

    def probability_of(self, T) -> float:
        T = tuple(sorted(int(t) for t in T))
        hit = np.all(self.subsets == np.asarray(T), axis=1)
        return float(self.probabilities[hit].sum())

    @classmethod
    def point_mass(cls, M, T) -> "SubsetDistribution":
        T = sorted(int(t) for t in T)
        subsets = md.all_subsets(M, len(T))
        p = np.all(subsets == np.asarray(T), axis=1).astype(float)
        return cls(subsets, p, "point-mass")


def _normalize(subsets, weights, method):
    total = float(weights.sum())
    if not total > 0:
        raise DegenerateDistributionError(f"all {method} weights are zero")
    return SubsetDistribution(subsets, weights / total, method)


def volume_distribution(A, K) -> SubsetDistribution:
    """Pr(T) proportional to det(A_T A_T^T)."""
    A = np.asarray(A, dtype=float)
    _check_k(A.shape[0], K)
    subsets = md.all_subsets(A.shape[0], K)
    return _normalize(subsets, md.batch_row_volume(A, subsets), "volume-sample")


def eoptimal_distribution(A, K) -> SubsetDistribution:
    """Pr(T) proportional to sigma_min^2(A_T)."""
    A = np.asarray(A, dtype=float)
    _check_k(A.shape[0], K)
    subsets = md.all_subsets(A.shape[0], K)
    if K > A.shape[1]:
        w = md.batch_row_min_eig(A, subsets)
    else:
        w = md.batch_row_gram_eigs(A, subsets)[:, 0]
    return _normalize(subsets, w, "eopt-sample")


def expected_projection_error(A, dist: SubsetDistribution) -> float:
    A = np.asarray(A, dtype=float)
    total = 0.0
    for T, p in zip(dist.subsets, dist.probabilities):
        if p > 0:
            total += p * md.projection_residual(A, T)
    return float(total)


def volume_sampling_bound(A, K) -> tuple[float, float]:
    """(E_volume residual, (K + 1) * ||A - A_K||_F^2)."""
    return (expected_projection_error(A, volume_distribution(A, K)),
            (K + 1) * md.best_rank_k_error(A, K))


@dataclass(frozen=True)
class EoptBoundDiagnostic:
    """Both sides of the E-optimal sampling bound with the row-dependency constant left out.

    ``rhs_without_c`` is (M-K)/(K+1) * mean_eig(K+1)/mean_eig(K) computed over
    row subsets. The bound holds for any constant ``C <= implied_c_max``.
    """

    K: int
    expected_residual: float
    rhs_without_c: float
    implied_c_max: float


def eoptimal_bound_diagnostic(A, K) -> EoptBoundDiagnostic:
    A = np.asarray(A, dtype=float)
    M = A.shape[0]
    lhs = expected_projection_error(A, eoptimal_distribution(A, K))
    ratio = md.mean_min_eig(A.T, K + 1) / md.mean_min_eig(A.T, K) if K + 1 <= M else 0.0
    rhs = (M - K) / (K + 1) * ratio
    implied = rhs / lhs if lhs > 0 else math.inf
    return EoptBoundDiagnostic(K, lhs, rhs, implied)
