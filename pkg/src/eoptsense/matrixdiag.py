"""Exact spectral and compressive-sensing diagnostics at desk scale.

Everything that enumerates subsets goes through :func:`check_cap`, which
refuses more than ``ENUMERATION_CAP`` subsets. Subsets are enumerated in
lexicographic order (``itertools.combinations``) and evaluated in batches.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvalidArgumentError

ENUMERATION_CAP = 2_000_000
RANK_RTOL = 1e-10
_BATCH = 4096


def check_cap(count, cap=ENUMERATION_CAP):
    if count > cap:
        raise CapacityError(count, cap)


def iter_subset_batches(n, k, batch=_BATCH):
    """Yield int arrays of shape (b, k) covering all k-subsets of range(n)."""
    it = itertools.combinations(range(n), k)
    while True:
        chunk = list(itertools.islice(it, batch))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp).reshape(len(chunk), k)


def all_subsets(n, k):
    check_cap(math.comb(n, k))
    return np.concatenate(list(iter_subset_batches(n, k)) or [np.empty((0, k), np.intp)])


@dataclass(frozen=True)
class RipReport:
    order: int
    delta_lower: float
    delta_upper: float
    argmin_subset: tuple[int, ...]


@dataclass(frozen=True)
class SubsetSpectrum:
    subset: tuple[int, ...]
    min_eig: float
    volume: float


def _as_index(T):
    T = np.asarray(list(T), dtype=np.intp)
    return T


def row_gram_min_eig(A, T) -> float:
    """Smallest eigenvalue of the Gram of rows ``T``.

    Uses the |T|x|T| row Gram while |T| <= N and the NxN accumulated Gram
    ``sum a_m a_m^T`` once |T| > N. Both equal sigma_min(A_T)^2 in their regime.
    """
    A = np.asarray(A, dtype=float)
    T = _as_index(T)
    if T.size == 0:
        raise InvalidArgumentError("row subset must be nonempty")
    rows = A[T]
    G = rows @ rows.T if T.size <= A.shape[1] else rows.T @ rows
    return max(float(np.linalg.eigvalsh(G)[0]), 0.0)


def batch_row_min_eig(A, subsets) -> np.ndarray:
    """Vectorized :func:`row_gram_min_eig` for an (b, k) array of row subsets."""
    A = np.asarray(A, dtype=float)
    subsets = np.asarray(subsets, dtype=np.intp)
    rows = A[subsets]  # (b, k, N)
    if subsets.shape[1] <= A.shape[1]:
        G = rows @ rows.transpose(0, 2, 1)
    else:
        G = rows.transpose(0, 2, 1) @ rows
    return np.maximum(np.linalg.eigvalsh(G)[:, 0], 0.0)


GRAM_RTOL = 1e-12


def batch_row_gram_eigs(A, subsets, clean=True) -> np.ndarray:
    """Ascending eigenvalues of each |T|x|T| row Gram, shape (b, k).

    With ``clean``, eigenvalues below ``GRAM_RTOL * lambda_max`` are set to
    zero so exactly dependent rows give exactly zero weight.
    """
    A = np.asarray(A, dtype=float)
    rows = A[np.asarray(subsets, dtype=np.intp)]
    ev = np.maximum(np.linalg.eigvalsh(rows @ rows.transpose(0, 2, 1)), 0.0)
    if clean:
        ev = np.where(ev > GRAM_RTOL * ev[:, -1:], ev, 0.0)
    return ev


def batch_row_volume(A, subsets) -> np.ndarray:
    """det(A_T A_T^T) for every subset row of ``subsets``."""
    return np.prod(batch_row_gram_eigs(A, subsets), axis=1)


def subset_spectrum(A, T) -> SubsetSpectrum:
    A = np.asarray(A, dtype=float)
    T = _as_index(T)
    rows = A[T]
    vol = max(float(np.linalg.det(rows @ rows.T)), 0.0) if T.size <= A.shape[1] else 0.0
    return SubsetSpectrum(tuple(int(t) for t in T), row_gram_min_eig(A, T), vol)


def row_space_basis(rows, rtol=RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (N, r) for the span of ``rows``."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        return np.zeros((rows.shape[1], 0))
    _, s, Vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((rows.shape[1], 0))
    r = int(np.sum(s > rtol * s[0]))
    return Vt[:r].T


def projection_residual(A, T) -> float:
    """||A - pi_T(A)||_F^2 with every row projected onto span of rows ``T``."""
    A = np.asarray(A, dtype=float)
    T = _as_index(T)
    if T.size == 0:
        return float(np.sum(A**2))
    Q = row_space_basis(A[T])
    R = A - (A @ Q) @ Q.T
    return float(np.sum(R**2))


def best_rank_k_error(A, K) -> float:
    A = np.asarray(A, dtype=float)
    if not 0 <= K <= min(A.shape):
        raise InvalidArgumentError("K must lie in [0, min(M, N)]")
    s = np.linalg.svd(A, compute_uv=False)
    return float(np.sum(s[K:] ** 2))


def rip_constants(Phi, S) -> RipReport:
    """Exact asymmetric RIP constants of order ``S`` by column enumeration.

    Computed on ``Phi`` as given; normalize columns beforehand if wanted.
    """
    Phi = np.asarray(Phi, dtype=float)
    n = Phi.shape[1]
    if not 1 <= S <= n:
        raise InvalidArgumentError("order must lie in [1, number of columns]")
    check_cap(math.comb(n, S))
    PT = Phi.T
    lo, hi, arg = np.inf, -np.inf, None
    for batch in iter_subset_batches(n, S):
        cols = PT[batch]  # (b, S, M)
        ev = np.linalg.eigvalsh(cols @ cols.transpose(0, 2, 1))
        i = int(np.argmin(ev[:, 0]))
        if ev[i, 0] < lo:
            lo, arg = float(ev[i, 0]), tuple(int(j) for j in batch[i])
        hi = max(hi, float(ev[:, -1].max()))
    return RipReport(S, float(np.clip(1.0 - lo, 0.0, 1.0)), max(hi - 1.0, 0.0), arg)


def lower_rip_chain(A) -> list[float]:
    """[delta_1^L, ..., delta_N^L] of ``A``."""
    n = np.asarray(A).shape[1]
    return [rip_constants(A, s).delta_lower for s in range(1, n + 1)]


def _batch_col_rank(A, subsets, rtol=RANK_RTOL):
    cols = np.asarray(A, dtype=float).T[subsets]  # (b, k, M)
    s = np.linalg.svd(cols, compute_uv=False)
    top = s[:, :1]
    return np.sum((s > rtol * top) & (top > 0), axis=1)


def spark(A) -> int:
    """Smallest number of linearly dependent columns; N + 1 if none exist."""
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    kmax = min(rank + 1, n)
    check_cap(sum(math.comb(n, k) for k in range(1, kmax + 1)))
    for k in range(1, kmax + 1):
        for batch in iter_subset_batches(n, k):
            if np.any(_batch_col_rank(A, batch) < k):
                return k
    return n + 1


def mean_min_eig(A, K) -> float:
    """Mean of sigma_min^2(A_S) over all K-subsets S of columns.

    ``1 - mean_min_eig(A, K)`` is the mean lower RIP constant.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if not 1 <= K <= n:
        raise InvalidArgumentError("K must lie in [1, number of columns]")
    total = math.comb(n, K)
    check_cap(total)
    AT = A.T
    acc = 0.0
    for batch in iter_subset_batches(n, K):
        cols = AT[batch]
        acc += float(np.maximum(np.linalg.eigvalsh(cols @ cols.transpose(0, 2, 1))[:, 0], 0.0).sum())
    return acc / total
