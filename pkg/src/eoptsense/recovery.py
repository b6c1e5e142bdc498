"""Sparse power-vector recovery from a subset of sensors.

:func:`irls_lasso` minimizes ``||y_S - A_S x||^2 + lam * ||x||_1`` with
iteratively reweighted least squares: each step solves the ridge system

    (A_S^T A_S + (lam / 2) diag(1 / (|x_i| + eps))) x = A_S^T y_S

whose quadratic is a majorizer of the l1 term. A step is accepted only if it
does not raise the true objective; a rejected or stagnating step shrinks eps
by 10x down to ``epsilon_floor``. The recorded objective history is therefore
nonincreasing.

IRLS converges only linearly near the soft-threshold boundary, so the loop
ends with a sign-pattern solve: on the support of the final iterate the
stationarity equations ``A_a^T (y - A_a x_a) = (lam / 2) sign(x_a)`` are
linear. That point is kept when its signs agree and the objective does not
rise; ``converged`` then reports whether the KKT conditions hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, RankDeficiencyError

EPS_START = 1e-2
STAGNATION = 1e-3  # relative step below which eps is shrunk
SUPPORT_RTOL = 1e-6  # entries below this fraction of max|x| are treated as zero by the final solve
KKT_RTOL = 1e-9
DEFAULT_LAMBDA_SCALE = 0.01


@dataclass(frozen=True)
class LassoConfig:
    lam: float | None = None  # None -> lam_scale * ||A_S^T y_S||_inf
    lam_scale: float = DEFAULT_LAMBDA_SCALE
    max_iterations: int = 100
    epsilon_floor: float = 1e-8
    tolerance: float = 1e-8

    def __post_init__(self):
        if (self.lam is not None and not self.lam > 0) or not self.lam_scale > 0:
            raise InvalidArgumentError("lambda must be positive")
        if self.max_iterations < 1 or not self.epsilon_floor > 0 or not self.tolerance > 0:
            raise InvalidArgumentError("max_iterations, epsilon_floor and tolerance must be positive")


@dataclass(frozen=True)
class RecoveryResult:
    estimate: np.ndarray
    iterations: int
    converged: bool
    final_objective: float
    lam: float
    history: tuple[float, ...] = field(default=(), repr=False)
    support: tuple[int, ...] = ()


def lasso_objective(A, y, x, lam) -> float:
    r = np.asarray(y) - np.asarray(A) @ np.asarray(x)
    return float(r @ r + lam * np.abs(x).sum())


def default_lambda(A_S, y_S, scale=DEFAULT_LAMBDA_SCALE) -> float:
    lam = scale * float(np.max(np.abs(A_S.T @ y_S)))
    return lam if lam > 0 else scale


def _reweighted_solve(A, y, Aty, d_inv):
    # d_inv = 1 / D with D the diagonal penalty. For K <= N use the K x K
    # push-through form x = D^-1 A^T (I + A D^-1 A^T)^-1 y, which stays
    # well-conditioned when some weights are huge.
    K, N = A.shape
    if K <= N:
        AD = A * d_inv
        z = np.linalg.solve(np.eye(K) + AD @ A.T, y)
        return AD.T @ z
    return np.linalg.solve(A.T @ A + np.diag(1.0 / d_inv), Aty)


def irls_lasso(A, y, selection=None, cfg: LassoConfig | None = None) -> RecoveryResult:
    """Selection-restricted LASSO by IRLS.

    ``y`` holds one measurement per row of ``A``; only rows in ``selection``
    (all rows if None) enter the fit.
    """
    cfg = cfg or LassoConfig()
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape[0] != A.shape[0]:
        raise InvalidArgumentError("y must hold one entry per row of A")
    sel = np.arange(A.shape[0]) if selection is None else np.asarray(list(selection), dtype=np.intp)
    if sel.size == 0:
        raise InvalidArgumentError("selection must be nonempty")
    A_S, y_S = A[sel], y[sel]
    if not (np.all(np.isfinite(A_S)) and np.all(np.isfinite(y_S))):
        raise InvalidArgumentError("non-finite inputs")
    lam = cfg.lam if cfg.lam is not None else default_lambda(A_S, y_S, cfg.lam_scale)
    half = lam / 2.0
    Aty = A_S.T @ y_S

    x = np.zeros(A.shape[1])
    f = lasso_objective(A_S, y_S, x, lam)
    history = [f]
    eps = EPS_START
    converged = False
    it = 0
    while it < cfg.max_iterations:
        it += 1
        cand = _reweighted_solve(A_S, y_S, Aty, (np.abs(x) + eps) / half)
        f_cand = lasso_objective(A_S, y_S, cand, lam)
        if f_cand <= f:
            change = np.linalg.norm(cand - x) / max(np.linalg.norm(cand), np.finfo(float).tiny)
            x, f = cand, f_cand
            history.append(f)
            if eps > cfg.epsilon_floor and change < STAGNATION:
                eps = max(eps / 10.0, cfg.epsilon_floor)
            elif eps <= cfg.epsilon_floor and change < cfg.tolerance:
                converged = True
                break
        else:
            if eps <= cfg.epsilon_floor:
                converged = True  # no descent available at the finest smoothing
                break
            eps = max(eps / 10.0, cfg.epsilon_floor)
    polished = _sign_pattern_solve(A_S, y_S, x, half)
    if polished is not None:
        f_pol = lasso_objective(A_S, y_S, polished, lam)
        if f_pol <= f:
            x, f = polished, f_pol
            history.append(f)
            converged = converged or _kkt_holds(A_S, y_S, x, half)
    return RecoveryResult(x, it, converged, f, lam, tuple(history))


def _sign_pattern_solve(A, y, x, half):
    """LASSO stationary point restricted to the support and signs of ``x``.

    Entries whose sign flips in the solve are still on their way to zero;
    they are dropped and the system re-solved.
    """
    mag = np.abs(x)
    if mag.max(initial=0.0) == 0.0:
        return None
    act = np.flatnonzero(mag > SUPPORT_RTOL * mag.max())
    while act.size:
        Aa = A[:, act]
        G = Aa.T @ Aa
        if np.linalg.matrix_rank(G) < act.size:
            return None
        s = np.sign(x[act])
        xa = np.linalg.solve(G, Aa.T @ y - half * s)
        flipped = np.sign(xa) != s
        if not flipped.any():
            out = np.zeros_like(x)
            out[act] = xa
            return out
        act = act[~flipped]
    return np.zeros_like(x)


def _kkt_holds(A, y, x, half):
    g = A.T @ (y - A @ x)  # LASSO optimality: g_i = half * sign(x_i) on the support, |g_i| <= half off it
    nz = x != 0
    scale = half * (1.0 + KKT_RTOL) + KKT_RTOL * np.abs(g).max(initial=0.0)
    return bool(np.all(np.abs(g[~nz]) <= scale) and np.all(np.abs(g[nz] - half * np.sign(x[nz])) <= scale - half))


def ml_estimate(A, y) -> np.ndarray:
    """Least-squares estimate (A^T A)^-1 A^T y."""
    A = np.asarray(A, dtype=float)
    G = A.T @ A
    if A.shape[0] < A.shape[1] or np.linalg.matrix_rank(A) < A.shape[1]:
        raise RankDeficiencyError("A^T A is singular")
    return np.linalg.solve(G, A.T @ np.asarray(y, dtype=float))


def ml_covariance(A, noise_var) -> np.ndarray:
    """Error covariance noise_var * (A^T A)^-1 of :func:`ml_estimate`."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] < A.shape[1] or np.linalg.matrix_rank(A) < A.shape[1]:
        raise RankDeficiencyError("A^T A is singular")
    return noise_var * np.linalg.inv(A.T @ A)
