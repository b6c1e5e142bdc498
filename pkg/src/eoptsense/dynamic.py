"""Reliability tracking and dynamic (measurement-driven) sensor selection.

Sensor m's reliability at block t is

    r_m = exp(-forgetting * (t - t_m)) / (1 + |y_m - a_m^T x_prev|^2)

clamped to [R_FLOOR, 1], where t_m / y_m are the time and value of its last
report and x_prev is the previous block's estimate. Unreliability is 1 / r_m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgumentError
from .recovery import LassoConfig, irls_lasso
from .scenario import Scenario, measure
from .seeding import child_rng
from .selection import SelectionResult, _check_k, candidate_min_eig, greedy_eoptimal, greedy_select

R_FLOOR = 1e-6


@dataclass(frozen=True)
class ReliabilityState:
    r: np.ndarray
    u: np.ndarray
    t_last: np.ndarray
    y_last: np.ndarray
    forgetting: float

    @classmethod
    def initial(cls, y0, forgetting) -> "ReliabilityState":
        """Everyone observed at block 0 with measurements ``y0``."""
        y0 = np.array(y0, dtype=float)
        M = y0.shape[0]
        return cls(np.ones(M), np.ones(M), np.zeros(M, dtype=np.int64), y0, float(forgetting))

    def observe(self, sensors, t, values) -> "ReliabilityState":
        """Record fresh reports from ``sensors`` at block ``t``."""
        sensors = np.asarray(list(sensors), dtype=np.intp)
        t_last = self.t_last.copy()
        y_last = self.y_last.copy()
        t_last[sensors] = t
        y_last[sensors] = np.asarray(values, dtype=float)[sensors]
        return replace(self, t_last=t_last, y_last=y_last)


def predict_measurement(A, m, x_prev) -> float:
    return float(np.asarray(A)[m] @ np.asarray(x_prev))


def reliability(staleness, mismatch, forgetting):
    """Unclamped reliability from block staleness and prediction mismatch."""
    return np.exp(-forgetting * np.asarray(staleness, dtype=float)) / (1.0 + np.abs(mismatch) ** 2)


def update_reliability(state: ReliabilityState, t, A, x_prev) -> ReliabilityState:
    if np.any(state.t_last > t):
        raise InvalidArgumentError("t precedes a recorded sample time")
    pred = np.asarray(A, dtype=float) @ np.asarray(x_prev, dtype=float)
    r = np.clip(reliability(t - state.t_last, state.y_last - pred, state.forgetting), R_FLOOR, 1.0)
    return replace(state, r=r, u=1.0 / r)


def reliable_greedy_select(A, u, K, gamma, seed=0, init=None) -> SelectionResult:
    """Greedy selection scoring sigma_min^2(A_{S+m}) + gamma * u_m^2.

    Starts from the empty set unless ``init`` is given. With ``gamma == 0``
    and the same ``init`` this is exactly :func:`greedy_eoptimal`.
    """
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_k(A.shape[0], K)
    if np.any(u <= 0):
        raise InvalidArgumentError("unreliability must be positive")
    if init is not None and not 0 <= init < A.shape[0]:
        raise InvalidArgumentError(f"init sensor {init} out of range")
    bonus = None if gamma == 0 else gamma * u**2
    sel, trace = greedy_select(A, K, candidate_min_eig, None if init is None else int(init), bonus)
    return SelectionResult(sel, trace, "reliable-e-optimal-greedy", seed)


def low_rate_schedule(M, n_l, t) -> tuple[int, ...]:
    """Round-robin: sensor m reports at block t iff m = t (mod n_l)."""
    if n_l < 1:
        raise InvalidArgumentError("n_l must be >= 1")
    return tuple(range(t % n_l, M, n_l))


@dataclass(frozen=True)
class OnlineConfig:
    K: int
    low_rate_denominator: int = 30
    gamma: float = 0.7
    blocks: int = 90
    forgetting: float = 0.1
    lasso: LassoConfig = field(default_factory=LassoConfig)
    seed: int = 0
    init: int | None = None

    def __post_init__(self):
        if self.low_rate_denominator < 1:
            raise InvalidArgumentError("low_rate_denominator must be >= 1")
        if self.K < 1 or self.blocks < 1 or self.gamma < 0 or self.forgetting < 0:
            raise InvalidArgumentError("invalid online configuration")


@dataclass(frozen=True)
class TimeBlockRecord:
    t: int
    active_set: tuple[int, ...]
    estimate: np.ndarray
    reliability_snapshot: np.ndarray
    sampled_low_rate: tuple[int, ...]
    true_power: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "active_set": list(self.active_set),
            "estimate": [float(v) for v in self.estimate],
            "reliability": [float(v) for v in self.reliability_snapshot],
            "sampled_low_rate": list(self.sampled_low_rate),
        }


def write_jsonl(records, fh, extra=None):
    """One JSON object per block; ``extra(record)`` may add fields."""
    for rec in records:
        d = rec.to_dict()
        if extra is not None:
            d.update(extra(rec))
        fh.write(json.dumps(d, sort_keys=True) + "\n")


def truth_at(schedule, t):
    for (start, stop), x in schedule:
        if start <= t < stop:
            return np.asarray(x, dtype=float)
    raise InvalidArgumentError(f"truth schedule does not cover block {t}")


def check_schedule(schedule, blocks):
    covered = np.zeros(blocks, dtype=int)
    for (start, stop), _ in schedule:
        covered[max(start, 0):min(stop, blocks)] += 1
    if np.any(covered != 1):
        bad = int(np.flatnonzero(covered != 1)[0])
        raise InvalidArgumentError(f"truth schedule must cover each block exactly once (block {bad})")


def run_online(sc: Scenario, truth_schedule, cfg: OnlineConfig) -> list[TimeBlockRecord]:
    """Two-rate online sensing with per-block reliable reselection.

    Block 0: every sensor reports once, the active set comes from greedy
    E-optimal selection and x from LASSO on the active rows. Each later block
    draws fresh measurements, records reports from the active set and the
    low-rate round-robin group, updates reliability with the previous
    estimate, reselects, and re-estimates from the active rows only.

    Reselection is anchored on the block-0 initial sensor so that
    ``gamma == 0`` keeps the static E-optimal set at every block.
    Measurement noise for block t is drawn from child stream
    (cfg.seed, block=t, "noise"), so runs differing only in gamma see
    identical noise.
    """
    A = sc.gain
    M = sc.M
    _check_k(M, cfg.K)
    check_schedule(truth_schedule, cfg.blocks)

    y = measure(A, truth_at(truth_schedule, 0), sc.noise_std, child_rng(cfg.seed, 0, 0, "noise")).values
    state = ReliabilityState.initial(y, cfg.forgetting)
    init = cfg.init
    if init is None:
        init = int(child_rng(cfg.seed, 0, 0, "init").integers(M))
    S = greedy_eoptimal(A, cfg.K, init=init, seed=cfg.seed).selected
    x = irls_lasso(A, y, S, cfg.lasso).estimate
    records = [TimeBlockRecord(0, S, x, state.r.copy(), tuple(range(M)), truth_at(truth_schedule, 0))]

    for t in range(1, cfg.blocks):
        truth = truth_at(truth_schedule, t)
        y = measure(A, truth, sc.noise_std, child_rng(cfg.seed, 0, t, "noise")).values
        low = low_rate_schedule(M, cfg.low_rate_denominator, t)
        observed = sorted(set(low) | set(S))
        state = state.observe(observed, t, y)
        state = update_reliability(state, t, A, x)
        S = reliable_greedy_select(A, state.u, cfg.K, cfg.gamma, seed=cfg.seed, init=init).selected
        x = irls_lasso(A, y, S, cfg.lasso).estimate
        records.append(TimeBlockRecord(t, S, x, state.r.copy(), low, truth))
    return records


def three_state_schedule(sc: Scenario, blocks=90, transitions=(24, 59), seed=0, sparsity=None):
    """Piecewise-constant truth: the scenario's x* then fresh random supports.

    Each later state moves the active transmitters to a new uniformly drawn
    support of the same size (unit power).
    """
    edges = [0, *transitions, blocks]
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise InvalidArgumentError("transitions must be increasing and inside (0, blocks)")
    k = sc.sparsity if sparsity is None else sparsity
    states = [np.asarray(sc.true_power, dtype=float)]
    for i in range(1, len(edges) - 1):
        rng = child_rng(seed, 0, i, "state")
        x = np.zeros(sc.N)
        x[rng.choice(sc.N, size=k, replace=False)] = 1.0
        states.append(x)
    return [((a, b), x) for (a, b), x in zip(zip(edges, edges[1:]), states)]


def post_transition_blocks(transitions, window, blocks):
    out = []
    for tr in transitions:
        out.extend(range(tr, min(tr + window, blocks)))
    return out
