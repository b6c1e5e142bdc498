"""Experiment runners behind the command line.

All randomness is derived from the master seed with
:func:`eoptsense.seeding.child_seed` keyed by (trial, block, purpose), and
every output table is sorted before it is written, so an identical config
produces identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import matrixdiag as md
from .dynamic import OnlineConfig, post_transition_blocks, run_online, three_state_schedule, write_jsonl
from .errors import CapacityError, ConfigError
from .metrics import (SUPPORT_TAU, mean_reliability, normalized_error, recovery_success,
                      reliability_raster, spurious_power)
from .recovery import LassoConfig, irls_lasso
from .scenario import GridSpec, build_scenario, measure
from .seeding import child_rng, child_seed
from .selection import (greedy_doptimal, greedy_eoptimal, oracle_best_subset, random_selection,
                        subset_scores, volume_sampling_bound)

METHOD_TAGS = ("d-optimal", "e-optimal", "oracle", "random")

STATIC_COLUMNS = ("method", "K", "trial", "success", "normalized_error", "spurious_power", "wall_ms")
SUMMARY_COLUMNS = ("method", "K", "trials", "success_rate", "mean_normalized_error", "mean_spurious_power")
BLOCK_COLUMNS = ("repeat", "gamma", "t", "state", "transition", "normalized_error",
                 "mean_reliability", "spurious_power", "active_set")


@dataclass(frozen=True)
class ScenarioParams:
    side_count: int = 6
    area_extent: float = 10.0
    sensors: int = 100
    sparsity: int = 5
    snr_db: float = 20.0

    def build(self, seed):
        return build_scenario(GridSpec(self.side_count, self.area_extent), self.sensors,
                              self.sparsity, self.snr_db, seed)


@dataclass(frozen=True)
class DynamicParams:
    K: int = 8
    low_rate_denominator: int = 30
    gamma: float = 0.7
    blocks: int = 90
    forgetting: float = 0.1
    transitions: tuple[int, ...] = (24, 59)
    repeats: int = 1
    window: int = 10
    gamma_sweep: tuple[float, ...] = ()
    raster_blocks: tuple[int, ...] = ()
    raster_resolution: int = 64


@dataclass(frozen=True)
class OracleParams:
    M: int = 8
    N: int = 5
    instances: int = 100
    K: tuple[int, ...] = (1, 2, 3, 4)
    greedy_M: int = 10
    greedy_N: int = 8
    greedy_K: int = 3
    greedy_instances: int = 50
    chain_instances: int = 50
    chain_max_n: int = 7


@dataclass(frozen=True)
class DiagParams:
    K: int = 8
    rip_orders: tuple[int, ...] = (1, 2)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    methods: tuple[str, ...] = ("e-optimal", "random")
    K: tuple[int, ...] = (10, 15, 20, 25, 30, 35, 40)
    trials: int = 100
    seed: int = 0
    lasso: LassoConfig = field(default_factory=LassoConfig)
    tau: float = SUPPORT_TAU
    timing: bool = False
    dynamic: DynamicParams | None = None
    oracle: OracleParams = field(default_factory=OracleParams)
    diag: DiagParams = field(default_factory=DiagParams)
    out: str = "results"

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHOD_TAGS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; valid tags: {list(METHOD_TAGS)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if any(not 1 <= k <= self.scenario.sensors for k in self.K):
            raise ConfigError(f"K values must lie in [1, {self.scenario.sensors}]")


def _build(cls, d, name):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"{name} must be an object")
    known = {f.name for f in fields(cls)}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name}: {exc}") from exc


def _k_values(spec):
    if isinstance(spec, dict):
        return tuple(range(int(spec["start"]), int(spec["stop"]) + 1, int(spec.get("step", 1))))
    if isinstance(spec, int):
        return (spec,)
    return tuple(int(k) for k in spec)


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    known = {f.name for f in fields(ExperimentConfig)}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    kw = {}
    for key, val in d.items():
        if key == "scenario":
            kw[key] = _build(ScenarioParams, val, key)
        elif key == "dynamic":
            kw[key] = None if val is None else _build(DynamicParams, val, key)
        elif key == "oracle":
            kw[key] = _build(OracleParams, val, key)
        elif key == "diag":
            kw[key] = _build(DiagParams, val, key)
        elif key == "lasso":
            kw[key] = _build(LassoConfig, val, key)
        elif key == "K":
            kw[key] = _k_values(val)
        elif key == "methods":
            kw[key] = tuple(val)
        else:
            kw[key] = val
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return json.loads(json.dumps(asdict(cfg)))


# -- output helpers -------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(i) for i in v)
    return "" if v is None else str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- static sweep -----------------------------------------------------------------

def _select(method, A, K, trial, master):
    if method == "e-optimal":
        return greedy_eoptimal(A, K, seed=child_seed(master, trial, 0, "select"))
    if method == "d-optimal":
        return greedy_doptimal(A, K, seed=child_seed(master, trial, 0, "select"))
    if method == "random":
        return random_selection(A.shape[0], K, child_seed(master, trial, K, "random"))
    return oracle_best_subset(A, K, "min-eig")


def static_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    """All (method, K) rows for one scenario realization."""
    master = cfg.seed
    sc = cfg.scenario.build(child_seed(master, trial, 0, "scenario"))
    y = measure(sc.gain, sc.true_power, sc.noise_std, child_rng(master, trial, 0, "noise")).values
    rows = []
    kmax = max(cfg.K)
    for method in cfg.methods:
        greedy_cache = None
        for K in cfg.K:
            t0 = time.perf_counter()
            if method in ("e-optimal", "d-optimal"):
                # greedy runs are prefix-consistent: the K-run is the prefix of the kmax-run
                if greedy_cache is None:
                    greedy_cache = _select(method, sc.gain, kmax, trial, master)
                sel = greedy_cache.prefix(K)
            else:
                sel = _select(method, sc.gain, K, trial, master)
            res = irls_lasso(sc.gain, y, sel.selected, cfg.lasso)
            wall = (time.perf_counter() - t0) * 1e3
            rows.append({
                "method": method,
                "K": K,
                "trial": trial,
                "success": recovery_success(res.estimate, sc.true_power, cfg.tau),
                "normalized_error": normalized_error(res.estimate, sc.true_power) if sc.sparsity else math.nan,
                "spurious_power": spurious_power(res.estimate, sc.support),
                "wall_ms": round(wall, 3) if cfg.timing else None,
            })
    return rows


def summarize_static(rows) -> list[dict]:
    groups = {}
    for r in rows:
        groups.setdefault((r["method"], r["K"]), []).append(r)
    out = []
    for (method, K), rs in sorted(groups.items()):
        out.append({
            "method": method,
            "K": K,
            "trials": len(rs),
            "success_rate": float(np.mean([r["success"] for r in rs])),
            "mean_normalized_error": float(np.mean([r["normalized_error"] for r in rs])),
            "mean_spurious_power": float(np.mean([r["spurious_power"] for r in rs])),
        })
    return out


def run_static_sweep(cfg: ExperimentConfig, out_dir=None):
    """Returns (trial rows, summary rows); writes CSVs when ``out_dir`` is given."""
    rows = []
    for trial in range(cfg.trials):
        rows.extend(static_trial(cfg, trial))
    rows.sort(key=lambda r: (r["method"], r["K"], r["trial"]))
    summary = summarize_static(rows)
    if out_dir is not None:
        out = Path(out_dir)
        _write(out / "static_trials.csv", csv_text(STATIC_COLUMNS, rows))
        _write(out / "static_summary.csv", csv_text(SUMMARY_COLUMNS, summary))
    return rows, summary


# -- dynamic experiment -------------------------------------------------------------

def _online_cfg(cfg: ExperimentConfig, gamma, seed):
    d = cfg.dynamic
    return OnlineConfig(K=d.K, low_rate_denominator=d.low_rate_denominator, gamma=gamma,
                        blocks=d.blocks, forgetting=d.forgetting, lasso=cfg.lasso, seed=seed)


def _state_index(transitions, t):
    return sum(t >= tr for tr in transitions)


def block_rows(records, repeat, gamma, transitions, support_of_truth=True):
    rows = []
    for rec in records:
        truth = rec.true_power
        rows.append({
            "repeat": repeat,
            "gamma": float(gamma),
            "t": rec.t,
            "state": _state_index(transitions, rec.t),
            "transition": rec.t in transitions,
            "normalized_error": normalized_error(rec.estimate, truth),
            "mean_reliability": mean_reliability(rec.reliability_snapshot),
            "spurious_power": spurious_power(rec.estimate, np.flatnonzero(truth)),
            "active_set": rec.active_set,
        })
    return rows


def dynamic_repeat(cfg: ExperimentConfig, repeat: int, gammas):
    """Run every gamma in ``gammas`` on one scenario with a shared seed stream."""
    d = cfg.dynamic
    master = cfg.seed
    sc = cfg.scenario.build(child_seed(master, repeat, 0, "scenario"))
    schedule = three_state_schedule(sc, d.blocks, d.transitions, seed=child_seed(master, repeat, 0, "schedule"))
    online_seed = child_seed(master, repeat, 0, "online")
    return sc, {g: run_online(sc, schedule, _online_cfg(cfg, g, online_seed)) for g in gammas}


def summarize_blocks(rows, transitions, window, blocks) -> dict:
    post = set(post_transition_blocks(transitions, window, blocks))
    final_start = transitions[-1] if transitions else 0
    err = [r["normalized_error"] for r in rows if r["t"] in post]
    rel = [r["mean_reliability"] for r in rows if r["t"] >= final_start]
    spur = [r["spurious_power"] for r in rows if r["t"] in post]
    return {
        "mean_post_transition_error": float(np.mean(err)) if err else math.nan,
        "mean_final_state_reliability": float(np.mean(rel)),
        "mean_post_transition_spurious": float(np.mean(spur)) if spur else math.nan,
    }


DYN_SUMMARY_COLUMNS = ("gamma", "repeats", "mean_post_transition_error",
                       "mean_final_state_reliability", "mean_post_transition_spurious")


def run_dynamic_experiment(cfg: ExperimentConfig, out_dir=None):
    """Main gamma vs gamma = 0 baseline (plus optional sweep), per-block tables.

    Returns a dict with the block rows and the per-gamma summary.
    """
    if cfg.dynamic is None:
        raise ConfigError("config has no 'dynamic' block")
    d = cfg.dynamic
    gammas = sorted({float(d.gamma), 0.0, *(float(g) for g in d.gamma_sweep)})
    rows = []
    per_repeat = {g: [] for g in gammas}
    first = None
    for rep in range(d.repeats):
        sc, runs = dynamic_repeat(cfg, rep, gammas)
        if rep == 0:
            first = (sc, runs)
        for g in gammas:
            br = block_rows(runs[g], rep, g, d.transitions)
            rows.extend(br)
            per_repeat[g].append(summarize_blocks(br, d.transitions, d.window, d.blocks))
    rows.sort(key=lambda r: (r["gamma"], r["repeat"], r["t"]))
    summary = []
    for g in gammas:
        s = {"gamma": g, "repeats": d.repeats}
        for key in DYN_SUMMARY_COLUMNS[2:]:
            s[key] = float(np.mean([p[key] for p in per_repeat[g]]))
        summary.append(s)

    if out_dir is not None:
        out = Path(out_dir)
        sc, runs = first
        for g, name in ((float(d.gamma), "trace.jsonl"), (0.0, "baseline_trace.jsonl")):
            buf = io.StringIO()
            write_jsonl(runs[g], buf, extra=lambda rec, g=g: {
                "gamma": g,
                "transition": rec.t in d.transitions,
                "normalized_error": normalized_error(rec.estimate, rec.true_power),
                "mean_reliability": mean_reliability(rec.reliability_snapshot),
                "spurious_power": spurious_power(rec.estimate, np.flatnonzero(rec.true_power)),
            })
            _write(out / name, buf.getvalue())
        _write(out / "dynamic_blocks.csv", csv_text(BLOCK_COLUMNS, rows))
        _write(out / "dynamic_summary.csv", csv_text(DYN_SUMMARY_COLUMNS, summary))
        main = runs[float(d.gamma)]
        for t in d.raster_blocks:
            if 0 <= t < d.blocks:
                rmap = reliability_raster(sc, main[t].reliability_snapshot, d.raster_resolution)
                _write(out / "maps" / f"reliability_t{t:03d}.pgm", rmap.to_pgm())
                _write(out / "maps" / f"reliability_t{t:03d}.json", rmap.to_json())
        _write(out / "scenario.json", sc.to_json())
    return {"rows": rows, "summary": summary}


# -- diagnostics and oracle cross-checks -------------------------------------------

def run_diag(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Matrix diagnostics of each method's selected rows on one scenario."""
    master = cfg.seed
    sc = cfg.scenario.build(child_seed(master, 0, 0, "scenario"))
    A = sc.gain
    K = cfg.diag.K
    report = {"M": sc.M, "N": sc.N, "K": K, "methods": {}}
    for method in cfg.methods:
        entry = {}
        try:
            sel = _select(method, A, K, 0, master)
        except CapacityError as exc:
            report["methods"][method] = {"error": str(exc)}
            continue
        Phi = A[list(sel.selected)]
        spec = md.subset_spectrum(A, sel.selected)
        entry["selected"] = list(sel.selected)
        entry["min_eig"] = spec.min_eig
        entry["volume"] = spec.volume
        entry["projection_residual"] = md.projection_residual(A, sel.selected)
        entry["best_rank_k_error"] = md.best_rank_k_error(A, min(K, sc.N))
        rip = {}
        for s in cfg.diag.rip_orders:
            try:
                r = md.rip_constants(Phi, s)
                rip[str(s)] = {"delta_lower": r.delta_lower, "delta_upper": r.delta_upper,
                               "argmin_subset": list(r.argmin_subset),
                               "mean_min_eig": md.mean_min_eig(Phi, s)}
            except CapacityError as exc:
                rip[str(s)] = {"error": str(exc)}
        entry["rip"] = rip
        try:
            entry["spark"] = md.spark(Phi)
        except CapacityError as exc:
            entry["spark"] = None
            entry["spark_error"] = str(exc)
        report["methods"][method] = entry
    if out_dir is not None:
        _write(Path(out_dir) / "diag.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


ORACLE_COLUMNS = ("check", "instance", "K", "lhs", "rhs", "passed")


def _median_completion(A, K, init):
    """Median min-eig objective over all K-subsets containing ``init``."""
    subsets, scores = subset_scores(A, K, "min-eig")
    mask = np.any(subsets == init, axis=1)
    return float(np.median(scores[mask])), float(scores.max())


def run_oracle(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Enumeration cross-checks on small Gaussian matrices."""
    o = cfg.oracle
    master = cfg.seed
    rows = []
    for i in range(o.instances):
        A = child_rng(master, i, 0, "oracle-thm").standard_normal((o.M, o.N))
        for K in o.K:
            lhs, rhs = volume_sampling_bound(A, K)
            rows.append({"check": "volume-bound", "instance": i, "K": K, "lhs": lhs, "rhs": rhs,
                         "passed": lhs <= rhs + 1e-9})
    for i in range(o.greedy_instances):
        A = child_rng(master, i, 0, "oracle-greedy").standard_normal((o.greedy_M, o.greedy_N))
        g = greedy_eoptimal(A, o.greedy_K, init=0).objective_trace[-1]
        med, best = _median_completion(A, o.greedy_K, 0)
        rows.append({"check": "greedy-vs-median", "instance": i, "K": o.greedy_K, "lhs": g, "rhs": med,
                     "passed": g >= med})
        rows.append({"check": "greedy-le-oracle", "instance": i, "K": o.greedy_K, "lhs": g, "rhs": best,
                     "passed": g <= best + 1e-12})
    for i in range(o.chain_instances):
        rng = child_rng(master, i, 0, "oracle-chain")
        n = int(rng.integers(2, o.chain_max_n + 1))
        A = rng.standard_normal((int(rng.integers(n, n + 4)), n)) / math.sqrt(n)
        chain = md.lower_rip_chain(A)
        ok = all(b >= a - 1e-9 for a, b in zip(chain[1:], chain[2:]))
        full = float(np.clip(1.0 - np.linalg.eigvalsh(A.T @ A)[0], 0.0, 1.0))
        rows.append({"check": "lower-rip-chain", "instance": i, "K": n, "lhs": chain[-1], "rhs": full,
                     "passed": ok and abs(chain[-1] - full) <= 1e-9})
    summary = {}
    for r in rows:
        s = summary.setdefault(r["check"], {"count": 0, "passed": 0})
        s["count"] += 1
        s["passed"] += int(r["passed"])
    if out_dir is not None:
        _write(Path(out_dir) / "oracle.csv", csv_text(ORACLE_COLUMNS, rows))
        _write(Path(out_dir) / "oracle_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return {"rows": rows, "summary": summary}
