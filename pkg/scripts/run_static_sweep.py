"""Support-recovery rate vs K for E-optimal and random selection.

    python3 scripts/run_static_sweep.py --config configs/static_sweep.json --out results/static
"""

import argparse
from pathlib import Path

from eoptsense import experiments as ex

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=ROOT / "configs" / "static_sweep.json")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--trials", type=int, default=None)
    args = p.parse_args()

    cfg = ex.load_config(args.config)
    if args.trials is not None:
        cfg = ex.config_from_dict({**ex.config_to_dict(cfg), "trials": args.trials})
    out = args.out or Path(cfg.out)
    _, summary = ex.run_static_sweep(cfg, out)

    methods = sorted({s["method"] for s in summary})
    rate = {(s["method"], s["K"]): s["success_rate"] for s in summary}
    print("K    " + "".join(f"{m:>12}" for m in methods))
    for K in cfg.K:
        print(f"{K:<5d}" + "".join(f"{rate[m, K]:>12.2f}" for m in methods))
    print(f"wrote {out}/static_trials.csv and static_summary.csv")


if __name__ == "__main__":
    main()
