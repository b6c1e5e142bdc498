"""Online reliability-driven reselection against the gamma = 0 baseline.

Writes per-block traces, the per-gamma summary and reliability rasters.

    python3 scripts/run_dynamic.py --config configs/dynamic.json --out results/dynamic
"""

import argparse
from pathlib import Path

from eoptsense import experiments as ex

ROOT = Path(__file__).resolve().parent.parent


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=ROOT / "configs" / "dynamic.json")
    p.add_argument("--out", type=Path, default=None)
    args = p.parse_args()

    cfg = ex.load_config(args.config)
    out = args.out or Path(cfg.out)
    res = ex.run_dynamic_experiment(cfg, out)
    print(f"{'gamma':>6} {'post-transition err':>20} {'final-state rel':>16} {'spurious':>9}")
    for s in res["summary"]:
        print(f"{s['gamma']:>6g} {s['mean_post_transition_error']:>20.4f} "
              f"{s['mean_final_state_reliability']:>16.4f} {s['mean_post_transition_spurious']:>9.3f}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
