"""Exhaustive-enumeration cross-checks and matrix diagnostics on small instances.

    python3 scripts/run_oracle_checks.py --out results/oracle
"""

import argparse
import json
from pathlib import Path

from eoptsense import experiments as ex


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--out", type=Path, default=Path("results/oracle"))
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    cfg = ex.load_config(args.config) if args.config else ex.ExperimentConfig()
    cfg = ex.config_from_dict({**ex.config_to_dict(cfg), "seed": args.seed})
    res = ex.run_oracle(cfg, args.out)
    for check, s in sorted(res["summary"].items()):
        print(f"{check:>18}: {s['passed']}/{s['count']}")
    diag = ex.run_diag(cfg, args.out)
    print(json.dumps(diag, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
