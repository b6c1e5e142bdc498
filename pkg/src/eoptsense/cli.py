"""Command-line entry point: ``eoptsense {static,dynamic,diag,oracle}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .errors import CapacityError, ConfigError

log = logging.getLogger("eoptsense")


def _load(args) -> ex.ExperimentConfig:
    cfg = ex.load_config(args.config) if args.config else ex.ExperimentConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.trials is not None:
        over["trials"] = args.trials
    if args.out is not None:
        over["out"] = args.out
    if args.command == "dynamic" and cfg.dynamic is None:
        raise ConfigError("config has no 'dynamic' block")
    return dataclasses.replace(cfg, **over) if over else cfg


def _cmd_static(cfg, out):
    _, summary = ex.run_static_sweep(cfg, out)
    for s in summary:
        print(f"{s['method']:>10} K={s['K']:<3d} success={s['success_rate']:.3f} "
              f"err={s['mean_normalized_error']:.4f}")


def _cmd_dynamic(cfg, out):
    res = ex.run_dynamic_experiment(cfg, out)
    for s in res["summary"]:
        print(f"gamma={s['gamma']:<5g} post-transition err={s['mean_post_transition_error']:.4f} "
              f"final-state reliability={s['mean_final_state_reliability']:.4f}")


def _cmd_diag(cfg, out):
    rep = ex.run_diag(cfg, out)
    print(json.dumps(rep, indent=2, sort_keys=True))


def _cmd_oracle(cfg, out):
    res = ex.run_oracle(cfg, out)
    for check, s in sorted(res["summary"].items()):
        print(f"{check:>18}: {s['passed']}/{s['count']} passed")


COMMANDS = {"static": _cmd_static, "dynamic": _cmd_dynamic, "diag": _cmd_diag, "oracle": _cmd_oracle}


def build_parser():
    p = argparse.ArgumentParser(prog="eoptsense", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "static": "static selection sweep over K and trials (CSV)",
        "dynamic": "online reliability-driven selection vs gamma = 0 baseline",
        "diag": "matrix diagnostics of each method's selected rows",
        "oracle": "exhaustive-enumeration cross-checks on small matrices",
    }
    for name, h in helps.items():
        sp = sub.add_parser(name, help=h)
        sp.add_argument("--config", type=Path, help="JSON experiment config")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--trials", type=int, help="trial count (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _load(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_config(cfg, out, args.command)
        COMMANDS[args.command](cfg, out)
    except (ConfigError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _write_config(cfg, out, command):
    text = json.dumps({"command": command, **ex.config_to_dict(cfg)}, indent=2, sort_keys=True) + "\n"
    (out / f"{command}_config.json").write_text(text, encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
