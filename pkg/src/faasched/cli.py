"""Command-line entry point.

Exit codes: 0 success, 2 configuration error (unknown key, bad value,
missing seed), 1 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    load_config,
    run_baseline,
    run_compare,
    run_eval,
    run_gen_topology,
    run_gen_trace,
    run_oracle,
    run_train,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faasched",
        description="Cost-aware serverless placement: simulate, train, compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override a config value")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed; required for anything stochastic")
        p.add_argument("--out", default="out", help="output directory")

    common(sub.add_parser("gen-topology", help="generate and save a topology"))
    common(sub.add_parser("gen-trace", help="generate and save a trace + catalog"))

    train_p = sub.add_parser("train", help="train a scheduler")
    common(train_p)
    train_p.add_argument("--algo", choices=("dqn", "ppo"), required=True)

    eval_p = sub.add_parser("eval", help="evaluate a trained scheduler")
    common(eval_p)
    eval_p.add_argument("--algo", choices=("dqn", "ppo"), required=True)
    eval_p.add_argument("--models", required=True, help="directory with saved models")

    baseline_p = sub.add_parser("baseline", help="run a non-learning scheduler")
    common(baseline_p)
    baseline_p.add_argument("--scheduler", choices=("greedy", "random"), required=True)

    common(sub.add_parser("oracle", help="solve evaluation traces exactly"))
    common(sub.add_parser("compare", help="evaluate all configured schedulers"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        if args.command == "gen-topology":
            run_gen_topology(config, args.seed, args.out)
        elif args.command == "gen-trace":
            run_gen_trace(config, args.seed, args.out)
        elif args.command == "train":
            run_train(config, args.algo, args.seed, args.out)
        elif args.command == "eval":
            run_eval(config, args.algo, args.models, args.seed, args.out)
        elif args.command == "baseline":
            run_baseline(config, args.scheduler, args.seed, args.out)
        elif args.command == "oracle":
            run_oracle(config, args.seed, args.out)
        elif args.command == "compare":
            run_compare(config, args.seed, args.out)
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
