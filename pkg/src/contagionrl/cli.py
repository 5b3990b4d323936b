"""Command-line interface: batch runs and statistical reports.

    contagionrl run --config cfg.txt --policy greedy --seeds 0,1,2 \
        --episodes 100 --out results/ [--trace] [--render]
    contagionrl report --in results/ --pairs all

Config values resolve as defaults < config file < CONTAGION_* env vars
< CLI flags; every config key is also available as a flag of the same
name.  Validation failures exit nonzero with the offending field named.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .config import SimConfig, load_config
from .errors import ConfigError
from .runner import ExperimentManifest, run_experiment, write_report


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides")
    for f in fields(SimConfig):
        group.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", default=None,
                           metavar="V", help=argparse.SUPPRESS)


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for f in fields(SimConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            overrides[f.name] = value
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contagionrl",
        description="Spatial SIRS+D epidemic simulation: batch runs and reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run seeds x episodes for one policy")
    run_p.add_argument("--config", default=None, help="key=value config file")
    run_p.add_argument("--policy", required=True,
                       help="stationary | random | greedy | replay:<file>")
    run_p.add_argument("--seeds", default="0,1,2",
                       help="comma-separated seed list")
    run_p.add_argument("--episodes", type=int, default=100,
                       help="episodes per seed")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--trace", action="store_true",
                       help="write per-step JSON-lines logs")
    run_p.add_argument("--render", action="store_true",
                       help="dump one PPM frame per step")
    run_p.add_argument("--workers", type=int, default=1,
                       help="parallel episode workers")
    _add_config_flags(run_p)

    rep_p = sub.add_parser("report", help="summaries + pairwise U tests")
    rep_p.add_argument("--in", dest="in_dir", required=True,
                       help="directory holding episodes_*.csv")
    rep_p.add_argument("--pairs", default="all",
                       help='"all" or comma-separated a:b pairs')
    rep_p.add_argument("--alpha", type=float, default=0.05)
    rep_p.add_argument("--resamples", type=int, default=10_000,
                       help="bootstrap resample count")
    rep_p.add_argument("--bootstrap-seed", type=int, default=0)
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    overrides = _collect_overrides(args)
    if args.render:
        overrides.setdefault("render_mode", "rgb_array")
    config = load_config(args.config, overrides)
    seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    manifest = ExperimentManifest(
        config=config,
        policy=args.policy,
        seeds=seeds,
        episodes_per_seed=args.episodes,
        out_dir=Path(args.out),
        trace=args.trace,
        render=args.render,
        workers=args.workers,
    )
    records = run_experiment(manifest)
    durations = [r.summary.duration for r in records]
    print(f"{args.policy}: {len(records)} episodes, "
          f"mean duration {sum(durations) / len(durations):.2f}, "
          f"wrote {manifest.out_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    text = write_report(Path(args.in_dir), pairs=args.pairs, alpha=args.alpha,
                        n_resamples=args.resamples,
                        bootstrap_seed=args.bootstrap_seed)
    print(text, end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_report(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
