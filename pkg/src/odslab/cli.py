"""Command-line experiment runner.

Subcommands: realizable, agnostic, oods (run one suite, config optional),
sweep (run whatever suite the config names), verify (run the acceptance
criteria; exits nonzero on any failure).
"""
from __future__ import annotations

import argparse
import sys

from .harness import ExperimentConfig, TrialError, run_experiment, summarize


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--seed", type=int, help="override base seed")
    p.add_argument("--trials", type=int, help="override trials per grid point")
    p.add_argument("--out", help="CSV output path (sidecar .meta.json is written too)")
    p.add_argument("--trace", help="directory for per-trial hedge trajectory JSON")
    p.add_argument("--quiet", action="store_true", help="suppress per-row echo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odslab",
        description="On-demand-sampling experiment harness for multi-distribution learning.")
    sub = parser.add_subparsers(dest="command", required=True)
    for suite in ("realizable", "agnostic", "oods"):
        p = sub.add_parser(suite, help=f"run the {suite} suite")
        _add_run_flags(p)
    p = sub.add_parser("sweep", help="run the suite named by the config file")
    _add_run_flags(p)
    p = sub.add_parser("verify", help="run the acceptance property suites")
    p.add_argument("--criterion", type=int, action="append",
                   help="run only this criterion number (repeatable)")
    return parser


def _load_config(args, suite: str) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_toml(args.config)
        if suite != "sweep" and cfg.suite != suite:
            raise SystemExit(f"config names suite {cfg.suite!r}, expected {suite!r}")
    else:
        if suite == "sweep":
            raise SystemExit("sweep requires --config")
        cfg = ExperimentConfig.defaults(suite)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    if args.out is not None:
        cfg.out = args.out
    if args.trace is not None:
        cfg.trace = args.trace
    return cfg


def _run_suite(args, suite: str) -> int:
    cfg = _load_config(args, suite)
    echo = None if args.quiet else (lambda row: print(_row_line(row)))
    try:
        rows = run_experiment(cfg, echo=echo)
    except TrialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for agg in summarize(rows):
        print("summary:", {k: (round(v, 6) if isinstance(v, float) else v)
                           for k, v in agg.items()})
    if cfg.out:
        print(f"wrote {len(rows)} rows to {cfg.out}")
    return 0


def _row_line(row: dict) -> str:
    skip = {"suite", "config_hash", "per_dist_errors", "samples_per_dist"}
    body = ", ".join(f"{k}={v}" for k, v in row.items() if k not in skip)
    return f"[{row['suite']}] {body}"


def _run_verify(args) -> int:
    from . import acceptance

    if args.criterion:
        results = [acceptance.run_one(n) for n in args.criterion]
        for res in results:
            print(res.line())
    else:
        results = acceptance.run_criteria(echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    return _run_suite(args, args.command)


if __name__ == "__main__":
    sys.exit(main())
