"""Command-line interface.

Subcommands mirror the experiment set; every experiment subcommand accepts
either a --config JSON (a RunConfig document) or direct --n/--p/--q flags.
Exit codes: 0 all passed, 1 an acceptance or experiment pass-flag failed,
2 configuration error.
"""
from __future__ import annotations

import argparse
import sys

from .harness import (ConfigError, OUTPUT_DIR_ENV, RunConfig,
                      default_output_dir, run_experiment)

_EXPERIMENT_COMMANDS = ("sample", "fisher", "kl", "lsi", "moments-table",
                        "extremal", "identity-check", "sampler-agreement")

_COMMAND_TO_EXPERIMENT = {
    "moments-table": "moments",
    **{c: c for c in _EXPERIMENT_COMMANDS if c != "moments-table"},
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, help="ambient dimension")
    sub.add_argument("--p", type=int, help="corner rows")
    sub.add_argument("--q", type=int, help="corner columns")
    sub.add_argument("--samples", type=int, default=10000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--route", choices=("spectral-jacobi", "spectral-haar",
                                         "gradient-haar"))
    sub.add_argument("--out", help=f"output directory (default: "
                                   f"${OUTPUT_DIR_ENV} or ./haarcorner-out)")
    sub.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    sub.add_argument("--config", help="RunConfig JSON file; overrides flags")
    sub.add_argument("--workers", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarcorner",
        description="Corner blocks of Haar orthogonal matrices: spectra and "
                    "information distances against the Gaussian.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for cmd in _EXPERIMENT_COMMANDS:
        sub = subs.add_parser(cmd, help=f"run the {cmd} experiment")
        _add_common(sub)
    verify = subs.add_parser("verify", help="run the full acceptance suite")
    verify.add_argument("--quiet", action="store_true")
    return parser


def _config_from_args(args: argparse.Namespace, experiment: str) -> RunConfig:
    if args.config:
        config = RunConfig.from_json(args.config)
        if config.experiment != experiment:
            raise ConfigError(
                f"config runs {config.experiment!r}, but the {experiment!r} "
                "subcommand was invoked")
        return config
    if args.n is None or args.p is None or args.q is None:
        raise ConfigError("either --config or all of --n/--p/--q are required")
    return RunConfig(
        experiment=experiment,
        grid=((args.n, args.p, args.q),),
        samples=args.samples,
        seed=args.seed,
        route=args.route,
        output_dir=args.out or str(default_output_dir()),
        format=args.format,
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "verify":
        from .acceptance import run_all
        results = run_all(verbose=not args.quiet)
        failed = [r for r in results if not r.passed]
        if args.quiet:
            for r in failed:
                print(r.line())
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0

    experiment = _COMMAND_TO_EXPERIMENT[args.command]
    try:
        config = _config_from_args(args, experiment)
        records = run_experiment(config, workers=args.workers)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    for rec in records[:20]:
        print(rec.as_flat_dict())
    if len(records) > 20:
        print(f"... {len(records) - 20} more records written")
    failed = [r for r in records
              if r.fields.get("passed") is False
              or r.fields.get("holds") is False
              or r.fields.get("within_budget") is False]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
