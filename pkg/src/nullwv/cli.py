"""Command-line entry point: ``nwv sweep|discriminate|trajectories|validate``.

Exit codes: 0 success, 2 invalid config, 3 numerical failure, 4 I/O failure.
Set ``NWV_LOG`` (DEBUG, INFO, WARNING, ...) to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import dump_config, load_config
from .errors import ConfigError, ConfigMismatchError, NwvError
from .experiments import emit, run_discrimination, run_sweep, run_trajectories

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

log = logging.getLogger("nullwv")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nwv", description="Weak-value and null-weak-value experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="output file (default: config outputs.path, else stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default: config, else csv)")
    common.add_argument("--seed", type=int, help="override the Monte Carlo seed")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="gamma sweep of WV and NWV")
    p.add_argument("config")
    p = sub.add_parser("discriminate", parents=[common], help="signal between two initial states")
    p.add_argument("config0")
    p.add_argument("config_delta")
    p = sub.add_parser("trajectories", parents=[common], help="Monte Carlo estimates vs analytic values")
    p.add_argument("config")
    p = sub.add_parser("validate", help="check a config and print its canonical form")
    p.add_argument("config")
    return ap


def _write(obj, args, config) -> None:
    fmt = args.format or config.outputs.format
    path = args.out or config.outputs.path
    text = emit(obj, fmt, path)
    if path is None:
        sys.stdout.write(text)
    else:
        log.info("wrote %s", path)


def _run(args) -> None:
    if args.command == "validate":
        config = load_config(args.config)
        sys.stdout.write(dump_config(config) + "\n")
        return
    if args.jobs < 1:
        raise ConfigError("--jobs", "must be at least 1")
    if args.command == "sweep":
        config = load_config(args.config)
        if config.sweep is None:
            raise ConfigError("$.sweep", "required for the sweep command")
        rows = run_sweep(config, seed=args.seed, jobs=args.jobs)
        _write(rows, args, config)
    elif args.command == "trajectories":
        config = load_config(args.config)
        if config.sweep is not None:
            obj = run_sweep(config, montecarlo=True, seed=args.seed, jobs=args.jobs)
        else:
            obj = run_trajectories(config, seed=args.seed, jobs=args.jobs)
        _write(obj, args, config)
    elif args.command == "discriminate":
        config0 = load_config(args.config0)
        config_delta = load_config(args.config_delta)
        report = run_discrimination(config0, config_delta, seed=args.seed, jobs=args.jobs)
        _write(report, args, config0)


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("NWV_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = _build_parser().parse_args(argv)
    try:
        _run(args)
    except (ConfigError, ConfigMismatchError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NwvError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
