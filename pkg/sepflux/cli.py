"""
Command-line entry point.

    sepflux run <config.json>       run the experiment, write CSV + JSON report
    sepflux oracle <config.json>    duality oracle, one JSON object per line
    sepflux validate <config.json>  print the normalised config

Exit codes: 0 pass, 1 check failure, 2 config error, 3 runtime error.
"""

import argparse
import dataclasses
import json
import logging
import sys
from typing import List, Optional

from .config import ExperimentConfig, load_config
from .errors import ConfigError, SepfluxError
from .oracle import run_oracle
from .runner import run_and_write
from .utils.logging import configure_logging

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepflux",
        description="Exclusion-process flux and collision experiments on the discrete torus",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an experiment and write its report")
    oracle = sub.add_parser("oracle", help="Compare Monte-Carlo and exact k-point correlations")
    validate = sub.add_parser("validate", help="Validate a config and print its normalised form")

    for p in (run, oracle, validate):
        p.add_argument("config", help="Path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config)")
        p.add_argument("--replicas", type=int, default=None, help="Replica count (stirring paths for oracle)")
        p.add_argument("--threads", type=int, default=None, help="Worker threads")
    for p in (run, validate):
        p.add_argument("--out", default=None, help="Output directory (default: out)")
        p.add_argument(
            "--debug-trace",
            action="store_true",
            default=None,
            help="Write the binary event trace of replica 0",
        )
    run.add_argument(
        "--db",
        default=None,
        help="Results-store URL (default: $SEPFLUX_DATABASE_URL, unset = no store)",
    )
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides = {
        "seed": args.seed,
        "threads": args.threads,
        "output_dir": getattr(args, "out", None),
        "debug_trace": getattr(args, "debug_trace", None),
    }
    if args.command != "oracle":
        overrides["replicas"] = args.replicas
    return overrides


def _cmd_validate(cfg: ExperimentConfig) -> int:
    print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
    return EXIT_PASS


def _cmd_oracle(cfg: ExperimentConfig, replicas: Optional[int]) -> int:
    if replicas is not None and cfg.oracle is not None:
        cfg = dataclasses.replace(cfg, oracle=dataclasses.replace(cfg.oracle, replicas=replicas))
    for record in run_oracle(cfg):
        print(json.dumps(record, sort_keys=True), flush=True)
    return EXIT_PASS


def _cmd_run(cfg: ExperimentConfig, db: Optional[str]) -> int:
    reports, paths = run_and_write(cfg)
    for name, path in paths.items():
        print(f"{name}: {path}")

    # imported lazily; the store is optional
    from .utils.database import DatabaseManager, get_database_url, save_reports

    url = get_database_url(db)
    if url:
        with DatabaseManager(url) as manager:
            save_reports(reports, manager)

    if any(r.failures for r in reports):
        for r in reports:
            for rid, failure in sorted(r.failures.items()):
                logger.error("L=%d replica %d: %s", r.L, rid, failure["message"])
        return EXIT_RUNTIME_ERROR
    status = "pass" if all(r.passed for r in reports) else "fail"
    print(f"status: {status}")
    return EXIT_PASS if status == "pass" else EXIT_CHECK_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        cfg = load_config(args.config, _overrides(args))
        if args.command == "validate":
            return _cmd_validate(cfg)
        if args.command == "oracle":
            return _cmd_oracle(cfg, args.replicas)
        return _cmd_run(cfg, args.db)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SepfluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
