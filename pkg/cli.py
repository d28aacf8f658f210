"""
Command-line front end for the verification suites.

Usage:
    python cli.py run config.json [--suite dec --suite faces] [--resolution 16 --resolution 32]
                                  [--seed 7] [--out reports/run1] [--record]
    python cli.py explain tilt-dec

Exit codes: 0 all enabled checks passed, 1 at least one check failed (the
report is still written), 2 unreadable or invalid configuration or unknown check.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from pydantic import ValidationError
from sqlmodel import Session

from app.config import REPORT_DIR, configure_logging
from app.schemas import RunConfig
from app.services import (
    ConfigError, RigidityError, SuiteRunner, explain, failed_checks, init_db, record_run, write_report,
)
from app.services.database import engine

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _error_key(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """
    Read a JSON run configuration and apply command-line overrides.

    Raises:
        ConfigError: With the offending key named in the message
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        problems = "; ".join(f"{_error_key(e)}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"invalid config: {problems}") from exc


def _record(report, report_path: str) -> int:
    init_db()
    with Session(engine) as session:
        return record_run(session, report, report_path).id


def cmd_run(args) -> int:
    overrides = {"suites": args.suite, "resolutions": args.resolution, "seed": args.seed, "output": args.out}
    try:
        config = load_config(args.config, overrides)
        runner = SuiteRunner(config)
    except RigidityError as exc:
        print(f"[FAILED] {exc}")
        return EXIT_CONFIG

    logger.info("running %s (suites: %s, seed %d)", args.config, ", ".join(config.enabled_suites), config.seed)
    report = runner.run()
    out_dir = config.output or REPORT_DIR
    paths = write_report(report, out_dir)

    for rec in report.checks:
        status = "[OK]" if rec.passed else "[FAILED]"
        value = "-" if rec.value is None else f"{rec.value:.3e}"
        print(f"{status} {rec.suite}/{rec.name}: {value} {rec.comparison} {rec.threshold} {rec.detail}".rstrip())

    failed = failed_checks(report)
    print("\n" + "=" * 60)
    print(f"Check Results: {len(report.checks) - len(failed)}/{len(report.checks)} passed")
    print(f"Report: {paths['report']}")
    print("=" * 60)

    if args.record:
        run_id = _record(report, str(paths["report"]))
        print(f"Recorded as run {run_id}")

    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_explain(args) -> int:
    try:
        print(explain(args.check))
    except RigidityError as exc:
        print(f"[FAILED] {exc}")
        return EXIT_CONFIG
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cli.py", description="Polyhedral rigidity verification suites")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the suites of a configuration")
    run.add_argument("config", help="JSON run configuration")
    run.add_argument("--suite", action="append", help="Suite to run (repeatable; replaces config suites)")
    run.add_argument("--resolution", action="append", type=int, help="Grid resolution (repeatable)")
    run.add_argument("--seed", type=int, help="Seed of the randomized draws")
    run.add_argument("--out", help="Report directory")
    run.add_argument("--record", action="store_true", help="Store the run in the database")
    run.set_defaults(handler=cmd_run)

    exp = sub.add_parser("explain", help="Print the formula a check evaluates")
    exp.add_argument("check", help="Check name")
    exp.set_defaults(handler=cmd_explain)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
