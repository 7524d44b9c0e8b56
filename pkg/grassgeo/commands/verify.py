"""
`verify`: run the property suites on seeded random instances.
"""
import argparse
import json
import logging
from pathlib import Path
from typing import List

from pydantic import ValidationError

from grassgeo.commands.commands import Outcome
from grassgeo.commands.deps import describe_validation_error
from grassgeo.core.config import settings
from grassgeo.core.errors import UsageError
from grassgeo.schemas.schemas import Report, SuiteConfig
from grassgeo.services import suites


NAME = "verify"
HELP = "run verification suites on seeded random instances"

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--suite", default="all", help=f"one of {', '.join(suites.SUITES)} or all")
    parser.add_argument("--trials", type=int, default=5, help="instances per check (default 5)")
    parser.add_argument("--field", choices=["R", "C", "both"], default="both")
    parser.add_argument("--max-n", type=int, default=6, help="largest ambient dimension (default 6)")
    parser.add_argument("--max-k", type=int, default=3, help="largest subspace dimension (default 3)")
    parser.add_argument("--samples", type=int, help=f"oracle samples per face pair (default {settings.ORACLE_SAMPLES})")
    parser.add_argument("--keep-instances", action="store_true", help="embed instances of passing records too")
    parser.add_argument(
        "--fixture-dir",
        default=settings.DISAGREEMENT_DIR,
        help=f"where criterion/oracle disagreements are written (default {settings.DISAGREEMENT_DIR})",
    )
    parser.add_argument("--list", action="store_true", help="list the checks and exit")


def list_checks() -> str:
    rows = [f"{c.suite:<12} {c.name:<28} {c.tolerance:<8.0e} {c.anchor}" for c in suites.CHECKS.values()]
    return "\n".join(rows) + "\n"


def write_disagreements(report: Report, directory: str) -> List[Path]:
    """Store every failed criterion/oracle comparison as a Gram fixture."""
    failed = [
        r for r in report.records
        if r.name == "criterion_vs_oracle" and not r.passed and r.error is None and r.instance is not None
    ]
    if not failed:
        return []
    folder = Path(directory)
    written = []
    try:
        folder.mkdir(parents=True, exist_ok=True)
        for record in failed:
            path = folder / f"oracle_seed{report.seed}_trial{record.trial}.json"
            path.write_text(json.dumps(suites.disagreement_fixture(record), indent=2) + "\n")
            written.append(path)
    except OSError as exc:
        raise UsageError(f"cannot write fixtures to {directory}: {exc.strerror}") from exc
    for path in written:
        logger.warning("criterion and oracle disagree; fixture written to %s", path)
    return written


def run(args: argparse.Namespace) -> Outcome:
    if args.list:
        return Outcome(exit_code=0, text=list_checks())

    try:
        config = SuiteConfig(
            suite=args.suite,
            seed=args.seed,
            trials=args.trials,
            tol=args.tol,
            field=args.field,
            max_n=args.max_n,
            max_k=args.max_k,
            workers=args.workers,
            keep_instances=args.keep_instances,
            oracle_samples=args.samples,
        )
    except ValidationError as exc:
        raise UsageError(describe_validation_error(exc)) from exc

    report = suites.run_suite(config, args.command_line)
    logger.info("%d of %d records passed", report.total - report.failures, report.total)
    write_disagreements(report, args.fixture_dir)
    return Outcome(exit_code=0 if report.passed else 1, report=report)
