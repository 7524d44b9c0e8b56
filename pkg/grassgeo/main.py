"""
grassgeo command line.

Numerical geometry of nondegenerate grassmannians and the convexity criterion
for cyclic hyperbolic polyhedra, with JSON input and machine-readable reports.

Exit codes: 0 pass, 1 verification failure, 2 domain rejection
(NotGeneric, NotConvex), 3 infeasible or inconclusive, 64 usage error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from grassgeo import __version__
from grassgeo.commands.commands import registry
from grassgeo.core.errors import GrassGeoError, UsageError
from grassgeo.core.logging import configure_logging
from grassgeo.schemas.schemas import dump_json


logger = logging.getLogger("grassgeo.main")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def parse_tolerances(values: List[str]) -> Dict[str, float]:
    """
    Parse repeated ``--tol`` values: ``VALUE`` sets the default for every
    check, ``NAME=VALUE`` overrides one check.
    """
    overrides: Dict[str, float] = {}
    for value in values:
        name, _, number = value.rpartition("=")
        try:
            tolerance = float(number)
        except ValueError as exc:
            raise UsageError(f"--tol expects VALUE or NAME=VALUE, got '{value}'") from exc
        if tolerance < 0:
            raise UsageError(f"--tol must not be negative, got '{value}'")
        overrides[name or "*"] = tolerance
    return overrides


def common_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--tol", action="append", default=[], metavar="[NAME=]VALUE", help="tolerance override")
    common.add_argument("--json-out", metavar="PATH", help="write the JSON report to PATH instead of stdout")
    common.add_argument("--workers", type=int, default=1, help="worker threads across trials (default 1)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true", help="log errors only")
    verbosity.add_argument("--verbose", action="store_true", help="log debug messages")
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="grassgeo", description=__doc__.split("\n\n")[1])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = common_options()
    for name, module in registry().items():
        sub = subparsers.add_parser(name, help=module.HELP, parents=[common])
        module.add_arguments(sub)
    return parser


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc
    logger.info("report written to %s", path)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        configure_logging("ERROR" if args.quiet else "DEBUG" if args.verbose else None)
        args.tol = parse_tolerances(args.tol)
        args.command_line = ["grassgeo", *argv]
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")

        outcome = registry()[args.command].run(args)

        if outcome.text is not None:
            sys.stdout.write(outcome.text)
        if outcome.report is not None:
            report_path = getattr(args, "report", None)
            text = dump_json(outcome.report)
            if report_path:
                write_output(text, report_path)
            if args.json_out or not report_path:
                write_output(text, args.json_out)
        return outcome.exit_code
    except GrassGeoError as exc:
        print(f"{type(exc).__name__}: {exc.detail}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
