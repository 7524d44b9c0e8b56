"""
`replay`: recompute stored residuals from their serialized instances.
"""
import argparse

from grassgeo.commands.commands import Outcome
from grassgeo.commands.deps import load_records
from grassgeo.core.errors import UsageError
from grassgeo.services.suites import replay_record


NAME = "replay"
HELP = "recompute the residual of a stored record"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("record", help="a record JSON, or a report JSON together with --index")
    parser.add_argument("--index", type=int, help="0-based record index when replaying from a report")


def run(args: argparse.Namespace) -> Outcome:
    records = load_records(args.record)
    if args.index is not None:
        if not 0 <= args.index < len(records):
            raise UsageError(f"--index {args.index} out of range for {len(records)} records")
        record = records[args.index]
    elif len(records) == 1:
        record = records[0]
    else:
        candidates = [r for r in records if r.instance is not None]
        if not candidates:
            raise UsageError(f"{args.record} holds no record with an embedded instance")
        record = candidates[0]

    result = replay_record(record)
    return Outcome(exit_code=0 if result.reproduced else 1, report=result)
