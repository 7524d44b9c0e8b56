"""
`convexity`: decide convexity of a cyclic polyhedron from its pole Gram matrix.
"""
import argparse
import logging
import time
from typing import List, Optional

import numpy as np

from grassgeo.commands.commands import Outcome
from grassgeo.commands.deps import load_gram
from grassgeo.core.config import settings
from grassgeo.core.errors import UsageError
from grassgeo.models.models import GramPolyhedron, OracleVerdict, Verdict
from grassgeo.schemas.schemas import ConditionRecordSchema, ConvexityReportSchema, OracleSummary
from grassgeo.services import hyperconvex


NAME = "convexity"
HELP = "convexity criterion for a cyclic polyhedron in real hyperbolic 4-space"

EXIT_CODES = {Verdict.CONVEX: 0, Verdict.NOT_CONVEX: 2, Verdict.INFEASIBLE: 3}

logger = logging.getLogger(__name__)


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("gram", help='Gram JSON: {"gram": [[...]]}')
    parser.add_argument("--oracle", action="store_true", help="cross-check every face pair by Monte Carlo")
    parser.add_argument("--samples", type=int, default=settings.ORACLE_SAMPLES, help="oracle samples per pair")
    parser.add_argument("--report", help="write the report to this path")


def oracle_summaries(
    U: GramPolyhedron, samples: int, seed: int, tol: Optional[float]
) -> List[OracleSummary]:
    """
    Run the oracle on every non-neighbouring pair whose face segment is well defined.

    Raises:
        InfeasibleGram: If U cannot be realized in signature (4,1)
    """
    realization = hyperconvex.realize_gram(U, tol)
    rng = np.random.default_rng(seed)
    summaries = []
    for i, j in hyperconvex.nonadjacent_pairs(U.n):
        if not all(r.passed for r in hyperconvex.adjacency_conditions(U, i, tol)):
            logger.debug("skipping oracle for (%d,%d): neighbouring hyperplanes of face %d", i + 1, j + 1, i + 1)
            continue
        result = hyperconvex.oracle_face_disjoint(realization, i, j, samples, rng, tol)
        criterion = hyperconvex.pair_passes(U, i, j, tol)
        agrees = None
        if result.verdict is not OracleVerdict.INCONCLUSIVE:
            agrees = criterion == (result.verdict is OracleVerdict.PROBABLY_DISJOINT)
        summaries.append(OracleSummary(
            i=i + 1,
            j=j + 1,
            verdict=result.verdict.value,
            members=result.members,
            positive=result.positive,
            negative=result.negative,
            samples=result.samples,
            crossings=result.crossings,
            margin=result.margin,
            criterion_passed=criterion,
            agrees=agrees,
        ))
    return summaries


def run(args: argparse.Namespace) -> Outcome:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    started = time.perf_counter()
    U = load_gram(args.gram)
    tol = args.tol.get("*")

    result = hyperconvex.convexity_check(U, tol)
    oracle = oracle_summaries(U, args.samples, args.seed, tol) if args.oracle else []

    report = ConvexityReportSchema(
        command=args.command_line,
        n=U.n,
        verdict=result.verdict.value,
        strongly_convex=result.strongly_convex,
        records=[ConditionRecordSchema.from_record(r) for r in result.records],
        witnesses=[ConditionRecordSchema.from_record(r) for r in result.witnesses],
        oracle=oracle,
        elapsed_seconds=time.perf_counter() - started,
    )

    exit_code = EXIT_CODES[result.verdict]
    if any(summary.agrees is False for summary in oracle):
        logger.error("criterion and oracle disagree on %d pairs", sum(s.agrees is False for s in oracle))
        exit_code = 1
    elif exit_code == 0 and any(summary.agrees is None for summary in oracle):
        exit_code = 3
    return Outcome(exit_code=exit_code, report=report)
