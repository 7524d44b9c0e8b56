"""
`geodesic`: spine table, sampled curve and residuals for one point and tangent.
"""
import argparse
import time

import numpy as np

from grassgeo.commands.commands import Outcome
from grassgeo.commands.deps import load_point, load_tangent
from grassgeo.core.errors import UsageError
from grassgeo.schemas.schemas import GeodesicReport, SampleRow, SpineRow, encode_matrix, override_tolerance
from grassgeo.services import geodesics
from grassgeo.services.suites import CHECKS


NAME = "geodesic"
HELP = "closed-form geodesic through a point with a generic tangent"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("point", help="point JSON: {space: {field, n, J}, matrix}")
    parser.add_argument("tangent", help="tangent JSON: {matrix}")
    parser.add_argument("--smax", type=float, default=1.0, help="sample s in [-smax, smax] (default 1)")
    parser.add_argument("--samples", type=int, default=33, help="number of samples (default 33)")


def run(args: argparse.Namespace) -> Outcome:
    if args.samples < 2 or args.smax <= 0:
        raise UsageError("--samples must be at least 2 and --smax positive")
    started = time.perf_counter()
    point = load_point(args.point)
    t = load_tangent(args.tangent, point)

    curve = geodesics.geodesic(point, t)
    verification = geodesics.geodesic_verify(curve, samples=args.samples, smax=args.smax)

    scale = 1.0 + max(
        [speed ** 2 for speed in curve.speeds()] + [float(np.linalg.norm(sp.v)) ** 2 for sp in curve.spines]
    )
    tolerance = override_tolerance(args.tol, "geodesic_equation", CHECKS["geodesic_equation"].tolerance)
    speed_tolerance = override_tolerance(args.tol, "speed_constancy", CHECKS["speed_constancy"].tolerance)
    passed = verification.residual / scale <= tolerance and verification.speed_defect / scale <= speed_tolerance

    report = GeodesicReport(
        command=args.command_line,
        spines=[
            SpineRow(index=j + 1, lam=sp.lam, kind=sp.kind.value, speed=sp.speed, sign=sp.sign)
            for j, sp in enumerate(curve.spines)
        ],
        samples=[
            SampleRow(s=s, matrix=encode_matrix(curve.point(s).p)) for s in verification.parameters
        ],
        residual=verification.residual,
        speed_defect=verification.speed_defect,
        contract_defect=verification.contract_defect,
        tolerance=tolerance,
        passed=passed,
        notes=curve.notes(),
        elapsed_seconds=time.perf_counter() - started,
    )
    return Outcome(exit_code=0 if passed else 1, report=report)
