"""
Shared fixtures: seeded generators, canonical spaces and the shipped JSON instances.
"""
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from grassgeo.models.models import Field, GrassmannPoint, HermitianSpace, Realization
from grassgeo.services import hyperconvex


FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(params=[Field.REAL, Field.COMPLEX], ids=["R", "C"])
def field(request) -> Field:
    return request.param


@pytest.fixture
def minkowski() -> HermitianSpace:
    return HermitianSpace(Field.REAL, hyperconvex.MINKOWSKI)


@pytest.fixture
def fixture_path() -> Callable[[str], Path]:
    return lambda name: FIXTURE_DIR / f"{name}.json"


def unit(n: int, *indices: int) -> np.ndarray:
    """Sum of standard basis vectors e_i, 1-based."""
    v = np.zeros(n)
    for i in indices:
        v[i - 1] = 1.0
    return v


def diagonal_point(signs, *columns) -> GrassmannPoint:
    space = HermitianSpace(Field.REAL, np.diag(np.asarray(signs, dtype=float)))
    return GrassmannPoint(space, np.column_stack(columns))


def wedge_poles(p3: np.ndarray) -> Realization:
    """
    Four poles e2, e1, (0,1.25,0,0,0.75), p3 in R^(4,1).

    Face 1 (0-based) sits on x1 = 0 between x2 = 0 and 1.25 x2 = 0.75 x5.
    """
    points = np.array([
        unit(5, 2),
        unit(5, 1),
        [0.0, 1.25, 0.0, 0.0, 0.75],
        p3,
    ])
    return Realization(points=points, J=hyperconvex.MINKOWSKI)


INTERSECTING_P3 = np.array([0.0, 1.125, 0.0, 0.0, 0.375])
DISJOINT_P3 = np.array([0.0, 1.375, 0.0, 0.0, 1.125])
