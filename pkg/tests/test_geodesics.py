import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassgeo.core.errors import BasePointMismatch, NotGeneric
from grassgeo.models.models import Field, GrassmannPoint, SpineKind, TangentVector
from grassgeo.services import geodesics, geometry, hermitian, sampling
from tests.conftest import diagonal_point, unit


def _curve(point, tau):
    return geodesics.geodesic(point, TangentVector(point, tau))


# ============== Spine decomposition ==============

def test_zero_tangent_is_fixed():
    point = diagonal_point([1, 1, 1, -1], unit(4, 1), unit(4, 2))
    curve = _curve(point, np.zeros((4, 2)))
    assert [sp.kind for sp in curve.spines] == [SpineKind.FIXED, SpineKind.FIXED]
    assert_allclose(curve.point(0.8).p, curve.point(0.0).p)
    assert hermitian.same_subspace(curve.point(2.0), point)


def test_timelike_direction_is_hyperbolic():
    point = diagonal_point([1, -1, 1], unit(3, 1))
    (spine,) = _curve(point, unit(3, 2)).spines
    assert spine.kind is SpineKind.HYPERBOLIC
    assert spine.lam == pytest.approx(-1.0)
    assert spine.speed == pytest.approx(1.0)


def test_mixed_spines_are_sorted_by_eigenvalue():
    point = diagonal_point([1, 1, 1, -1], unit(4, 1), unit(4, 2))
    tau = np.column_stack([0.5 * unit(4, 3), 0.8 * unit(4, 4)])
    curve = _curve(point, tau)
    assert [sp.kind for sp in curve.spines] == [SpineKind.HYPERBOLIC, SpineKind.SPHERICAL]
    assert [sp.lam for sp in curve.spines] == pytest.approx([-0.64, 0.25])
    assert curve.notes() == []


def test_isotropic_velocity_is_euclidean():
    point = diagonal_point([1, 1, -1], unit(3, 1))
    curve = _curve(point, unit(3, 2, 3))
    (spine,) = curve.spines
    assert spine.kind is SpineKind.EUCLIDEAN
    assert spine.lam == 0.0
    assert curve.notes() == [geodesics.EUCLIDEAN_SPINE_NOTE]

    column = curve.point(0.7).p[:, 0]
    assert_allclose(column / column[0], [1.0, 0.7, 0.7])


def test_complex_eigenvalues_are_not_generic():
    point = diagonal_point([1, 1, -1, -1], unit(4, 1), unit(4, 3))
    tau = np.column_stack([unit(4, 2), unit(4, 2, 4)])
    with pytest.raises(NotGeneric, match="complex eigenvalues"):
        _curve(point, tau)


def test_defective_map_is_not_generic():
    # p spans a hyperbolic pair, so t*t can be a nilpotent Jordan block
    point = diagonal_point([1, -1, 1, 1], unit(4, 1, 2), unit(4, 1) - unit(4, 2))
    tau = np.column_stack([unit(4, 3), np.zeros(4)])
    with pytest.raises(NotGeneric, match="defective"):
        _curve(point, tau)


@pytest.mark.parametrize(
    "signs,directions,kind",
    [
        ([1, 1, 1, 1, -1], (3, 4), SpineKind.SPHERICAL),
        ([1, 1, 1, -1, -1], (4, 5), SpineKind.HYPERBOLIC),
    ],
)
def test_repeated_eigenvalue_ignores_eigenspace_basis(rng, signs, directions, kind):
    point = diagonal_point(signs, unit(5, 1), unit(5, 2))
    tau = 0.6 * np.column_stack([unit(5, d) for d in directions])
    curve = _curve(point, tau)
    assert [sp.kind for sp in curve.spines] == [kind, kind]
    assert curve.spines[0].lam == pytest.approx(curve.spines[1].lam)

    g = sampling.random_invertible(rng, Field.REAL, 2)
    other = _curve(GrassmannPoint(point.space, point.p @ g), tau @ g)
    assert [sp.lam for sp in other.spines] == pytest.approx([sp.lam for sp in curve.spines])
    for s in (-0.9, 0.4, 1.3):
        assert hermitian.subspace_distance(curve.point(s), other.point(s)) <= 1e-9


def test_definite_form_gives_spherical_spines(rng, field):
    space, _, _ = sampling.random_space(rng, field, 5, negatives=0)
    point = sampling.random_point(rng, space, 2)
    curve = geodesics.geodesic(point, sampling.random_tangent(rng, point))
    assert all(sp.kind is SpineKind.SPHERICAL for sp in curve.spines)


def test_tangent_must_sit_at_the_point(rng):
    space, _, _ = sampling.random_space(rng, Field.REAL, 4)
    point = sampling.random_point(rng, space, 1)
    other = sampling.random_point(rng, space, 1)
    with pytest.raises(BasePointMismatch):
        geodesics.geodesic(other, sampling.random_tangent(rng, point))


# ============== Lifts ==============

def test_lifts_agree_near_zero_eigenvalue():
    p = unit(3, 1)
    v = unit(3, 2)
    linear = geodesics.lift(p, v, 0.0, SpineKind.EUCLIDEAN, 1.0)
    for kind, lam in ((SpineKind.SPHERICAL, 1e-12), (SpineKind.HYPERBOLIC, -1e-12)):
        assert_allclose(geodesics.lift(p, v, lam, kind, 1.0), linear, atol=1e-10)
        assert_allclose(geodesics.lift(p, v, lam, kind, 1.0, order=1), v, atol=1e-10)


def test_spherical_lift_turns_a_quarter():
    lifted = geodesics.lift(unit(3, 1), 2 * unit(3, 2), 4.0, SpineKind.SPHERICAL, np.pi / 4)
    assert_allclose(lifted, unit(3, 2), atol=1e-15)


def test_hyperbolic_lift_accelerates_along_itself():
    p, v = unit(3, 1), unit(3, 2)
    position = geodesics.lift(p, v, -1.0, SpineKind.HYPERBOLIC, 0.5)
    acceleration = geodesics.lift(p, v, -1.0, SpineKind.HYPERBOLIC, 0.5, order=2)
    assert_allclose(acceleration, position)


# ============== Geodesic curves ==============

def test_curve_starts_at_base_point(rng, field):
    space, p, tau = sampling.generic_tangent(rng, field, 5, 2)
    point = GrassmannPoint(space, p)
    curve = _curve(point, tau)
    assert hermitian.same_subspace(curve.point(0.0), point)
    t = TangentVector(point, tau)
    start = curve.tangent(0.0)
    assert geometry.metric(start, start) == pytest.approx(geometry.metric(t, t), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("euclidean", [False, True])
def test_generic_geodesic_verifies(rng, field, euclidean):
    space, p, tau = sampling.generic_tangent(rng, field, 6, 2, euclidean)
    point = GrassmannPoint(space, p)
    curve = _curve(point, tau)
    verification = geodesics.geodesic_verify(curve, samples=9)
    scale = max([sp.speed ** 2 for sp in curve.spines] + [np.linalg.norm(sp.v) ** 2 for sp in curve.spines])
    assert verification.residual <= 1e-6 * (1 + scale)
    assert verification.speed_defect <= 1e-8 * (1 + scale)
    assert len(verification.parameters) == 9
    assert (SpineKind.EUCLIDEAN in [sp.kind for sp in curve.spines]) == euclidean


def test_mixed_geodesic_has_constant_speed():
    point = diagonal_point([1, 1, 1, -1], unit(4, 1), unit(4, 2))
    tau = np.column_stack([0.5 * unit(4, 3), 0.8 * unit(4, 4)])
    curve = _curve(point, tau)
    for s in (-1.0, 0.3, 2.5):
        assert geometry.metric(curve.tangent(s), curve.tangent(s)) == pytest.approx(-0.39)
    assert geodesics.lift_contract_defect(curve, 1.7) <= 1e-12


def test_reparameterized_geodesic(rng):
    space, p, tau = sampling.generic_tangent(rng, Field.REAL, 5, 2)
    point = GrassmannPoint(space, p)
    t = TangentVector(point, tau)
    scaled = geodesics.geodesic(point, hermitian.scale(t, -1.5))
    base = geodesics.geodesic(point, t)
    assert hermitian.subspace_distance(scaled.point(0.4), base.point(-0.6)) <= 1e-9
