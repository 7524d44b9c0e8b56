from math import comb

import numpy as np
import pytest
from numpy.testing import assert_allclose

from grassgeo.core.errors import DimensionMismatch, WedgeLimitExceeded
from grassgeo.models.models import Field, HermitianSpace, multi_index_basis
from grassgeo.services import exterior, geometry, hermitian, sampling
from tests.conftest import unit


def test_basis_is_lexicographic():
    basis = multi_index_basis(4, 2)
    assert basis.indices == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert exterior.basis_labels(multi_index_basis(3, 2)) == {"12": 0, "13": 1, "23": 2}


def test_dense_limit_guard():
    with pytest.raises(WedgeLimitExceeded):
        multi_index_basis(13, 2)


def test_compound_of_degree_one_is_the_matrix(rng):
    A = rng.standard_normal((4, 3))
    assert_allclose(exterior.compound(A, 1), A)


def test_compound_is_multiplicative(rng, field):
    A = sampling.random_endomorphism(rng, field, 5)
    B = sampling.random_endomorphism(rng, field, 5)
    lhs = exterior.compound(A @ B, 2)
    assert_allclose(lhs, exterior.compound(A, 2) @ exterior.compound(B, 2), atol=1e-10)


def test_compound_rejects_large_degree():
    with pytest.raises(DimensionMismatch):
        exterior.compound(np.eye(3), 4)


# ============== Induced form ==============

def test_induced_form_of_identity():
    assert_allclose(exterior.induced_form(np.eye(4), 2), np.eye(6))


def test_induced_form_multiplies_diagonal_signs():
    assert_allclose(exterior.induced_form(np.diag([1.0, 1.0, -1.0]), 2), np.diag([1.0, -1.0, -1.0]))


def test_wedge_inner_of_orthonormal_pair():
    space = HermitianSpace(Field.REAL, np.eye(3))
    pair = np.column_stack([unit(3, 1), unit(3, 2)])
    assert exterior.wedge_inner(space, pair, pair) == pytest.approx(1.0)


def test_wedge_inner_matches_induced_form(rng, field):
    space, _, _ = sampling.random_space(rng, field, 5)
    vs = sampling.random_matrix(rng, field, 5, 3)
    ws = sampling.random_matrix(rng, field, 5, 3)
    big = exterior.exterior_space(space, 3)
    lifted = hermitian.inner(big, exterior.wedge_vector(vs), exterior.wedge_vector(ws))
    assert lifted == pytest.approx(exterior.wedge_inner(space, vs, ws), rel=1e-9)


def test_wedge_decomposition_is_orthogonal(rng, field):
    space, _, _ = sampling.random_space(rng, field, 6, negatives=2)
    point = sampling.random_point(rng, space, 3)
    p = point.p @ sampling.random_invertible(rng, field, 3)
    q = hermitian.complement(point).p
    m = 3
    G = exterior.induced_form(space.J, m)
    # wedges[i] lies in the summand with i factors from p-perp and m - i from p
    wedges = [exterior.wedge_vector(np.column_stack([q[:, :i], p[:, :m - i]])) for i in range(m + 1)]
    for a, wa in enumerate(wedges):
        assert abs(wa.conj() @ G @ wa) > 0
        for b, wb in enumerate(wedges):
            if a != b:
                scale = np.linalg.norm(wa) * np.linalg.norm(wb) * np.linalg.norm(G, 2)
                assert abs(wb.conj() @ G @ wa) <= 1e-10 * scale


# ============== Pluecker map ==============

def test_plucker_point_of_degree_one_is_p(rng, field):
    space, _, _ = sampling.random_space(rng, field, 4)
    point = sampling.random_point(rng, space, 2)
    assert_allclose(exterior.plucker_point(point, 1).Q, point.p)


def test_top_degree_gives_classical_coordinates(rng):
    space, _, _ = sampling.random_space(rng, Field.REAL, 4)
    point = sampling.random_point(rng, space, 2)
    Q = exterior.plucker_point(point, 2).Q
    assert Q.shape == (6, 1)
    p = point.p
    assert Q[1, 0] == pytest.approx(p[0, 0] * p[2, 1] - p[2, 0] * p[0, 1])


def test_plucker_image_stays_nondegenerate(rng, field):
    space, _, _ = sampling.random_space(rng, field, 5)
    point = sampling.random_point(rng, space, 3)
    G = hermitian.gram(point)
    image_gram = hermitian.gram(exterior.plucker_image(point, 2))
    assert np.linalg.det(image_gram) == pytest.approx(np.linalg.det(G) ** comb(2, 1), rel=1e-8)


# ============== Wedge operators ==============

def test_derivation_extension_of_degree_one(rng):
    T = rng.standard_normal((4, 4))
    assert_allclose(exterior.derivation_extension(T, 1).M, T)


def test_derivation_extension_of_identity():
    assert_allclose(exterior.derivation_extension(np.eye(5), 3).M, 3 * np.eye(10))


def test_derivation_extension_acts_by_leibniz_rule(rng, field):
    T = sampling.random_endomorphism(rng, field, 4)
    v = sampling.random_matrix(rng, field, 4, 2)
    expected = exterior.wedge_vector(np.column_stack([T @ v[:, 0], v[:, 1]])) + exterior.wedge_vector(
        np.column_stack([v[:, 0], T @ v[:, 1]])
    )
    assert_allclose(exterior.derivation_extension(T, 2).M @ exterior.wedge_vector(v), expected, atol=1e-12)


@pytest.mark.parametrize("k,m", [(2, 1), (3, 2), (4, 2), (4, 3)])
def test_trace_identity(rng, k, m):
    F = rng.standard_normal((k, k))
    traced = np.trace(exterior.derivation_extension(F, m).M)
    assert traced == pytest.approx(comb(k - 1, m - 1) * np.trace(F))


def test_bilinear_extension_of_degree_one_vanishes(rng):
    S, T = rng.standard_normal((2, 4, 4))
    assert not exterior.bilinear_extension(S, T, 1).M.any()


def test_bilinear_extension_on_decomposable_pair(rng, field):
    T = sampling.random_endomorphism(rng, field, 4)
    v = sampling.random_matrix(rng, field, 4, 2)
    lhs = exterior.bilinear_extension(T, T, 2).M @ exterior.wedge_vector(v)
    assert_allclose(lhs, 2 * exterior.wedge_vector(T @ v), atol=1e-12)


def test_bilinear_extension_from_products(rng, field):
    S = sampling.random_endomorphism(rng, field, 5)
    T = sampling.random_endomorphism(rng, field, 5)
    ES = exterior.derivation_extension(S, 3).M
    ET = exterior.derivation_extension(T, 3).M
    expected = ES @ ET - exterior.derivation_extension(S @ T, 3).M
    assert_allclose(exterior.bilinear_extension(S, T, 3).M, expected, atol=1e-10)


def test_adjoint_commutes_with_extension(rng, field):
    space, _, _ = sampling.random_space(rng, field, 5)
    point = sampling.random_point(rng, space, 2)
    T = hermitian.as_endomorphism(sampling.random_tangent(rng, point))
    lhs = exterior.wedge_adjoint(space, exterior.derivation_extension(T, 2)).M
    rhs = exterior.derivation_extension(hermitian.adjoint(space, T), 2).M
    assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.linalg.norm(rhs)))


@pytest.mark.parametrize("k,m", [(2, 1), (2, 2), (3, 2), (3, 3)])
def test_plucker_map_rescales_metric(rng, field, k, m):
    space, _, _ = sampling.random_space(rng, field, 5)
    point = sampling.random_point(rng, space, k)
    t1 = sampling.random_tangent(rng, point)
    t2 = sampling.random_tangent(rng, point)
    image = exterior.plucker_image(point, m)
    lifted = geometry.metric(exterior.plucker_tangent(t1, m, image), exterior.plucker_tangent(t2, m, image))
    expected = exterior.isometry_factor(k, m) * geometry.metric(t1, t2)
    assert abs(lifted - expected) <= 1e-9 * (1 + abs(expected))


def test_second_fundamental_form_vanishes_for_degree_one(rng):
    space, _, _ = sampling.random_space(rng, Field.REAL, 4)
    point = sampling.random_point(rng, space, 2)
    t = sampling.random_tangent(rng, point)
    assert not exterior.bform(t, t, 1).M.any()


def test_second_fundamental_form_is_normal(rng, field):
    space, _, _ = sampling.random_space(rng, field, 5)
    point = sampling.random_point(rng, space, 3)
    t1, t2, t3 = (sampling.random_tangent(rng, point) for _ in range(3))
    image = exterior.plucker_image(point, 2)
    normal = exterior.bform(t1, t2, 2).M @ image.p
    tangential = exterior.plucker_tangent(t3, 2, image).tau
    pairing = np.trace(np.linalg.solve(hermitian.gram(image), hermitian.pairing_matrix(image.space, tangential, normal)))
    assert abs(pairing) <= 1e-9 * (1 + np.linalg.norm(normal) * np.linalg.norm(tangential))
