"""
Verification suites.

Each check draws a random instance from a seeded generator, evaluates a
relative residual and compares it with a tolerance. Instances are plain named
arrays, so a failing record can be replayed from its JSON alone.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.config import settings
from grassgeo.core.errors import GrassGeoError, UsageError
from grassgeo.models.models import (
    ConditionStatus,
    Field,
    GramPolyhedron,
    GrassmannPoint,
    HermitianSpace,
    Instance,
    OracleVerdict,
    Realization,
    TangentVector,
)
from grassgeo.schemas.schemas import CheckRecord, InstanceSchema, Report, ReplayResult, SuiteConfig
from grassgeo.services import exterior, geodesics, geometry, hermitian, hyperconvex, sampling


logger = logging.getLogger(__name__)

SUITES = ("embedding", "connection", "curvature", "einstein", "minimality", "geodesic", "brackets")
REPLAY_TOLERANCE = 1e-12

Outcome = Union[float, Tuple[float, Dict[str, float]]]
InstanceMaker = Callable[[np.random.Generator, SuiteConfig, Field], Instance]
Evaluator = Callable[[Instance], Outcome]


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    anchor: str
    tolerance: float
    make_instance: InstanceMaker
    evaluate: Evaluator


CHECKS: Dict[str, Check] = {}


def check(name: str, suite: str, anchor: str, tolerance: float, make: InstanceMaker):
    """Register an evaluator as a named check of a suite."""

    def register(evaluate: Evaluator) -> Evaluator:
        CHECKS[name] = Check(name, suite, anchor, tolerance, make, evaluate)
        return evaluate

    return register


def _rel(error: float, *scales: complex) -> float:
    return float(error) / (1.0 + float(sum(abs(s) for s in scales)))


def _norm(a: NDArray) -> float:
    return float(np.linalg.norm(a))


# ============== Instances ==============

def _unit(a: NDArray) -> NDArray:
    norm = np.linalg.norm(a)
    return a / norm if norm > 0 else a


def geometry_instance(
    rng: np.random.Generator,
    config: SuiteConfig,
    field: Field,
    tangents: int = 0,
    endomorphisms: int = 0,
    min_k: int = 1,
    max_k: Optional[int] = None,
    codim: int = 1,
    degree: Optional[str] = None,
) -> Instance:
    """
    A random space, point, unit tangents t1.. and endomorphisms A1..

    ``degree`` selects the Pluecker degree m: "any" (1..k), "two" (m = 2) or
    "from_two" (2..k).
    """
    n, k = sampling.random_dimensions(rng, config.max_n, max_k or config.max_k, min_k, codim)
    space, _, _ = sampling.random_space(rng, field, n)
    point = sampling.random_point(rng, space, k)

    arrays: Dict[str, NDArray] = {"J": space.J, "p": point.p}
    for a in range(1, tangents + 1):
        arrays[f"t{a}"] = _unit(sampling.random_tangent(rng, point).tau)
    for a in range(1, endomorphisms + 1):
        arrays[f"A{a}"] = sampling.random_endomorphism(rng, field, n) / np.sqrt(n)

    params: Dict[str, float] = {"n": n, "k": k}
    if degree == "any":
        params["m"] = int(rng.integers(1, k + 1))
    elif degree == "two":
        params["m"] = 2
    elif degree == "from_two":
        params["m"] = int(rng.integers(2, k + 1))
    return Instance(field, arrays, params)


def pairing_instance(rng: np.random.Generator, config: SuiteConfig, field: Field) -> Instance:
    """Geometry instance plus coefficients for wedges of p and of p-perp."""
    base = geometry_instance(rng, config, field, tangents=2, endomorphisms=2, codim=2, degree="any")
    n, k, m = base.param("n"), base.param("k"), base.param("m")
    arrays = dict(base.arrays)
    arrays["c"] = sampling.random_matrix(rng, field, k, m)
    arrays["d"] = sampling.random_matrix(rng, field, n - k, 2)
    return Instance(field, arrays, dict(base.params))


def trace_instance(rng: np.random.Generator, config: SuiteConfig, field: Field) -> Instance:
    base = geometry_instance(rng, config, field, degree="any")
    arrays = dict(base.arrays)
    arrays["F"] = sampling.random_matrix(rng, field, base.param("k"), base.param("k"))
    return Instance(field, arrays, dict(base.params))


def geodesic_instance(rng: np.random.Generator, config: SuiteConfig, field: Field) -> Instance:
    """A generic tangent with prescribed spines; a third of the draws include a euclidean spine."""
    k_cap = max(1, min(config.max_k, (config.max_n - 1) // 2))
    k = int(rng.integers(1, k_cap + 1))
    euclidean = bool(rng.random() < 1 / 3)
    low = 2 * k + (1 if euclidean else 0)
    n = int(rng.integers(low, max(low, config.max_n) + 1))
    space, p, tau = sampling.generic_tangent(rng, field, n, k, euclidean)
    params = {
        "n": n,
        "k": k,
        "euclidean": float(euclidean),
        "samples": 33,
        "smax": 1.0,
        "c": float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])),
        "s": float(rng.uniform(-1.0, 1.0)),
    }
    return Instance(field, {"J": space.J, "p": p, "t1": tau}, params)


def polyhedron_instance(rng: np.random.Generator, config: SuiteConfig, field: Field) -> Instance:
    """Perturbed polygon poles in R^{4,1}, n in 4..7; the field selection does not apply."""
    n = int(rng.integers(4, 8))
    arrays = {
        "poles": sampling.polygon_poles(rng, n),
        "scales": rng.uniform(0.5, 2.0, n),
    }
    params = {
        "n": n,
        "oracle_seed": float(rng.integers(0, 2**31)),
        "samples": float(config.oracle_samples or settings.ORACLE_SAMPLES),
        "shift": float(rng.integers(1, n)),
    }
    return Instance(Field.REAL, arrays, params)


def _space(instance: Instance) -> HermitianSpace:
    return HermitianSpace(instance.field, instance.array("J"))


def _point(instance: Instance) -> GrassmannPoint:
    return GrassmannPoint(_space(instance), instance.array("p"))


def _tangents(instance: Instance, point: GrassmannPoint, *names: str) -> List[TangentVector]:
    return [TangentVector(point, instance.array(name)) for name in names]


# ============== Embedding ==============

@check(
    "isometry_factor", "embedding",
    "the m-Pluecker embedding is isometric for the metric rescaled by C(k-1,m-1)",
    1e-9, partial(geometry_instance, tangents=2, degree="any"),
)
def isometry_factor(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2 = _tangents(instance, point, "t1", "t2")
    m = instance.param("m")
    image = exterior.plucker_image(point, m)
    lifted = geometry.metric(exterior.plucker_tangent(t1, m, image), exterior.plucker_tangent(t2, m, image))
    factor = exterior.isometry_factor(point.k, m)
    expected = factor * geometry.metric(t1, t2)
    return _rel(abs(lifted - expected), expected), {"factor": float(factor)}


@check(
    "compound_multiplicativity", "embedding",
    "compound matrices are multiplicative: C_m(AB) = C_m(A) C_m(B)",
    1e-10, partial(geometry_instance, endomorphisms=2, degree="any"),
)
def compound_multiplicativity(instance: Instance) -> Outcome:
    A1, A2 = instance.array("A1"), instance.array("A2")
    m = instance.param("m")
    C1, C2 = exterior.compound(A1, m), exterior.compound(A2, m)
    return _rel(_norm(exterior.compound(A1 @ A2, m) - C1 @ C2), _norm(C1) * _norm(C2))


@check(
    "plucker_gram", "embedding",
    "the Gram matrix of the Pluecker image is the compound of the Gram matrix",
    1e-10, partial(geometry_instance, degree="any"),
)
def plucker_gram(instance: Instance) -> Outcome:
    point = _point(instance)
    m = instance.param("m")
    expected = exterior.compound(hermitian.gram(point), m)
    image = exterior.plucker_image(point, m)
    return _rel(_norm(hermitian.gram(image) - expected), _norm(expected))


@check(
    "induced_form_pairing", "embedding",
    "the induced form pairs decomposable wedges by det <v_i, w_j>",
    1e-10, partial(geometry_instance, endomorphisms=1, degree="any"),
)
def induced_form_pairing(instance: Instance) -> Outcome:
    space = _space(instance)
    m = instance.param("m")
    vs = instance.array("p")[:, :m]
    ws = instance.array("A1")[:, :m]
    direct = exterior.wedge_inner(space, vs, ws)
    big = exterior.exterior_space(space, m)
    lifted = hermitian.inner(big, exterior.wedge_vector(vs), exterior.wedge_vector(ws))
    return _rel(abs(direct - lifted), direct)


@check(
    "adjoint_identity", "embedding",
    "the adjoint of a derivation extension is the extension of the adjoint",
    1e-10, partial(geometry_instance, tangents=1, degree="any"),
)
def adjoint_identity(instance: Instance) -> Outcome:
    point = _point(instance)
    (t,) = _tangents(instance, point, "t1")
    m = instance.param("m")
    T = hermitian.as_endomorphism(t)
    lhs = exterior.wedge_adjoint(point.space, exterior.derivation_extension(T, m)).M
    rhs = exterior.derivation_extension(hermitian.adjoint(point.space, T), m).M
    return _rel(_norm(lhs - rhs), _norm(rhs))


@check(
    "operator_product_identity", "embedding",
    "(E t1)* E t2 = E(t1* t2) on the m-th exterior power of p",
    1e-10, partial(geometry_instance, tangents=2, degree="any"),
)
def operator_product_identity(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2 = _tangents(instance, point, "t1", "t2")
    m = instance.param("m")
    image = exterior.plucker_image(point, m)
    T1, T2 = hermitian.as_endomorphism(t1), hermitian.as_endomorphism(t2)
    E1 = exterior.derivation_extension(T1, m).M
    E2 = exterior.derivation_extension(T2, m).M
    lhs = hermitian.adjoint(image.space, E1) @ E2 @ image.p
    rhs = exterior.derivation_extension(hermitian.adjoint(point.space, T1) @ T2, m).M @ image.p
    return _rel(_norm(lhs - rhs), _norm(rhs))


@check(
    "decomposition_orthogonal", "embedding",
    "V splits orthogonally as p + p-perp with projectors pi' and pi",
    1e-10, geometry_instance,
)
def decomposition_orthogonal(instance: Instance) -> Outcome:
    point = _point(instance)
    pi_prime, pi = hermitian.projectors(point)
    cross = hermitian.pairing_matrix(point.space, pi, pi_prime)
    idempotent = pi_prime @ pi_prime - pi_prime
    onto = pi_prime @ point.p - point.p
    return _rel(_norm(cross) + _norm(idempotent) + _norm(onto), _norm(pi_prime) ** 2)


@check(
    "adjoint_transfer", "embedding",
    "pairings of E t and B(t1,t2) images against p-perp wedges move t to the other side as t*",
    1e-9, pairing_instance,
)
def adjoint_transfer(instance: Instance) -> Outcome:
    point = _point(instance)
    space = point.space
    t1, t2 = _tangents(instance, point, "t1", "t2")
    m = instance.param("m")
    T = instance.array("A1")
    v = instance.array("A2")[:, :m]
    P = point.p @ instance.array("c")
    perp = hermitian.complement(point).p @ instance.array("d")
    q1, q2 = perp[:, 0], perp[:, 1]
    big = exterior.exterior_space(space, m)
    wedge_p = exterior.wedge_vector(P)

    def adj(A: NDArray) -> NDArray:
        return hermitian.adjoint(space, A)

    def against(x: NDArray, *columns: NDArray) -> complex:
        return hermitian.inner(big, x, exterior.wedge_vector(np.column_stack(columns)))

    lhs = against(exterior.derivation_extension(T, m).M @ wedge_p, q1, v[:, 1:])
    rhs = exterior.wedge_inner(space, P, np.column_stack([adj(T) @ q1, v[:, 1:]]))
    error, scale = abs(lhs - rhs), abs(rhs)

    if m >= 2:
        S1, S2 = hermitian.as_endomorphism(t1), hermitian.as_endomorphism(t2)
        lhs = against(exterior.bform(t1, t2, m).M @ wedge_p, q1, q2, v[:, 2:])
        rhs = exterior.wedge_inner(
            space, P, np.column_stack([adj(S1) @ q1, adj(S2) @ q2, v[:, 2:]])
        ) + exterior.wedge_inner(space, P, np.column_stack([adj(S2) @ q1, adj(S1) @ q2, v[:, 2:]]))
        error, scale = max(error, abs(lhs - rhs)), scale + abs(rhs)
    return _rel(error, scale)


@check(
    "derivation_lie", "embedding",
    "derivation extension respects commutators: E[A,B] = [E A, E B]",
    1e-10, partial(geometry_instance, endomorphisms=2, degree="any"),
)
def derivation_lie(instance: Instance) -> Outcome:
    A, B = instance.array("A1"), instance.array("A2")
    m = instance.param("m")
    EA = exterior.derivation_extension(A, m).M
    EB = exterior.derivation_extension(B, m).M
    bracket = exterior.derivation_extension(A @ B - B @ A, m).M
    return _rel(_norm(bracket - (EA @ EB - EB @ EA)), _norm(EA) * _norm(EB))


@check(
    "bilinear_identity", "embedding",
    "B(S,T) = E S E T - E(ST)",
    1e-10, partial(geometry_instance, endomorphisms=2, degree="any"),
)
def bilinear_identity(instance: Instance) -> Outcome:
    A, B = instance.array("A1"), instance.array("A2")
    m = instance.param("m")
    EA = exterior.derivation_extension(A, m).M
    EB = exterior.derivation_extension(B, m).M
    expected = EA @ EB - exterior.derivation_extension(A @ B, m).M
    return _rel(_norm(exterior.bilinear_extension(A, B, m).M - expected), _norm(EA) * _norm(EB))


@check(
    "trace_identity", "embedding",
    "tr E(phi) = C(k-1,m-1) tr phi on the m-th exterior power of a k-space",
    1e-10, trace_instance,
)
def trace_identity(instance: Instance) -> Outcome:
    F = instance.array("F")
    m, k = instance.param("m"), instance.param("k")
    expected = exterior.isometry_factor(k, m) * np.trace(F)
    return _rel(abs(np.trace(exterior.derivation_extension(F, m).M) - expected), expected)


# ============== Connection ==============

@check(
    "metric_compatibility", "connection",
    "the intrinsic connection is hermitian: d<X,Y> = <nabla X, Y> + <X, nabla Y>",
    1e-6, partial(geometry_instance, tangents=1, endomorphisms=2),
)
def metric_compatibility(instance: Instance) -> Outcome:
    point = _point(instance)
    (t,) = _tangents(instance, point, "t1")
    X = geometry.constant_field(instance.array("A1"))
    Y = geometry.constant_field(instance.array("A2"))

    def along(eps: float) -> NDArray:
        q = geometry.perturbed(t, eps)
        return np.array(geometry.metric(geometry.field_value(X, q), geometry.field_value(Y, q)))

    lhs = complex(geometry.derivative(along))
    rhs = geometry.metric(geometry.covariant_derivative(X, t), geometry.field_value(Y, point)) + geometry.metric(
        geometry.field_value(X, point), geometry.covariant_derivative(Y, t)
    )
    return _rel(abs(lhs - rhs), lhs)


@check(
    "second_fundamental_form", "connection",
    "the induced connection is intrinsic and B is the second fundamental form",
    1e-6, partial(geometry_instance, tangents=1, endomorphisms=1, degree="any"),
)
def second_fundamental_form(instance: Instance) -> Outcome:
    point = _point(instance)
    (t,) = _tangents(instance, point, "t1")
    A = instance.array("A1")
    result = geometry.second_fundamental_form_verify(point, t, geometry.constant_field(A), instance.param("m"))
    return _rel(result.residual, _norm(A) * _norm(t.tau))


@check(
    "sff_orthogonality", "connection",
    "B(t1,t2) is normal to the image of the embedding",
    1e-9, partial(geometry_instance, tangents=3, min_k=2, degree="from_two"),
)
def sff_orthogonality(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2, t3 = _tangents(instance, point, "t1", "t2", "t3")
    m = instance.param("m")
    image = exterior.plucker_image(point, m)
    normal = TangentVector(image, exterior.bform(t1, t2, m).M @ image.p)
    tangential = exterior.plucker_tangent(t3, m, image)
    return _rel(abs(geometry.metric(normal, tangential)), _norm(normal.tau) * _norm(tangential.tau))


# ============== Curvature ==============

def _gauss(instance: Instance) -> geometry.GaussResidual:
    point = _point(instance)
    t, t1, t2, w = _tangents(instance, point, "t1", "t2", "t3", "t4")
    return geometry.gauss_equation_verify(point, t, t1, t2, w, instance.param("m"))


@check(
    "gauss_equation", "curvature",
    "the curvature satisfies the Gauss equation of the 2-Pluecker embedding",
    1e-9, partial(geometry_instance, tangents=4, min_k=2, degree="two"),
)
def gauss_equation(instance: Instance) -> Outcome:
    result = _gauss(instance)
    return _rel(result.scalar_residual, result.lhs, result.rhs)


@check(
    "gauss_operator", "curvature",
    "(E w)* [B(t, t1*t2) + B(t2, t1*t)] = B(t1, w)* B(t2, t) on the exterior power of p",
    1e-9, partial(geometry_instance, tangents=4, min_k=2, degree="two"),
)
def gauss_operator(instance: Instance) -> Outcome:
    result = _gauss(instance)
    return _rel(result.operator_residual, result.operator_scale)


@check(
    "curvature_bianchi", "curvature",
    "first Bianchi identity R(t1,t2)t3 + R(t2,t3)t1 + R(t3,t1)t2 = 0",
    1e-9, partial(geometry_instance, tangents=3),
)
def curvature_bianchi(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2, t3 = _tangents(instance, point, "t1", "t2", "t3")
    first = geometry.curvature(t1, t2, t3)
    total = hermitian.combine(
        (1.0, first), (1.0, geometry.curvature(t2, t3, t1)), (1.0, geometry.curvature(t3, t1, t2))
    )
    return _rel(_norm(total.tau), _norm(first.tau))


@check(
    "curvature_symmetries", "curvature",
    "R(t1,t2) = -R(t2,t1) and Re<R(t1,t2)t3,t4> = -Re<R(t1,t2)t4,t3>",
    1e-9, partial(geometry_instance, tangents=4),
)
def curvature_symmetries(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2, t3, t4 = _tangents(instance, point, "t1", "t2", "t3", "t4")
    r12 = geometry.curvature(t1, t2, t3)
    antisymmetry = _norm(r12.tau + geometry.curvature(t2, t1, t3).tau)
    value = geometry.real_metric(r12, t4)
    skew = abs(value + geometry.real_metric(geometry.curvature(t1, t2, t4), t3))
    return _rel(antisymmetry + skew, _norm(r12.tau), value)


@check(
    "curvature_from_connection", "curvature",
    "closed-form curvature equals the connection commutator up to the documented sign",
    1e-4, partial(geometry_instance, tangents=3, max_k=1),
)
def curvature_from_connection(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2, t3 = _tangents(instance, point, "t1", "t2", "t3")
    closed = geometry.curvature(t1, t2, t3)
    numeric = geometry.curvature_from_connection(t1, t2, t3)
    return _rel(_norm(closed.tau - numeric.tau), _norm(closed.tau))


# ============== Einstein ==============

@check(
    "einstein", "einstein",
    "the grassmannian is Einstein with constant n - 2 over R and 2n over C",
    1e-9, partial(geometry_instance, tangents=2),
)
def einstein(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t = _tangents(instance, point, "t1", "t2")
    g = geometry.real_metric(t, t1)
    c = geometry.einstein_constant(instance.field, point.n)
    return _rel(abs(geometry.ricci(t1, t) - c * g), g), {"constant": float(c)}


@check(
    "ricci_symmetry", "einstein",
    "the Ricci tensor is symmetric",
    1e-9, partial(geometry_instance, tangents=2),
)
def ricci_symmetry(instance: Instance) -> Outcome:
    point = _point(instance)
    t1, t2 = _tangents(instance, point, "t1", "t2")
    value = geometry.ricci(t1, t2)
    return _rel(abs(value - geometry.ricci(t2, t1)), value)


# ============== Minimality ==============

def _basis_scale(point: GrassmannPoint) -> float:
    return max(_norm(hermitian.as_endomorphism(t)) ** 2 for t, _ in geometry.tangent_basis(point))


@check(
    "minimality", "minimality",
    "the Pluecker embedding is minimal: B(t_ij, t_ij) = 0 on the orthonormal basis",
    1e-12, partial(geometry_instance, min_k=2, degree="from_two"),
)
def minimality(instance: Instance) -> Outcome:
    point = _point(instance)
    result = geometry.minimality_verify(point, instance.param("m"))
    return _rel(result.max_residual, _basis_scale(point))


@check(
    "mean_curvature", "minimality",
    "the mean curvature trace sum eps B(t,t) vanishes",
    1e-12, partial(geometry_instance, min_k=2, degree="from_two"),
)
def mean_curvature(instance: Instance) -> Outcome:
    point = _point(instance)
    H = geometry.mean_curvature(point, instance.param("m"))
    scale = _basis_scale(point) * len(geometry.tangent_basis(point))
    return _rel(_norm(H), scale)


# ============== Geodesics ==============

def _geodesic(instance: Instance) -> Tuple[geodesics.GeodesicCurve, geodesics.GeodesicVerification]:
    point = _point(instance)
    (t,) = _tangents(instance, point, "t1")
    curve = geodesics.geodesic(point, t)
    verification = geodesics.geodesic_verify(
        curve, samples=instance.param("samples"), smax=float(instance.params["smax"])
    )
    return curve, verification


def _speed_scale(curve: geodesics.GeodesicCurve) -> float:
    return max([sp.speed ** 2 for sp in curve.spines] + [_norm(sp.v) ** 2 for sp in curve.spines])


@check(
    "geodesic_equation", "geodesic",
    "the assembled spine lifts solve the geodesic equation",
    1e-6, geodesic_instance,
)
def geodesic_equation(instance: Instance) -> Outcome:
    curve, verification = _geodesic(instance)
    return _rel(verification.residual, _speed_scale(curve))


@check(
    "speed_constancy", "geodesic",
    "geodesics have constant speed",
    1e-8, geodesic_instance,
)
def speed_constancy(instance: Instance) -> Outcome:
    curve, verification = _geodesic(instance)
    return _rel(verification.speed_defect, _speed_scale(curve))


@check(
    "uniform_lift", "geodesic",
    "spine lifts keep their self-pairing, move orthogonally and accelerate along themselves",
    1e-9, geodesic_instance,
)
def uniform_lift(instance: Instance) -> Outcome:
    curve, verification = _geodesic(instance)
    scale = max(_norm(sp.p) ** 2 + _norm(sp.v) ** 2 for sp in curve.spines)
    return _rel(verification.contract_defect, scale)


@check(
    "reparameterization", "geodesic",
    "the geodesic of (p, c t) at s is the geodesic of (p, t) at c s",
    1e-9, geodesic_instance,
)
def reparameterization(instance: Instance) -> Outcome:
    point = _point(instance)
    (t,) = _tangents(instance, point, "t1")
    c, s = float(instance.params["c"]), float(instance.params["s"])
    scaled = geodesics.geodesic(point, hermitian.scale(t, c))
    base = geodesics.geodesic(point, t)
    return hermitian.subspace_distance(scaled.point(s), base.point(c * s))


# ============== Brackets ==============

def _polyhedron(instance: Instance) -> Tuple[Realization, GramPolyhedron]:
    realization = Realization(points=instance.array("poles"), J=hyperconvex.MINKOWSKI)
    return realization, hyperconvex.realization_gram(realization)


def _slice_ready(U: GramPolyhedron, i: int, tol: float) -> bool:
    """Neighbouring hyperplanes of face i meet and its end slices are disjoint."""
    own = hyperconvex.adjacency_conditions(U, i, tol)
    following = hyperconvex.adjacency_conditions(U, i + 1, tol)[0]
    return all(r.passed for r in own) and following.passed


def _settled(records: List) -> bool:
    return not any(r.status in (ConditionStatus.MARGINAL, ConditionStatus.INFEASIBLE) for r in records)


@check(
    "bracket_plucker", "brackets",
    "brackets are induced-form pairings of the wedges p_i1 ^ p_i2 (^ p_i3)",
    1e-9, polyhedron_instance,
)
def bracket_plucker(instance: Instance) -> Outcome:
    realization, U = _polyhedron(instance)
    space = HermitianSpace(Field.REAL, realization.J)
    P = realization.points.T
    worst = 0.0
    for size, bracket in ((2, hyperconvex.bracket2), (3, hyperconvex.bracket3)):
        for rows in combinations(range(U.n), size):
            for cols in combinations(range(U.n), size):
                value = bracket(U, *rows, *cols)
                wedge = exterior.wedge_inner(space, P[:, list(rows)], P[:, list(cols)])
                worst = max(worst, _rel(abs(value - wedge), value))
    return worst


@check(
    "criterion_vs_slice", "brackets",
    "for intersecting hyperplanes the criterion agrees with positivity of the slice quadratic",
    0.0, polyhedron_instance,
)
def criterion_vs_slice(instance: Instance) -> Outcome:
    _, U = _polyhedron(instance)
    tol = settings.CONVEXITY_TOL
    compared = disagreements = 0
    for i, j in hyperconvex.nonadjacent_pairs(U.n):
        if not _slice_ready(U, i, tol) or hyperconvex.bracket2(U, i, j, i, j) <= tol:
            continue
        records = hyperconvex.nonadjacent_condition(U, i, j, tol)
        if not _settled(records):
            continue
        compared += 1
        criterion = all(r.passed for r in records)
        disagreements += int(criterion != hyperconvex.slice_quadratic_disjoint(U, i, j, tol))
    residual = disagreements / compared if compared else 0.0
    return residual, {"compared": float(compared), "disagreements": float(disagreements)}


@check(
    "criterion_vs_oracle", "brackets",
    "the criterion decides F_i ^ H_j = empty as the Monte Carlo oracle does",
    0.0, polyhedron_instance,
)
def criterion_vs_oracle(instance: Instance) -> Outcome:
    realization, U = _polyhedron(instance)
    tol = settings.CONVEXITY_TOL
    rng = np.random.default_rng(instance.param("oracle_seed"))
    compared = disagreements = inconclusive = 0
    for i, j in hyperconvex.nonadjacent_pairs(U.n):
        if not _slice_ready(U, i, tol):
            continue
        records = hyperconvex.nonadjacent_condition(U, i, j, tol)
        if not _settled(records):
            continue
        result = hyperconvex.oracle_face_disjoint(realization, i, j, instance.param("samples"), rng, tol)
        if result.verdict is OracleVerdict.INCONCLUSIVE:
            inconclusive += 1
            continue
        compared += 1
        criterion = all(r.passed for r in records)
        disagreements += int(criterion != (result.verdict is OracleVerdict.PROBABLY_DISJOINT))
    residual = disagreements / compared if compared else 0.0
    extra = {"compared": float(compared), "disagreements": float(disagreements), "inconclusive": float(inconclusive)}
    return residual, extra


def disagreement_fixture(record: CheckRecord) -> Dict[str, object]:
    """
    Gram input for a failed ``criterion_vs_oracle`` record, readable by the
    convexity command.

    Raises:
        UsageError: If the record carries no instance
    """
    if record.instance is None:
        raise UsageError(f"record {record.name} trial {record.trial} carries no instance")
    _, U = _polyhedron(record.instance.to_instance())
    return {
        "gram": U.U.tolist(),
        "check": record.name,
        "seed": record.seed,
        "trial": record.trial,
        "disagreements": int(record.params.get("disagreements", 0)),
    }


@check(
    "boundary_consistency", "brackets",
    "with <ij,ij> = 0 the slice-order inequality reduces to the isotropic-point sign condition",
    0.0, polyhedron_instance,
)
def boundary_consistency(instance: Instance) -> Outcome:
    _, U = _polyhedron(instance)
    tol = settings.CONVEXITY_TOL
    V = np.array(hyperconvex.normalize_gram(U).U)
    np.fill_diagonal(V, 1.0)
    compared = mismatches = 0
    for i, j in hyperconvex.nonadjacent_pairs(U.n):
        W = V.copy()
        W[i, j] = W[j, i] = 1.0 if W[i, j] >= 0 else -1.0
        poly = GramPolyhedron(W)
        (record,) = hyperconvex.nonadjacent_condition(poly, i, j, tol)
        A = hyperconvex.bracket2(poly, i - 1, i, i, i + 1)
        if abs(A) <= tol or record.status is ConditionStatus.MARGINAL:
            continue
        limit = hyperconvex.bracket2(poly, i - 1, i, i, j) * hyperconvex.bracket2(poly, i, j, i, i + 1) / A
        compared += 1
        mismatches += int(record.passed != (limit > 0))
    return mismatches / compared if compared else 0.0


@check(
    "scale_invariance", "brackets",
    "the verdict depends only on the poles up to positive rescaling",
    0.0, polyhedron_instance,
)
def scale_invariance(instance: Instance) -> Outcome:
    _, U = _polyhedron(instance)
    d = instance.array("scales").reshape(-1)
    scaled = GramPolyhedron(U.U * np.outer(d, d))
    before = hyperconvex.convexity_check(hyperconvex.normalize_gram(U)).verdict
    after = hyperconvex.convexity_check(hyperconvex.normalize_gram(scaled)).verdict
    return 0.0 if before is after else 1.0


@check(
    "cyclic_relabeling", "brackets",
    "the verdict is invariant under cyclic relabeling and orientation reversal of the faces",
    0.0, polyhedron_instance,
)
def cyclic_relabeling(instance: Instance) -> Outcome:
    _, U = _polyhedron(instance)
    order = np.roll(np.arange(U.n), instance.param("shift"))
    rotated = GramPolyhedron(U.U[np.ix_(order, order)])
    reversed_ = GramPolyhedron(np.ascontiguousarray(U.U[::-1, ::-1]))
    verdict = hyperconvex.convexity_check(U).verdict
    changed = sum(hyperconvex.convexity_check(V).verdict is not verdict for V in (rotated, reversed_))
    return float(changed)


# ============== Runner ==============

def checks_for(suite: str) -> List[Check]:
    """
    Checks of one suite, or of all suites in registry order.

    Raises:
        UsageError: If the suite name is unknown
    """
    if suite == "all":
        return list(CHECKS.values())
    if suite not in SUITES:
        raise UsageError(f"unknown suite '{suite}'; choose one of {', '.join(SUITES + ('all',))}")
    return [c for c in CHECKS.values() if c.suite == suite]


def _evaluate(chk: Check, instance: Instance) -> Tuple[float, Dict[str, float]]:
    outcome = chk.evaluate(instance)
    if isinstance(outcome, tuple):
        residual, extra = outcome
        return float(residual), dict(extra)
    return float(outcome), {}


def run_trial(chk: Check, config: SuiteConfig, field: Field, trial: int, seed: int) -> CheckRecord:
    """Draw one instance of a check and record its residual (or the error it raised)."""
    tolerance = config.tolerance(chk.name, chk.tolerance)
    rng = np.random.default_rng(seed)
    instance: Optional[Instance] = None
    common = dict(name=chk.name, suite=chk.suite, anchor=chk.anchor, trial=trial, seed=seed, tolerance=tolerance)
    try:
        instance = chk.make_instance(rng, config, field)
        residual, extra = _evaluate(chk, instance)
    except GrassGeoError as exc:
        logger.warning("check %s trial %d raised %s: %s", chk.name, trial, type(exc).__name__, exc.detail)
        return CheckRecord(
            **common,
            passed=False,
            params=dict(instance.params) if instance else {},
            instance=InstanceSchema.from_instance(instance) if instance else None,
            error=f"{type(exc).__name__}: {exc.detail}",
        )

    passed = bool(np.isfinite(residual) and residual <= tolerance)
    if not passed:
        logger.info("check %s trial %d failed: residual %.3e > %.1e", chk.name, trial, residual, tolerance)
    keep = config.keep_instances or not passed
    return CheckRecord(
        **common,
        residual=residual,
        passed=passed,
        params={**instance.params, **extra},
        instance=InstanceSchema.from_instance(instance) if keep else None,
    )


def run_suite(config: SuiteConfig, command: List[str]) -> Report:
    """
    Run every check of the configured suite for ``config.trials`` trials.

    Trial seeds come from splitmix64 streams per check, fields alternate over
    the selection, and records keep task order whatever the worker count.
    """
    started = time.perf_counter()
    fields = config.fields()
    tasks = []
    for chk in checks_for(config.suite):
        for trial, seed in enumerate(sampling.trial_seeds(config.seed, config.trials, chk.name)):
            tasks.append((chk, fields[trial % len(fields)], trial, seed))

    def work(task: Tuple[Check, Field, int, int]) -> CheckRecord:
        return run_trial(task[0], config, *task[1:])

    logger.debug("running %d tasks with %d workers", len(tasks), config.workers)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(work, tasks))
    else:
        records = [work(task) for task in tasks]

    return Report(
        command=command,
        suite=config.suite,
        seed=config.seed,
        trials=config.trials,
        records=records,
        elapsed_seconds=time.perf_counter() - started,
    )


def replay_record(record: CheckRecord) -> ReplayResult:
    """
    Recompute the residual of a stored record from its serialized instance.

    Raises:
        UsageError: If the record has no instance or names an unknown check
    """
    if record.instance is None:
        raise UsageError(f"record {record.name} (trial {record.trial}) carries no instance to replay")
    if record.name not in CHECKS:
        raise UsageError(f"unknown check '{record.name}'")
    residual, _ = _evaluate(CHECKS[record.name], record.instance.to_instance())
    stored = record.residual
    reproduced = stored is not None and abs(residual - stored) <= REPLAY_TOLERANCE * max(1.0, abs(stored))
    return ReplayResult(
        name=record.name,
        seed=record.seed,
        stored_residual=stored,
        residual=residual,
        tolerance=record.tolerance,
        passed=residual <= record.tolerance,
        reproduced=reproduced,
    )
