"""
Convexity of cyclic polyhedra of hyperplane segments in real hyperbolic 4-space.

Faces F_1..F_n lie on hyperplanes H_i orthogonal to positive poles p_i in
R^{4,1}; consecutive faces meet along the end slices E_i = F_i ^ F_{i+1}.
Everything is decided from the Gram matrix U of the poles through the
bracket determinants of its 2x2 and 3x3 submatrices.

Service functions take 0-based indices (read modulo n); condition records
report 1-based indices.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.config import settings
from grassgeo.core.errors import DegeneratePoint, InfeasibleGram, OutsideBall
from grassgeo.models.models import (
    ConditionRecord,
    ConditionStatus,
    ConvexityReport,
    Field,
    GramPolyhedron,
    GrassmannPoint,
    HermitianSpace,
    Membership,
    OracleResult,
    OracleVerdict,
    Realization,
    Verdict,
)
from grassgeo.services import hermitian


logger = logging.getLogger(__name__)

MINKOWSKI = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])

# Condition identifiers used in reports
POLE_POSITIVE = "pole_positive"
ADJACENT_MEET = "adjacent_meet"
TRIPLE_DISJOINT = "triple_disjoint"
DISJOINT_HYPERPLANES = "disjoint_hyperplanes"
ISOTROPIC_SIGN = "isotropic_sign"
SLICE_SIGNATURE = "slice_signature"
SLICE_ORDER = "slice_order"
SLICE_SPREAD = "slice_spread"


def _tol(tol: Optional[float]) -> float:
    return settings.CONVEXITY_TOL if tol is None else tol


# ============== Brackets ==============

def bracket2(U: GramPolyhedron, i1: int, i2: int, j1: int, j2: int) -> float:
    """<i1 i2, j1 j2>: determinant of the 2x2 Gram submatrix, indices modulo n."""
    n = U.n
    rows = [i1 % n, i2 % n]
    cols = [j1 % n, j2 % n]
    return float(np.linalg.det(U.U[np.ix_(rows, cols)]))


def bracket3(U: GramPolyhedron, i1: int, i2: int, i3: int, j1: int, j2: int, j3: int) -> float:
    """<i1 i2 i3, j1 j2 j3>: determinant of the 3x3 Gram submatrix, indices modulo n."""
    n = U.n
    rows = [i1 % n, i2 % n, i3 % n]
    cols = [j1 % n, j2 % n, j3 % n]
    return float(np.linalg.det(U.U[np.ix_(rows, cols)]))


def _strict(value: float, positive: bool, tol: float) -> ConditionStatus:
    """Status of ``value > 0`` (or ``< 0``) with the marginal band |value| <= tol."""
    if abs(value) <= tol:
        return ConditionStatus.MARGINAL
    if (value > 0) == positive:
        return ConditionStatus.PASS
    return ConditionStatus.FAIL


def _record(
    condition: str,
    indices: Tuple[int, ...],
    status: ConditionStatus,
    values: Dict[str, float],
    reason: Optional[str] = None,
) -> ConditionRecord:
    return ConditionRecord(
        condition=condition,
        indices=tuple(i + 1 for i in indices),
        status=status,
        values=values,
        reason=reason,
    )


# ============== Criterion ==============

def adjacency_conditions(U: GramPolyhedron, i: int, tol: Optional[float] = None) -> List[ConditionRecord]:
    """
    H_{i-1} meets H_i, and the end slices E_{i-1}, E_i are disjoint.

    Returns records for <(i-1)i,(i-1)i> > 0 and <(i-1)i(i+1),(i-1)i(i+1)> < 0.
    """
    tol = _tol(tol)
    n = U.n
    i = i % n
    prev, nxt = (i - 1) % n, (i + 1) % n
    pair = bracket2(U, prev, i, prev, i)
    triple = bracket3(U, prev, i, nxt, prev, i, nxt)
    return [
        _record(ADJACENT_MEET, (prev, i), _strict(pair, True, tol), {"pair": pair}),
        _record(TRIPLE_DISJOINT, (prev, i, nxt), _strict(triple, False, tol), {"triple": triple}),
    ]


def triple_condition(U: GramPolyhedron, i: int, j: int, tol: Optional[float] = None) -> ConditionRecord:
    """H_{i-1} ^ H_i ^ H_j is empty: <(i-1)ij,(i-1)ij> < 0."""
    tol = _tol(tol)
    n = U.n
    i, j = i % n, j % n
    prev = (i - 1) % n
    value = bracket3(U, prev, i, j, prev, i, j)
    return _record(TRIPLE_DISJOINT, (prev, i, j), _strict(value, False, tol), {"triple": value})


def nonadjacent_condition(U: GramPolyhedron, i: int, j: int, tol: Optional[float] = None) -> List[ConditionRecord]:
    """
    Records deciding F_i ^ H_j = empty for a non-neighbouring face index j.

    The case split follows s = <ij,ij>: disjoint hyperplanes when s < 0, a sign
    condition on the single isotropic point when s = 0, and otherwise the
    signature, slice-order and slice-spread inequalities.
    """
    tol = _tol(tol)
    n = U.n
    i, j = i % n, j % n
    prev, nxt = (i - 1) % n, (i + 1) % n
    indices = (i, j)

    s = bracket2(U, i, j, i, j)
    if s < -tol:
        return [_record(DISJOINT_HYPERPLANES, indices, ConditionStatus.PASS, {"s": s}, "DisjointHyperplanes")]

    A = bracket2(U, prev, i, i, nxt)
    D = bracket2(U, prev, i, i, j)
    C = bracket2(U, i, j, i, nxt)

    if abs(s) <= tol:
        value = D * A * C
        return [_record(ISOTROPIC_SIGN, indices, _strict(value, True, tol), {"s": s, "product": value})]

    records: List[ConditionRecord] = []
    left = bracket3(U, prev, i, j, prev, i, j)
    right = bracket3(U, i, nxt, j, i, nxt, j)
    records.append(_record(SLICE_SIGNATURE, (prev, i, j), _strict(left, False, tol), {"triple": left}))
    records.append(_record(SLICE_SIGNATURE, (i, nxt, j), _strict(right, False, tol), {"triple": right}))

    if abs(A) <= tol:
        records.append(_record(
            SLICE_ORDER, indices, ConditionStatus.INFEASIBLE, {"s": s, "A": A},
            "adjacent end slices are orthogonal: <(i-1)i,i(i+1)> vanishes",
        ))
    else:
        value = D * C / A - s
        records.append(_record(
            SLICE_ORDER, indices, _strict(value, True, tol), {"s": s, "A": A, "D": D, "C": C, "value": value}
        ))

    P1 = bracket2(U, prev, i, prev, i)
    P2 = bracket2(U, i, nxt, i, nxt)
    if P1 <= tol or P2 <= tol:
        records.append(_record(
            SLICE_SPREAD, indices, ConditionStatus.INFEASIBLE, {"P1": P1, "P2": P2},
            "adjacent hyperplanes do not meet",
        ))
    else:
        cross = bracket3(U, prev, i, j, i, nxt, j)
        value = abs(cross) / np.sqrt(P1 * P2) + max(left / P1, right / P2)
        status = ConditionStatus.PASS if value >= -tol else ConditionStatus.FAIL
        records.append(_record(SLICE_SPREAD, indices, status, {"cross": cross, "value": float(value)}))
    return records


def nonadjacent_pairs(n: int) -> List[Tuple[int, int]]:
    """All (i, j) with j not in {i-1, i, i+1} modulo n."""
    return [(i, j) for i in range(n) for j in range(n) if (j - i) % n not in (0, 1, n - 1)]


def convexity_check(U: GramPolyhedron, tol: Optional[float] = None) -> ConvexityReport:
    """
    Decide convexity of the polyhedron with pole Gram matrix U.

    Verdict is NotConvex if any record fails (marginal counts as a failure),
    otherwise Infeasible if some pair hit a vanishing denominator, otherwise Convex.
    """
    tol = _tol(tol)
    n = U.n
    records: List[ConditionRecord] = []

    for i in range(n):
        u = float(U.U[i, i])
        records.append(_record(POLE_POSITIVE, (i,), _strict(u, True, tol), {"u": u}))

    for i in range(n):
        records.extend(adjacency_conditions(U, i, tol))
        for j in range(n):
            if (j - i) % n in (0, n - 1, 1):
                continue
            records.append(triple_condition(U, i, j, tol))

    for i, j in nonadjacent_pairs(n):
        records.extend(nonadjacent_condition(U, i, j, tol))

    witnesses = [r for r in records if not r.passed]
    if any(r.status in (ConditionStatus.FAIL, ConditionStatus.MARGINAL) for r in witnesses):
        verdict = Verdict.NOT_CONVEX
    elif witnesses:
        verdict = Verdict.INFEASIBLE
    else:
        verdict = Verdict.CONVEX

    logger.debug("convexity of n=%d: %s with %d witnesses", n, verdict.value, len(witnesses))
    return ConvexityReport(
        verdict=verdict,
        records=records,
        witnesses=witnesses,
        strongly_convex=strong_convexity(U),
    )


def pair_passes(U: GramPolyhedron, i: int, j: int, tol: Optional[float] = None) -> bool:
    """Whether every record deciding F_i ^ H_j = empty passes for the 0-based pair (i, j)."""
    return all(r.passed for r in nonadjacent_condition(U, i, j, tol))


def normalize_gram(U: GramPolyhedron) -> GramPolyhedron:
    """
    Rescale the poles to unit self-pairing.

    Raises:
        InfeasibleGram: If some u_ii is not positive
    """
    diagonal = np.diag(U.U)
    if np.any(diagonal <= 0):
        bad = int(np.argmax(diagonal <= 0))
        raise InfeasibleGram(f"pole {bad + 1} is not positive (u_ii = {diagonal[bad]})")
    scale = 1.0 / np.sqrt(diagonal)
    normalized = U.U * np.outer(scale, scale)
    return GramPolyhedron((normalized + normalized.T) / 2)


def strong_convexity(U: GramPolyhedron) -> bool:
    """The pattern |u_{i(i+1)}| < 1 < |u_ij| for non-neighbouring j, after normalization."""
    try:
        V = normalize_gram(U).U
    except InfeasibleGram:
        return False
    n = U.n
    if any(abs(V[i, (i + 1) % n]) >= 1 for i in range(n)):
        return False
    return all(abs(V[i, j]) > 1 for i, j in nonadjacent_pairs(n))


# ============== Slice machinery ==============

def slice_quantities(U: GramPolyhedron, i: int, j: int) -> Tuple[float, float, float, float]:
    """
    Pairings v12, v13, v23 of the normalized projections q1, q2, q3 of
    p_{i-1}, p_{i+1}, p_j to p_i-perp, and sigma = sign v12, from brackets alone.

    Requires <ij,ij> > 0.
    """
    n = U.n
    i, j = i % n, j % n
    prev, nxt = (i - 1) % n, (i + 1) % n
    s = bracket2(U, i, j, i, j)
    P1 = bracket2(U, prev, i, prev, i)
    P2 = bracket2(U, i, nxt, i, nxt)
    if s <= 0 or P1 <= 0 or P2 <= 0:
        raise DegeneratePoint("slice quantities need <ij,ij>, <(i-1)i,(i-1)i> and <i(i+1),i(i+1)> positive")
    v12 = -bracket2(U, prev, i, i, nxt) / np.sqrt(P1 * P2)
    v23 = bracket2(U, i, nxt, i, j) / np.sqrt(P2 * s)
    v13 = -bracket2(U, prev, i, i, j) / np.sqrt(P1 * s)
    return float(v12), float(v13), float(v23), float(np.sign(v12))


def slice_vectors(realization: Realization, i: int, j: int) -> Tuple[NDArray, NDArray, NDArray]:
    """The projections q1, q2, q3 computed from explicit poles."""
    P = realization.points
    n = P.shape[0]
    i, j = i % n, j % n
    p_i = P[i]
    u_ii = realization.pairing(p_i, p_i)

    def project(x: NDArray) -> NDArray:
        q = u_ii * x - realization.pairing(x, p_i) * p_i
        return q / np.sqrt(realization.pairing(q, q))

    return project(P[(i - 1) % n]), project(P[(i + 1) % n]), project(P[j])


def slice_quadratic(v12: float, v13: float, v23: float, sigma: float) -> Tuple[float, float, float]:
    """Coefficients (a, b, c) of f(t) = t^2 a - 2 t b + c."""
    a = (v13 - sigma * v23) ** 2 + 2 * abs(v12) - 2
    b = v13 ** 2 - sigma * v13 * v23 + abs(v12) - 1
    c = v13 ** 2 - 1
    return a, b, c


def slice_quadratic_disjoint(U: GramPolyhedron, i: int, j: int, tol: Optional[float] = None) -> bool:
    """
    Sampling-free test of F_i ^ H_j = empty when <ij,ij> > 0.

    Span(q(t), q3) must have signature +- along the slice family q(t) =
    (1 - t) q1 + sigma t q2, i.e. f(t) > 0 on [0, 1].
    """
    tol = _tol(tol)
    v12, v13, v23, sigma = slice_quantities(U, i, j)
    if v13 ** 2 <= 1 or v23 ** 2 <= 1:
        return False
    a, b, c = slice_quadratic(v12, v13, v23, sigma)
    if 0 < b < a:
        minimum = c - b * b / a
    else:
        minimum = min(c, a - 2 * b + c)
    return bool(minimum > tol)


# ============== Realization and the geometric oracle ==============

def realize_gram(U: GramPolyhedron, tol: Optional[float] = None) -> Realization:
    """
    Factor U = P J P^T with J = diag(1,1,1,1,-1); row i of P is the pole p_{i+1}.

    Raises:
        InfeasibleGram: If some u_ii is not positive or the signature exceeds (4,1)
    """
    diagonal = np.diag(U.U)
    if np.any(diagonal <= 0):
        bad = int(np.argmax(diagonal <= 0))
        raise InfeasibleGram(f"pole {bad + 1} is not positive (u_ii = {diagonal[bad]})")

    eigenvalues, vectors = np.linalg.eigh(U.U)
    floor = max(_tol(tol), settings.EIGEN_RELATIVE_FLOOR) * max(1.0, float(np.abs(eigenvalues).max()))
    positive = np.flatnonzero(eigenvalues > floor)
    negative = np.flatnonzero(eigenvalues < -floor)
    if len(positive) > 4 or len(negative) > 1:
        raise InfeasibleGram(
            f"Gram matrix has signature ({len(positive)},{len(negative)}), "
            "which does not fit in R^(4,1)"
        )

    points = np.zeros((U.n, 5))
    points[:, :len(positive)] = vectors[:, positive] * np.sqrt(eigenvalues[positive])
    if len(negative):
        points[:, 4] = vectors[:, negative[0]] * np.sqrt(-eigenvalues[negative[0]])
    logger.debug("realized Gram matrix with rank %d", len(positive) + len(negative))
    return Realization(points=points, J=MINKOWSKI)


def realization_gram(realization: Realization) -> GramPolyhedron:
    P = realization.points
    G = P @ realization.J @ P.T
    return GramPolyhedron((G + G.T) / 2)


def _membership_products(realization: Realization, i: int, X: NDArray) -> Tuple[NDArray, NDArray]:
    """Products <(i-1)i,i(i+1)> <x,p_{i-1}> <p_{i+1},x> for the rows of X, with their scales."""
    P = realization.points
    n = P.shape[0]
    prev, nxt = P[(i - 1) % n], P[(i + 1) % n]
    A = bracket2(realization_gram(realization), i - 1, i, i, i + 1)
    JX = X @ realization.J
    products = A * (JX @ prev) * (JX @ nxt)
    scales = abs(A) * np.sum(X * X, axis=1) * np.linalg.norm(prev) * np.linalg.norm(nxt)
    return products, scales


def segment_membership(realization: Realization, i: int, x: NDArray, tol: Optional[float] = None) -> Membership:
    """
    Locate x relative to the face segment F_i on the hyperplane H_i.

    Raises:
        OutsideBall: If <x, x> > 0 beyond tolerance
    """
    tol = _tol(tol)
    x = np.asarray(x, dtype=np.float64)
    P = realization.points
    i = i % P.shape[0]
    size = float(x @ x)
    if realization.pairing(x, x) > tol * max(1.0, size):
        raise OutsideBall(f"point is not in the closed ball (<x,x> = {realization.pairing(x, x):.3e})")

    on_face = realization.pairing(x, P[i])
    if abs(on_face) > tol * max(1.0, np.sqrt(size) * np.linalg.norm(P[i])):
        return Membership.NOT_ON_FACE

    products, scales = _membership_products(realization, i, x[None, :])
    product, scale = float(products[0]), float(scales[0])
    if abs(product) <= tol * max(1.0, scale):
        return Membership.BOUNDARY
    return Membership.INSIDE if product > 0 else Membership.OUTSIDE


def _orthogonal_frame(realization: Realization, indices: Tuple[int, ...]) -> Tuple[NDArray, NDArray]:
    """Orthonormal frame of the orthogonal complement of the given poles, split by sign."""
    n = realization.points.shape[0]
    space = HermitianSpace(Field.REAL, realization.J)
    poles = GrassmannPoint(space, realization.points[[i % n for i in indices]].T)
    frame = hermitian.orthonormalize(hermitian.complement(poles))
    signs = hermitian.orthonormal_signs(frame)
    return frame.p[:, signs > 0], frame.p[:, signs < 0]


def hyperplane_frame(realization: Realization, i: int) -> Tuple[NDArray, NDArray]:
    """
    Orthonormal frame of p_i-perp: three positive vectors and one negative one.

    Returns:
        (positive, negative): a 5x3 matrix and a 5-vector
    """
    positive, negative = _orthogonal_frame(realization, (i,))
    if positive.shape[1] != 3 or negative.shape[1] != 1:
        raise InfeasibleGram(f"pole {i + 1} is not positive")
    return positive, negative[:, 0]


def slice_frame(
    realization: Realization, i: int, j: int, tol: Optional[float] = None
) -> Optional[Tuple[NDArray, NDArray]]:
    """
    Orthonormal frame of {p_i, p_j}-perp, or None when H_i ^ H_j misses the open ball.

    Returns:
        (positive, negative): a 5x2 matrix and a 5-vector
    """
    if bracket2(realization_gram(realization), i, j, i, j) <= _tol(tol):
        return None
    positive, negative = _orthogonal_frame(realization, (i, j))
    return positive, negative[:, 0]


def _ball_samples(rng: np.random.Generator, positive: NDArray, negative: NDArray, samples: int) -> NDArray:
    """Uniform samples of the unit ball spanned by ``positive``, lifted by the negative vector."""
    dim = positive.shape[1]
    directions = rng.standard_normal((samples, dim))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = rng.random(samples) ** (1.0 / dim)
    return negative[None, :] + (directions * radii[:, None]) @ positive.T


def oracle_face_disjoint(
    realization: Realization,
    i: int,
    j: int,
    samples: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
) -> OracleResult:
    """
    Monte Carlo test of F_i ^ H_j = empty.

    The first pass samples x = f + sum y_a e_a with y uniform in the unit 3-ball,
    where e_a, f is an orthonormal frame of p_i-perp; every such x is a negative
    point of H_i on one sheet. Among samples inside F_i, both signs of <x, p_j>
    mean H_j crosses the face.

    The second pass samples the disk H_i ^ H_j the same way. A sample inside F_i
    is a crossing. With no crossing, ``margin`` is the largest normalized
    membership product seen on the disk; within ORACLE_MARGIN of zero the face
    may still be reached by a sliver the samples missed.
    """
    tol = _tol(tol)
    samples = samples or settings.ORACLE_SAMPLES
    rng = rng or np.random.default_rng(0)
    n = realization.points.shape[0]
    i, j = i % n, j % n

    positive, negative = hyperplane_frame(realization, i)
    X = _ball_samples(rng, positive, negative, samples)
    products, scales = _membership_products(realization, i, X)
    members = X[products > tol * np.maximum(1.0, scales)]
    side = members @ realization.J @ realization.points[j]
    band = tol * np.maximum(1.0, np.linalg.norm(members, axis=1) * np.linalg.norm(realization.points[j]))
    pos = int(np.sum(side > band))
    neg = int(np.sum(side < -band))
    zero = len(members) - pos - neg

    crossings, margin = 0, None
    frame = slice_frame(realization, i, j, tol)
    if frame is not None:
        Y = _ball_samples(rng, frame[0], frame[1], samples)
        products, scales = _membership_products(realization, i, Y)
        crossings = int(np.sum(products > tol * np.maximum(1.0, scales)))
        margin = float(np.max(products / np.where(scales > 0, scales, 1.0)))

    if crossings:
        verdict = OracleVerdict.INTERSECTS
    elif len(members) < settings.ORACLE_MIN_MEMBERS:
        logger.warning("oracle for faces (%d,%d) found only %d members", i + 1, j + 1, len(members))
        verdict = OracleVerdict.INCONCLUSIVE
    elif (pos and neg) or zero:
        verdict = OracleVerdict.INTERSECTS
    elif margin is not None and margin > -settings.ORACLE_MARGIN:
        logger.info("oracle for faces (%d,%d): H_%d passes within %.2e of the face", i + 1, j + 1, j + 1, -margin)
        verdict = OracleVerdict.INCONCLUSIVE
    else:
        verdict = OracleVerdict.PROBABLY_DISJOINT
    return OracleResult(
        verdict=verdict,
        members=len(members),
        positive=pos,
        negative=neg,
        samples=samples,
        crossings=crossings,
        margin=margin,
    )
