"""
Indefinite hermitian linear algebra over R and C.

The form is <v, w> = w^H J v: linear in the first slot, conjugate-linear in
the second. Adjoints, projectors and Gram matrices all follow from it.
"""
import logging
from typing import List, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from grassgeo.core.config import settings
from grassgeo.core.errors import (
    BasePointMismatch,
    DegenerateForm,
    DegeneratePoint,
    DimensionMismatch,
)
from grassgeo.models.models import (
    Endomorphism,
    Field,
    GrassmannPoint,
    HermitianSpace,
    TangentVector,
)


logger = logging.getLogger(__name__)


def field_scalar(space: HermitianSpace, value: complex) -> Union[float, complex]:
    if space.field is Field.REAL:
        return float(np.real(value))
    return complex(value)


def _vector(space: HermitianSpace, v: NDArray) -> NDArray:
    v = np.asarray(v).reshape(-1)
    if v.shape[0] != space.n:
        raise DimensionMismatch(f"vector has dimension {v.shape[0]}, expected {space.n}")
    return v


def _operator(space: HermitianSpace, A: NDArray) -> NDArray:
    A = np.asarray(A)
    if A.shape != (space.n, space.n):
        raise DimensionMismatch(f"operator has shape {A.shape}, expected {(space.n, space.n)}")
    return A


# ============== Pairings ==============

def inner(space: HermitianSpace, v: NDArray, w: NDArray) -> Union[float, complex]:
    """
    Evaluate <v, w> = w^H J v.

    Args:
        space: Ambient space
        v: First argument (linear slot)
        w: Second argument (conjugate-linear slot)

    Returns:
        The pairing; a float over R, a complex number over C

    Raises:
        DimensionMismatch: If a vector does not have dimension n
    """
    v = _vector(space, v)
    w = _vector(space, w)
    return field_scalar(space, np.vdot(w, space.J @ v))


def pairing_matrix(space: HermitianSpace, a: NDArray, b: NDArray) -> NDArray:
    """Matrix of pairings b^H J a between the columns of two n-row matrices."""
    return np.asarray(b).conj().T @ space.J @ np.asarray(a)


def adjoint(space: HermitianSpace, A: Endomorphism) -> Endomorphism:
    """Return A* = J^-1 A^H J, the adjoint with <Av, w> = <v, A* w>."""
    A = _operator(space, A)
    return np.linalg.solve(space.J, A.conj().T @ space.J)


def gram(point: GrassmannPoint) -> NDArray:
    """Form-Gram matrix p^H J p of a representative."""
    return pairing_matrix(point.space, point.p, point.p)


def checked_gram(point: GrassmannPoint) -> NDArray:
    """
    Gram matrix of a nondegenerate point.

    Raises:
        DegeneratePoint: If the Gram matrix is singular within the configured floor
    """
    G = gram(point)
    eigenvalues = np.abs(np.linalg.eigvalsh(G))
    if eigenvalues.max() == 0 or eigenvalues.min() < settings.EIGEN_RELATIVE_FLOOR * eigenvalues.max():
        raise DegeneratePoint("form restricted to the subspace is singular")
    if eigenvalues.max() / eigenvalues.min() > settings.NONDEGENERACY_COND:
        raise DegeneratePoint(
            f"form restricted to the subspace is ill-conditioned "
            f"(cond {eigenvalues.max() / eigenvalues.min():.3e})"
        )
    return G


def signature(matrix: Union[HermitianSpace, NDArray]) -> Tuple[int, int]:
    """
    Count positive and negative eigenvalues of a hermitian matrix.

    Raises:
        DegenerateForm: If an eigenvalue is zero within the nondegeneracy floor
    """
    M = matrix.J if isinstance(matrix, HermitianSpace) else np.asarray(matrix)
    eigenvalues = np.linalg.eigvalsh(M)
    scale = np.abs(eigenvalues).max()
    if scale == 0 or np.abs(eigenvalues).min() <= settings.EIGEN_RELATIVE_FLOOR * scale:
        raise DegenerateForm("matrix is degenerate: an eigenvalue vanishes")
    return int(np.sum(eigenvalues > 0)), int(np.sum(eigenvalues < 0))


# ============== Projectors and tangent vectors ==============

def projectors(point: GrassmannPoint) -> Tuple[Endomorphism, Endomorphism]:
    """
    Orthogonal projectors of the decomposition V = p + p-perp.

    Returns:
        (pi_prime, pi): pi_prime = p G^-1 p^H J projects onto p and
        pi = 1 - pi_prime projects onto p-perp
    """
    G = checked_gram(point)
    p = point.p
    pi_prime = p @ np.linalg.solve(G, p.conj().T @ point.space.J)
    pi = np.eye(point.n, dtype=pi_prime.dtype) - pi_prime
    return pi_prime, pi


def tangent_component(point: GrassmannPoint, A: Endomorphism) -> TangentVector:
    """Tangent vector with tau = pi[p] A p, the component of A in Lin(p, p-perp)."""
    A = _operator(point.space, A)
    G = checked_gram(point)
    p = point.p
    Ap = A @ p
    tau = Ap - p @ np.linalg.solve(G, pairing_matrix(point.space, Ap, p))
    return TangentVector(point, tau)


def as_endomorphism(t: TangentVector) -> Endomorphism:
    """Embed t in Lin(V, V): T = tau G^-1 p^H J, so T p = tau and T vanishes on p-perp."""
    G = checked_gram(t.base)
    return t.tau @ np.linalg.solve(G, t.base.p.conj().T @ t.space.J)


def same_base(*tangents: TangentVector) -> GrassmannPoint:
    """
    Common base point of several tangent vectors.

    Raises:
        BasePointMismatch: If any two are attached to different points
    """
    base = tangents[0].base
    for t in tangents[1:]:
        if t.base is base:
            continue
        if t.base.space is not base.space or not np.array_equal(t.base.p, base.p):
            raise BasePointMismatch("tangent vectors are attached to different base points")
    return base


def scale(t: TangentVector, c: complex) -> TangentVector:
    return TangentVector(t.base, c * t.tau)


def combine(*terms: Tuple[complex, TangentVector]) -> TangentVector:
    """Linear combination sum c_i t_i of tangent vectors at one base point."""
    base = same_base(*(t for _, t in terms))
    tau = sum(c * t.tau for c, t in terms)
    return TangentVector(base, tau)


# ============== Bases ==============

def orthonormalize(point: GrassmannPoint) -> GrassmannPoint:
    """
    Form-orthonormal representative of the same subspace.

    Pivoted Gram-Schmidt: each step takes the remaining vector of largest
    |<v, v>|. When every remaining vector is isotropic, the pair with the
    largest |<v_a, v_b>| is combined into v_a + c v_b, which is not.

    Raises:
        DegeneratePoint: If no nonisotropic pivot exists
    """
    space = point.space
    remaining: List[NDArray] = [point.p[:, j].copy() for j in range(point.k)]
    basis: List[NDArray] = []
    signs: List[int] = []

    while remaining:
        norms = [np.linalg.norm(v) for v in remaining]
        threshold = settings.ISOTROPY_THRESHOLD * np.linalg.norm(space.J, 2) * max(norms) ** 2
        selfs = np.array([np.real(np.vdot(v, space.J @ v)) for v in remaining])
        index = int(np.argmax(np.abs(selfs)))

        if abs(selfs[index]) <= threshold:
            best, pair = 0.0, None
            for a in range(len(remaining)):
                for b in range(a + 1, len(remaining)):
                    z = np.vdot(remaining[b], space.J @ remaining[a])
                    if abs(z) > best:
                        best, pair = abs(z), (a, b, z)
            if pair is None or best <= threshold:
                raise DegeneratePoint("no nonisotropic pivot: the subspace is degenerate")
            a, b, z = pair
            c = z / abs(z)
            if space.field is Field.REAL:
                c = np.sign(np.real(z))
            logger.debug("isotropic pivots only, combining columns %d and %d", a, b)
            remaining[a] = remaining[a] + c * remaining[b]
            continue

        v = remaining.pop(index)
        sign = 1 if selfs[index] > 0 else -1
        v = v / np.sqrt(abs(selfs[index]))
        basis.append(v)
        signs.append(sign)
        remaining = [w - sign * np.vdot(v, space.J @ w) * v for w in remaining]

    return GrassmannPoint(space, np.column_stack(basis))


def orthonormal_signs(point: GrassmannPoint) -> NDArray:
    """Diagonal of the Gram matrix of an orthonormal representative (entries +-1)."""
    return np.sign(np.real(np.diag(gram(point)))).astype(int)


def complement(point: GrassmannPoint) -> GrassmannPoint:
    """
    A representative of p-perp, the null space of p^H J.

    Raises:
        DimensionMismatch: If p is the whole space
    """
    if point.k == point.n:
        raise DimensionMismatch("the orthogonal complement of the whole space is zero")
    basis = linalg.null_space(point.p.conj().T @ point.space.J)
    return GrassmannPoint(point.space, basis)


def subspace_distance(a: GrassmannPoint, b: GrassmannPoint) -> float:
    """Frobenius distance between the Euclidean orthogonal projectors onto the column spans."""
    qa = linalg.orth(a.p)
    qb = linalg.orth(b.p)
    return float(np.linalg.norm(qa @ qa.conj().T - qb @ qb.conj().T))


def same_subspace(a: GrassmannPoint, b: GrassmannPoint, tol: float = 1e-8) -> bool:
    if a.p.shape != b.p.shape:
        return False
    return subspace_distance(a, b) <= tol
