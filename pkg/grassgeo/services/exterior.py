"""
Exterior powers of V in the lexicographic multi-index basis.

Wedge coordinates of v_1 ^ ... ^ v_m are the m x m minors of [v_1 ... v_m];
an operator on the m-th exterior power is a dense C(n,m) x C(n,m) matrix.
"""
from math import comb
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.errors import DimensionMismatch
from grassgeo.models.models import (
    Endomorphism,
    GrassmannPoint,
    HermitianSpace,
    MultiIndexBasis,
    PluckerPoint,
    TangentVector,
    WedgeOperator,
    multi_index_basis,
)
from grassgeo.services import hermitian


def _sorted_with_sign(index: Tuple[int, ...]) -> Optional[Tuple[Tuple[int, ...], int]]:
    """Sort a multi-index, returning the permutation sign, or None on a repeat."""
    if len(set(index)) < len(index):
        return None
    items = list(index)
    sign = 1
    for a in range(len(items)):
        for b in range(len(items) - 1 - a):
            if items[b] > items[b + 1]:
                items[b], items[b + 1] = items[b + 1], items[b]
                sign = -sign
    return tuple(items), sign


def compound(A: NDArray, m: int) -> NDArray:
    """
    The m-th compound matrix: all m x m minors, rows and columns in lexicographic order.

    Args:
        A: An r x c matrix
        m: Degree, 0 <= m <= min(r, c)

    Returns:
        NDArray: C(r,m) x C(c,m) matrix of minors

    Raises:
        DimensionMismatch: If m is out of range
        WedgeLimitExceeded: If r exceeds the dense limit
    """
    A = np.asarray(A)
    r, c = A.shape
    if not 0 <= m <= min(r, c):
        raise DimensionMismatch(f"degree m={m} out of range for a {r}x{c} matrix")
    if m == 0:
        return np.ones((1, 1), dtype=A.dtype)
    rows = np.array(multi_index_basis(r, m).indices)
    cols = np.array(multi_index_basis(c, m).indices)
    blocks = A[rows[:, None, :, None], cols[None, :, None, :]]
    return np.linalg.det(blocks)


def wedge_vector(vectors: NDArray) -> NDArray:
    """Coordinates of v_1 ^ ... ^ v_m for the columns of an n x m matrix."""
    vectors = np.asarray(vectors)
    return compound(vectors, vectors.shape[1])[:, 0]


def induced_form(J: NDArray, m: int) -> NDArray:
    """
    Matrix of the induced form <v_1^...^v_m, w_1^...^w_m> = det <v_i, w_j>.

    In the same convention as J, the pairing of e_I with e_K sits at entry
    (K, I); the matrix is the m-th compound of J, made exactly hermitian.
    """
    J = np.asarray(J)
    if not 1 <= m <= J.shape[0]:
        raise DimensionMismatch(f"degree m={m} out of range for n={J.shape[0]}")
    C = compound(J, m)
    return (C + C.conj().T) / 2


def exterior_space(space: HermitianSpace, m: int) -> HermitianSpace:
    """The m-th exterior power of V with its induced form."""
    return HermitianSpace(space.field, induced_form(space.J, m))


def wedge_inner(space: HermitianSpace, vs: NDArray, ws: NDArray) -> complex:
    """
    Pairing of two decomposable wedges given by the columns of vs and ws.

    Raises:
        DimensionMismatch: If the two lists have different lengths
    """
    vs = np.asarray(vs)
    ws = np.asarray(ws)
    if vs.shape != ws.shape or vs.shape[0] != space.n:
        raise DimensionMismatch(f"wedge factors have shapes {vs.shape} and {ws.shape}")
    value = np.linalg.det(hermitian.pairing_matrix(space, vs, ws))
    return hermitian.field_scalar(space, value)


# ============== Pluecker map ==============

def plucker_point(point: GrassmannPoint, m: int) -> PluckerPoint:
    """Image of p under the m-Pluecker map: the compound matrix of p."""
    if not 1 <= m <= point.k:
        raise DimensionMismatch(f"degree m={m} out of range for k={point.k}")
    return PluckerPoint(multi_index_basis(point.n, m), compound(point.p, m))


def plucker_image(point: GrassmannPoint, m: int) -> GrassmannPoint:
    """The Pluecker image as a point of the grassmannian of the exterior power."""
    return GrassmannPoint(exterior_space(point.space, m), plucker_point(point, m).Q)


def plucker_tangent(t: TangentVector, m: int, image: Optional[GrassmannPoint] = None) -> TangentVector:
    """Differential of the Pluecker map: the derivation extension of t applied to the image."""
    image = image or plucker_image(t.base, m)
    T = hermitian.as_endomorphism(t)
    return TangentVector(image, derivation_extension(T, m).M @ image.p)


# ============== Operators on exterior powers ==============

def derivation_extension(T: Endomorphism, m: int) -> WedgeOperator:
    """
    Leibniz extension v_1^...^v_m -> sum_i v_1^...^T v_i^...^v_m.

    Column K holds the image of e_K, expanded basis vector by basis vector.
    """
    T = np.asarray(T)
    n = T.shape[0]
    basis = multi_index_basis(n, m)
    M = np.zeros((basis.size, basis.size), dtype=np.result_type(T.dtype, np.float64))

    for col, K in enumerate(basis.indices):
        for slot, k in enumerate(K):
            for r in range(n):
                if T[r, k] == 0:
                    continue
                target = _sorted_with_sign(K[:slot] + (r,) + K[slot + 1:])
                if target is None:
                    continue
                index, sign = target
                M[basis.position[index], col] += sign * T[r, k]
    return WedgeOperator(basis, M)


def bilinear_extension(S: Endomorphism, T: Endomorphism, m: int) -> WedgeOperator:
    """
    The symmetric operator v_1^...^v_m -> sum over i != j of S in slot i and T in slot j.

    Expanded directly from the double sum over slots.
    """
    S = np.asarray(S)
    T = np.asarray(T)
    n = S.shape[0]
    basis = multi_index_basis(n, m)
    M = np.zeros((basis.size, basis.size), dtype=np.result_type(S.dtype, T.dtype, np.float64))
    if m < 2:
        return WedgeOperator(basis, M)

    rows_s = [np.flatnonzero(S[:, k]) for k in range(n)]
    rows_t = [np.flatnonzero(T[:, k]) for k in range(n)]
    for col, K in enumerate(basis.indices):
        for i, ki in enumerate(K):
            for j, kj in enumerate(K):
                if i == j:
                    continue
                for r in rows_s[ki]:
                    for s in rows_t[kj]:
                        index = list(K)
                        index[i] = int(r)
                        index[j] = int(s)
                        target = _sorted_with_sign(tuple(index))
                        if target is None:
                            continue
                        position, sign = target
                        M[basis.position[position], col] += sign * S[r, ki] * T[s, kj]
    return WedgeOperator(basis, M)


def bform(t1: TangentVector, t2: TangentVector, m: int) -> WedgeOperator:
    """
    B(t1, t2), the second fundamental form of the m-Pluecker embedding.

    Raises:
        BasePointMismatch: If t1 and t2 live at different points
    """
    hermitian.same_base(t1, t2)
    return bilinear_extension(hermitian.as_endomorphism(t1), hermitian.as_endomorphism(t2), m)


def wedge_adjoint(space: HermitianSpace, operator: WedgeOperator) -> WedgeOperator:
    """Adjoint of a wedge operator under the induced form."""
    big = exterior_space(space, operator.basis.m)
    return WedgeOperator(operator.basis, hermitian.adjoint(big, operator.M))


def operator_pairing(image: GrassmannPoint, A: NDArray, B: NDArray) -> complex:
    """
    Trace pairing tr(A* B) of two operators compressed to the subspace ``image``.

    Computed as tr(G^-1 (A Q)^H J (B Q)) for the representative Q of the image.
    """
    A = A.M if isinstance(A, WedgeOperator) else np.asarray(A)
    B = B.M if isinstance(B, WedgeOperator) else np.asarray(B)
    Q = image.p
    G = hermitian.checked_gram(image)
    return complex(np.trace(np.linalg.solve(G, hermitian.pairing_matrix(image.space, B @ Q, A @ Q))))


def isometry_factor(k: int, m: int) -> int:
    """Factor C(k-1, m-1) by which the Pluecker embedding rescales the metric."""
    return comb(k - 1, m - 1)


def basis_labels(basis: MultiIndexBasis) -> Dict[str, int]:
    """1-based labels of the basis, e.g. {'12': 0, '13': 1, '23': 2}."""
    return {basis.label(i): i for i in range(basis.size)}
