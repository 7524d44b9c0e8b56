"""
Immutable domain value types.

All matrices are numpy arrays marked read-only on construction. Real spaces
store float64 entries, complex spaces complex128.
"""
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.config import settings
from grassgeo.core.errors import (
    DegenerateForm,
    DimensionMismatch,
    NonHermitianForm,
    NotTangent,
    WedgeLimitExceeded,
)


Matrix = NDArray
# An endomorphism of V is an n x n matrix acting on column vectors.
Endomorphism = NDArray


def _frozen(array: NDArray) -> NDArray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Field(str, Enum):
    """Scalar field of the ambient space."""
    REAL = "R"
    COMPLEX = "C"

    @property
    def dtype(self) -> type:
        return np.float64 if self is Field.REAL else np.complex128


# ============== Hermitian core ==============

@dataclass(frozen=True, eq=False)
class HermitianSpace:
    """The ambient space K^n with a nondegenerate hermitian form <v,w> = w^H J v."""
    field: Field
    J: Matrix

    def __post_init__(self) -> None:
        J = np.asarray(self.J)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] == 0:
            raise DimensionMismatch(f"form matrix must be square and nonempty, got shape {J.shape}")
        if self.field is Field.REAL:
            if np.iscomplexobj(J) and np.any(J.imag != 0):
                raise NonHermitianForm("real space requires a real form matrix")
            J = J.real.astype(np.float64)
        else:
            J = J.astype(np.complex128)

        defect = np.abs(J - J.conj().T)
        if np.any(defect > settings.HERMITIAN_TOLERANCE):
            a, b = np.unravel_index(int(np.argmax(defect)), defect.shape)
            raise NonHermitianForm(
                f"J is not hermitian: J[{a + 1},{b + 1}] != conj(J[{b + 1},{a + 1}])",
                entry=(int(a) + 1, int(b) + 1),
            )

        eigenvalues = np.abs(np.linalg.eigvalsh(J))
        if eigenvalues.min() <= settings.EIGEN_RELATIVE_FLOOR * eigenvalues.max():
            raise DegenerateForm("J is singular within the nondegeneracy floor")

        object.__setattr__(self, "J", _frozen(J))

    @property
    def n(self) -> int:
        return self.J.shape[0]

    @property
    def dtype(self) -> type:
        return self.field.dtype

    def __repr__(self) -> str:
        return f"<HermitianSpace(field={self.field.value}, n={self.n})>"


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """A full-rank n x k representative p of a k-subspace."""
    space: HermitianSpace
    p: Matrix

    def __post_init__(self) -> None:
        p = np.asarray(self.p)
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        if p.ndim != 2 or p.shape[0] != self.space.n:
            raise DimensionMismatch(
                f"representative must have {self.space.n} rows, got shape {p.shape}"
            )
        if p.shape[1] < 1 or p.shape[1] > self.space.n:
            raise DimensionMismatch(f"subspace dimension {p.shape[1]} out of range")
        if self.space.field is Field.REAL:
            if np.iscomplexobj(p) and np.any(np.abs(p.imag) > 0):
                raise DimensionMismatch("real space requires a real representative")
            p = p.real
        p = p.astype(self.space.dtype)

        singular = np.linalg.svd(p, compute_uv=False)
        if singular[-1] <= settings.EIGEN_RELATIVE_FLOOR * max(singular[0], 1.0):
            raise DimensionMismatch("representative is not of full column rank")

        object.__setattr__(self, "p", _frozen(p))

    @property
    def k(self) -> int:
        return self.p.shape[1]

    @property
    def n(self) -> int:
        return self.space.n

    def __repr__(self) -> str:
        return f"<GrassmannPoint(n={self.n}, k={self.k})>"


@dataclass(frozen=True, eq=False)
class TangentVector:
    """
    A tangent vector t in Lin(p, p-perp), stored as tau = t p.

    Column j of tau is the image of column j of the base representative.
    """
    base: GrassmannPoint
    tau: Matrix

    def __post_init__(self) -> None:
        tau = np.asarray(self.tau)
        if tau.ndim == 1:
            tau = tau.reshape(-1, 1)
        if tau.shape != self.base.p.shape:
            raise DimensionMismatch(
                f"tangent matrix must have shape {self.base.p.shape}, got {tau.shape}"
            )
        space = self.base.space
        if space.field is Field.REAL:
            tau = tau.real
        tau = tau.astype(space.dtype)

        p = self.base.p
        defect = np.linalg.norm(p.conj().T @ space.J @ tau)
        scale = np.linalg.norm(p) * np.linalg.norm(space.J) * max(np.linalg.norm(tau), 1.0)
        if defect > settings.ISOTROPY_THRESHOLD * scale:
            raise NotTangent(f"columns are not orthogonal to the base point (defect {defect:.3e})")

        object.__setattr__(self, "tau", _frozen(tau))

    @property
    def space(self) -> HermitianSpace:
        return self.base.space

    def __repr__(self) -> str:
        return f"<TangentVector(n={self.base.n}, k={self.base.k})>"


# A lifted field assigns to every representative near a base point an
# endomorphism of V. Implementations must be free of side effects.
LiftedField = Callable[[GrassmannPoint], Endomorphism]


# ============== Exterior algebra ==============

@dataclass(frozen=True)
class MultiIndexBasis:
    """Strictly increasing m-subsets of {0..n-1} in lexicographic order."""
    n: int
    m: int
    indices: Tuple[Tuple[int, ...], ...]
    position: Dict[Tuple[int, ...], int] = field(compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.indices)

    def label(self, position: int) -> str:
        """1-based label used in diagnostics, e.g. '13' for e1 ^ e3."""
        return "".join(str(i + 1) for i in self.indices[position])


def multi_index_basis(n: int, m: int) -> MultiIndexBasis:
    """Return the lexicographic basis of the m-th exterior power."""
    if n > settings.MAX_N:
        raise WedgeLimitExceeded(
            f"dense exterior powers are limited to n <= {settings.MAX_N} (got n={n}); "
            "raise GRASSGEO_MAX_N to override"
        )
    if not 0 <= m <= n:
        raise DimensionMismatch(f"degree m={m} out of range for n={n}")
    return _basis_table(n, m)


@lru_cache(maxsize=None)
def _basis_table(n: int, m: int) -> MultiIndexBasis:
    indices = tuple(combinations(range(n), m))
    return MultiIndexBasis(
        n=n,
        m=m,
        indices=indices,
        position={index: i for i, index in enumerate(indices)},
    )


@dataclass(frozen=True, eq=False)
class WedgeOperator:
    """A linear operator on the m-th exterior power in the multi-index basis."""
    basis: MultiIndexBasis
    M: Matrix

    def __post_init__(self) -> None:
        if self.M.shape != (self.basis.size, self.basis.size):
            raise DimensionMismatch(
                f"operator shape {self.M.shape} does not match basis size {self.basis.size}"
            )
        object.__setattr__(self, "M", _frozen(self.M))

    def norm(self) -> float:
        return float(np.linalg.norm(self.M))


@dataclass(frozen=True, eq=False)
class PluckerPoint:
    """The image of p under the m-Pluecker map: the matrix of m x m minors of p."""
    basis: MultiIndexBasis
    Q: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "Q", _frozen(self.Q))


# ============== Geodesics ==============

class SpineKind(str, Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    FIXED = "fixed"


@dataclass(frozen=True, eq=False)
class Spine:
    """One eigen-direction p_j of t*t together with v_j = t p_j."""
    p: NDArray
    v: NDArray
    lam: float
    kind: SpineKind
    sign: int  # <p_j, p_j> after normalization

    @property
    def speed(self) -> float:
        return float(np.sqrt(abs(self.lam)))


# ============== Hyperbolic polyhedra ==============

@dataclass(frozen=True, eq=False)
class GramPolyhedron:
    """Gram matrix U of the poles p_1..p_n; face indices are cyclic modulo n."""
    U: Matrix

    def __post_init__(self) -> None:
        U = np.asarray(self.U, dtype=np.float64)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise DimensionMismatch(f"Gram matrix must be square, got shape {U.shape}")
        if U.shape[0] < 3:
            raise DimensionMismatch("a cyclic polyhedron needs at least 3 faces")
        asymmetry = np.abs(U - U.T)
        if np.any(asymmetry > 0):
            a, b = np.unravel_index(int(np.argmax(asymmetry)), asymmetry.shape)
            raise NonHermitianForm(
                f"Gram matrix is not symmetric at ({a + 1},{b + 1})",
                entry=(int(a) + 1, int(b) + 1),
            )
        object.__setattr__(self, "U", _frozen(U))

    @property
    def n(self) -> int:
        return self.U.shape[0]


@dataclass(frozen=True, eq=False)
class Realization:
    """Explicit poles in R^{4,1}: row i of ``points`` is p_{i+1}."""
    points: Matrix
    J: Matrix

    def pairing(self, x: NDArray, y: NDArray) -> NDArray:
        return x @ self.J @ y


class Verdict(str, Enum):
    CONVEX = "Convex"
    NOT_CONVEX = "NotConvex"
    INFEASIBLE = "Infeasible"


class ConditionStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    MARGINAL = "marginal"
    INFEASIBLE = "infeasible"


class Membership(str, Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"
    NOT_ON_FACE = "NotOnFace"


class OracleVerdict(str, Enum):
    INTERSECTS = "Intersects"
    PROBABLY_DISJOINT = "ProbablyDisjoint"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ConditionRecord:
    """Outcome of one inequality of the convexity criterion."""
    condition: str
    indices: Tuple[int, ...]
    status: ConditionStatus
    values: Dict[str, float]
    reason: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status is ConditionStatus.PASS


@dataclass(frozen=True)
class ConvexityReport:
    verdict: Verdict
    records: List[ConditionRecord]
    witnesses: List[ConditionRecord]
    strongly_convex: bool


@dataclass(frozen=True)
class OracleResult:
    verdict: OracleVerdict
    members: int
    positive: int
    negative: int
    samples: int
    crossings: int = 0
    margin: Optional[float] = None


# ============== Verification ==============

@dataclass(frozen=True, eq=False)
class Instance:
    """A replayable random instance: named arrays plus scalar parameters."""
    field: Field
    arrays: Dict[str, NDArray]
    params: Dict[str, float]

    def array(self, name: str) -> NDArray:
        return self.arrays[name]

    def param(self, name: str) -> int:
        return int(self.params[name])
