"""
Seeded random instances for the verification suites.

Per-trial seeds are derived from a master seed with splitmix64, so every
trial can be regenerated on its own from the seed stored in its record.
"""
import zlib
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.errors import DegeneratePoint
from grassgeo.models.models import Field, GrassmannPoint, HermitianSpace, TangentVector
from grassgeo.services import hermitian


MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

SPACE_COND_LIMIT = 10.0
POINT_COND_LIMIT = 100.0
POINT_ISOTROPY_LIMIT = 0.1
MAX_ATTEMPTS = 100


# ============== Seeds ==============

def splitmix64(state: int) -> Tuple[int, int]:
    """
    One splitmix64 step.

    Returns:
        (next_state, output)
    """
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def trial_seeds(seed: int, count: int, stream: str = "") -> List[int]:
    """
    Seeds of ``count`` trials for a master seed.

    The optional ``stream`` name (a check name) selects an independent sequence.
    """
    state = (seed ^ (zlib.crc32(stream.encode()) << 32)) & MASK64
    seeds = []
    for _ in range(count):
        state, output = splitmix64(state)
        seeds.append(output)
    return seeds


# ============== Matrices ==============

def random_matrix(rng: np.random.Generator, field: Field, rows: int, cols: int) -> NDArray:
    """Gaussian entries; complex entries are (N + iN)/sqrt(2)."""
    if field is Field.REAL:
        return rng.standard_normal((rows, cols))
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_endomorphism(rng: np.random.Generator, field: Field, n: int) -> NDArray:
    return random_matrix(rng, field, n, n)


def random_invertible(rng: np.random.Generator, field: Field, n: int, strength: float = 0.3) -> NDArray:
    """I + strength * N, redrawn until its condition number is below the space limit."""
    for _ in range(MAX_ATTEMPTS):
        S = np.eye(n) + strength * random_matrix(rng, field, n, n)
        if np.linalg.cond(S) <= SPACE_COND_LIMIT:
            return S
    raise DegeneratePoint("could not draw a well-conditioned invertible matrix")


def random_signs(rng: np.random.Generator, n: int, negatives: Optional[int] = None) -> NDArray:
    """A shuffled diagonal of +-1 with ``negatives`` minus signs (random count by default)."""
    if negatives is None:
        negatives = int(rng.integers(0, n + 1))
    signs = np.array([-1.0] * negatives + [1.0] * (n - negatives))
    rng.shuffle(signs)
    return signs


# ============== Spaces, points and tangents ==============

def random_space(
    rng: np.random.Generator, field: Field, n: int, negatives: Optional[int] = None
) -> Tuple[HermitianSpace, NDArray, NDArray]:
    """
    A random form J = S^H D S.

    Returns:
        (space, basis, signs): the columns of ``basis`` = S^-1 are form-orthonormal
        with self-pairings ``signs``
    """
    signs = random_signs(rng, n, negatives)
    S = random_invertible(rng, field, n)
    J = S.conj().T @ np.diag(signs) @ S
    J = (J + J.conj().T) / 2
    return HermitianSpace(field, J), np.linalg.inv(S), signs


def isotropy_ratio(point: GrassmannPoint) -> float:
    """
    Smallest |eigenvalue| of the form on a Euclidean-orthonormal basis of the
    subspace, relative to the smallest |eigenvalue| of J.

    Independent of the representative. At least 1 when J is definite, and 0 on
    degenerate subspaces.
    """
    q, _ = np.linalg.qr(point.p)
    restricted = np.abs(np.linalg.eigvalsh(hermitian.pairing_matrix(point.space, q, q)))
    return float(restricted.min() / np.abs(np.linalg.eigvalsh(point.space.J)).min())


def random_point(rng: np.random.Generator, space: HermitianSpace, k: int) -> GrassmannPoint:
    """
    A random nondegenerate k-subspace.

    Draws are rejected unless the Gram matrix has condition number at most
    POINT_COND_LIMIT and the subspace stays POINT_ISOTROPY_LIMIT away from
    isotropic directions (see ``isotropy_ratio``).

    Raises:
        DegeneratePoint: After 100 rejected draws
    """
    for _ in range(MAX_ATTEMPTS):
        point = GrassmannPoint(space, random_matrix(rng, space.field, space.n, k))
        eigenvalues = np.abs(np.linalg.eigvalsh(hermitian.gram(point)))
        if eigenvalues.min() == 0 or eigenvalues.max() / eigenvalues.min() > POINT_COND_LIMIT:
            continue
        if isotropy_ratio(point) >= POINT_ISOTROPY_LIMIT:
            return point
    raise DegeneratePoint(f"no nondegenerate {k}-subspace found in {MAX_ATTEMPTS} draws")


def random_tangent(rng: np.random.Generator, point: GrassmannPoint) -> TangentVector:
    return hermitian.tangent_component(point, random_endomorphism(rng, point.space.field, point.n))


def random_dimensions(
    rng: np.random.Generator, max_n: int, max_k: int, min_k: int = 1, codim: int = 1
) -> Tuple[int, int]:
    """Draw (n, k) with min_k <= k <= n - codim and n <= max_n, widening max_n when it is too small."""
    low = min_k + codim
    n = int(rng.integers(low, max(low, max_n) + 1))
    k = int(rng.integers(min_k, max(min_k, min(max_k, n - codim)) + 1))
    return n, k


# ============== Generic geodesic data ==============

def generic_tangent(
    rng: np.random.Generator, field: Field, n: int, k: int, euclidean: bool = False
) -> Tuple[HermitianSpace, NDArray, NDArray]:
    """
    A point and a tangent with a known spine structure.

    Each p_j is an orthonormal basis vector and t p_j = c_j w_j for a distinct
    basis vector w_j of the complement, so spines are spherical or hyperbolic
    according to the signs. With ``euclidean`` the last column moves along an
    isotropic sum w + w' of opposite-sign vectors. A random change of
    representative mixes the columns. Needs n >= 2k (+1 for the euclidean spine).

    Returns:
        (space, p, tau)
    """
    extra = 1 if euclidean else 0
    if n < 2 * k + extra:
        raise DegeneratePoint(f"generic instance needs n >= {2 * k + extra}, got n={n}")
    negatives = int(rng.integers(1 if euclidean else 0, n))
    space, basis, signs = random_space(rng, field, n, negatives)

    order = rng.permutation(n)
    if euclidean:
        # keep one opposite-sign pair of complement vectors for the isotropic direction
        last_neg = [a for a in order if signs[a] < 0][-1]
        last_pos = [a for a in order if signs[a] > 0][-1]
        order = np.array([a for a in order if a not in (last_neg, last_pos)] + [last_pos, last_neg])
    columns = order[:k]
    targets = order[k:2 * k] if not euclidean else list(order[k:2 * k - 1]) + [None]

    p = basis[:, columns]
    tau = np.zeros_like(p)
    for j, target in enumerate(targets):
        c = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        if target is None:
            tau[:, j] = c * (basis[:, order[-2]] + basis[:, order[-1]])
        else:
            tau[:, j] = c * basis[:, target]

    g = random_invertible(rng, field, k)
    return space, p @ g, tau @ g


# ============== Hyperbolic polyhedra ==============

def polygon_poles(rng: np.random.Generator, n: int, noise: float = 0.15) -> NDArray:
    """
    Positive unit poles in R^{4,1} around a regular polygon, perturbed.

    The unperturbed poles (R cos a, R sin a, 0, 0, h) with R^2 - h^2 = 1 meet
    their neighbours and span a space of signature (2,1); the noise moves
    them off it so that all parts of the criterion are exercised.

    Returns:
        NDArray: n x 5 matrix, row i is p_{i+1}
    """
    angles = 2 * np.pi * np.arange(n) / n + noise * rng.standard_normal(n)
    R = rng.uniform(1.05, 1.6)
    h = np.sqrt(R * R - 1)
    poles = np.zeros((n, 5))
    poles[:, 0] = R * np.cos(angles)
    poles[:, 1] = R * np.sin(angles)
    poles[:, 4] = h
    poles = poles + noise * rng.standard_normal((n, 5))

    J = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])
    norms = np.einsum("ia,ab,ib->i", poles, J, poles)
    for i in np.flatnonzero(norms <= 0.05):
        poles[i, :4] *= np.sqrt((poles[i, 4] ** 2 + 1.0) / np.sum(poles[i, :4] ** 2))
    norms = np.einsum("ia,ab,ib->i", poles, J, poles)
    return poles / np.sqrt(norms)[:, None]
