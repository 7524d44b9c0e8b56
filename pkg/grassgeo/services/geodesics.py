"""
Closed-form generic geodesics.

A tangent vector t at p is generic when the self-adjoint map t*t on p has a
form-orthonormal basis of nonisotropic eigenvectors p_j. Each p_j moves in the
plane spanned by p_j and v_j = t p_j along a spherical, hyperbolic or
euclidean lift, and the columns together give the geodesic.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.config import settings
from grassgeo.core.errors import BasePointMismatch, DegeneratePoint, NotGeneric
from grassgeo.models.models import (
    GrassmannPoint,
    Spine,
    SpineKind,
    TangentVector,
)
from grassgeo.services import geometry, hermitian


logger = logging.getLogger(__name__)

EUCLIDEAN_SPINE_NOTE = (
    "a euclidean spine is present: its column moves linearly and the speed "
    "reading sqrt|lambda| = 0 does not describe its motion"
)


# ============== Spines ==============

def _group(values: NDArray, tol: float) -> List[List[int]]:
    order = np.argsort(values)
    groups: List[List[int]] = []
    for index in order:
        if groups and abs(values[index] - values[groups[-1][-1]]) <= tol:
            groups[-1].append(int(index))
        else:
            groups.append([int(index)])
    return groups


def _eigenspace(M: NDArray, lam: float, size: int, magnitude: float) -> NDArray:
    """
    Basis of the lambda-eigenspace of M from its smallest right singular vectors.

    Real for real M.

    Raises:
        NotGeneric: If the eigenspace is smaller than the multiplicity
    """
    _, singular, vh = np.linalg.svd(M - lam * np.eye(M.shape[0]))
    if singular[-size] > np.sqrt(settings.EIGEN_REALNESS_TOL) * magnitude:
        raise NotGeneric("defective map: eigenvectors do not span p")
    return vh[-size:].conj().T


def spine_decomposition(t: TangentVector) -> List[Spine]:
    """
    Decompose t into spines via the k x k eigenproblem of G^-1 tau^H J tau.

    Returns:
        List[Spine]: One spine per column, in increasing order of lambda

    Raises:
        NotGeneric: On complex eigenvalues, a defective map or isotropic eigenvectors
    """
    point = t.base
    space = point.space
    G = hermitian.checked_gram(point)
    M = np.linalg.solve(G, hermitian.pairing_matrix(space, t.tau, t.tau))

    eigenvalues = np.linalg.eigvals(M)
    magnitude = max(1.0, float(np.abs(eigenvalues).max()))
    if np.abs(eigenvalues.imag).max() > settings.EIGEN_REALNESS_TOL * magnitude:
        logger.debug("t*t has complex eigenvalues %s", eigenvalues)
        raise NotGeneric("complex eigenvalues")

    T = hermitian.as_endomorphism(t)
    T_norm = float(np.linalg.norm(T))
    spines: List[Spine] = []
    for group in _group(eigenvalues.real, settings.EIGEN_REALNESS_TOL * magnitude):
        value = float(np.mean(eigenvalues.real[group]))
        columns = point.p @ _eigenspace(M, value, len(group), magnitude)
        try:
            eigenspace = hermitian.orthonormalize(GrassmannPoint(space, columns))
        except DegeneratePoint as exc:
            raise NotGeneric("isotropic eigenvectors") from exc

        for a in range(eigenspace.k):
            p_j = eigenspace.p[:, a]
            sign = 1 if np.real(hermitian.inner(space, p_j, p_j)) > 0 else -1
            v_j = T @ p_j
            lam = sign * float(np.real(hermitian.inner(space, v_j, v_j)))
            spines.append(Spine(p=p_j, v=v_j, lam=lam, kind=SpineKind.FIXED, sign=sign))

    # an isotropic v_j has lambda_j = 0 however large it is, so |v_j|^2 joins the scale
    largest = max(max(abs(s.lam), float(np.linalg.norm(s.v)) ** 2) for s in spines)
    classified = []
    for s in spines:
        if np.linalg.norm(s.v) <= settings.EIGEN_RELATIVE_FLOOR * T_norm * np.linalg.norm(s.p):
            kind = SpineKind.FIXED
        elif abs(s.lam) <= settings.EUCLIDEAN_RELATIVE_FLOOR * largest:
            kind = SpineKind.EUCLIDEAN
        elif s.lam > 0:
            kind = SpineKind.SPHERICAL
        else:
            kind = SpineKind.HYPERBOLIC
        classified.append(Spine(p=s.p, v=s.v, lam=s.lam, kind=kind, sign=s.sign))
    logger.debug("spine classes %s", [s.kind.value for s in classified])
    return classified


# ============== Lifts ==============

def lift(p: NDArray, v: NDArray, lam: float, kind: SpineKind, s: float, order: int = 0) -> NDArray:
    """
    Uniformly parameterized lift of one spine and its derivatives.

    Args:
        p: Eigenvector p_j
        v: t p_j
        lam: Eigenvalue lambda_j
        kind: Spine class
        s: Curve parameter
        order: 0 for the position, 1 for the velocity, 2 for the acceleration
    """
    if kind is SpineKind.FIXED:
        return p if order == 0 else np.zeros_like(p)
    if kind is SpineKind.EUCLIDEAN:
        return (p + s * v, v, np.zeros_like(p))[order]

    w = np.sqrt(abs(lam))
    if kind is SpineKind.SPHERICAL:
        c, sn = np.cos(w * s), np.sin(w * s)
        if order == 0:
            return c * p + sn * v / w
        if order == 1:
            return -w * sn * p + c * v
        return -lam * (c * p + sn * v / w)

    c, sn = np.cosh(w * s), np.sinh(w * s)
    if order == 0:
        return c * p + sn * v / w
    if order == 1:
        return w * sn * p + c * v
    return -lam * (c * p + sn * v / w)


@dataclass(frozen=True, eq=False)
class GeodesicCurve:
    """The geodesic through a base point with a given generic tangent."""
    base: GrassmannPoint
    tangent_at_base: TangentVector
    spines: List[Spine]

    def _columns(self, s: float, order: int) -> NDArray:
        return np.column_stack([lift(sp.p, sp.v, sp.lam, sp.kind, s, order) for sp in self.spines])

    def point(self, s: float) -> GrassmannPoint:
        return GrassmannPoint(self.base.space, self._columns(s, 0))

    def velocity(self, s: float) -> NDArray:
        return self._columns(s, 1)

    def acceleration(self, s: float) -> NDArray:
        return self._columns(s, 2)

    def tangent(self, s: float) -> TangentVector:
        """Velocity at s as a tangent vector at p(s)."""
        return TangentVector(self.point(s), self.velocity(s))

    def speeds(self) -> List[float]:
        return [sp.speed for sp in self.spines]

    def notes(self) -> List[str]:
        if any(sp.kind is SpineKind.EUCLIDEAN for sp in self.spines):
            return [EUCLIDEAN_SPINE_NOTE]
        return []


def geodesic(point: GrassmannPoint, t: TangentVector) -> GeodesicCurve:
    """
    Assemble the spine lifts into the geodesic through p with velocity t.

    Raises:
        NotGeneric: If t is not generic
        BasePointMismatch: If t is not attached to ``point``
    """
    if t.base is not point and (t.space is not point.space or not np.array_equal(t.base.p, point.p)):
        raise BasePointMismatch("tangent vector is not attached to the given point")
    return GeodesicCurve(base=point, tangent_at_base=t, spines=spine_decomposition(t))


# ============== Verification ==============

@dataclass(frozen=True)
class GeodesicVerification:
    residual: float
    speed_defect: float
    contract_defect: float
    parameters: List[float]


def lift_contract_defect(curve: GeodesicCurve, s: float) -> float:
    """
    Largest defect of the uniform-lift properties at s: constant self-pairing,
    velocity orthogonal to p(s), acceleration along p_j(s), and orthogonal spine planes.
    """
    space = curve.base.space
    worst = 0.0
    positions = curve._columns(s, 0)
    velocities = curve._columns(s, 1)
    accelerations = curve._columns(s, 2)
    for j, sp in enumerate(curve.spines):
        x, dx, ddx = positions[:, j], velocities[:, j], accelerations[:, j]
        self_pairing = hermitian.inner(space, x, x)
        worst = max(worst, abs(self_pairing - sp.sign))
        worst = max(worst, float(np.abs(hermitian.pairing_matrix(space, dx, positions)).max()))
        along = hermitian.inner(space, ddx, x) / self_pairing
        worst = max(worst, float(np.linalg.norm(ddx - along * x)))
        for l in range(j + 1, len(curve.spines)):
            block = hermitian.pairing_matrix(
                space, np.column_stack([x, dx]), np.column_stack([positions[:, l], velocities[:, l]])
            )
            worst = max(worst, float(np.abs(block).max()))
    return worst


def geodesic_verify(
    curve: GeodesicCurve, samples: int = 33, smax: float = 1.0, h: Optional[float] = None
) -> GeodesicVerification:
    """
    Check the geodesic equation and constant speed on an evenly sampled parameter range.

    The residual is the largest Frobenius norm of the covariant derivative of
    the velocity field along the curve over s in [-smax, smax].
    """
    velocity = geometry.velocity_field(curve)
    start = geometry.metric(curve.tangent(0.0), curve.tangent(0.0))
    parameters = [float(s) for s in np.linspace(-smax, smax, samples)]

    residual = speed_defect = contract_defect = 0.0
    for s in parameters:
        nabla = geometry.covariant_derivative_along(lambda u: velocity(s + u), curve.point(s), h)
        residual = max(residual, float(np.linalg.norm(nabla.tau)))
        speed = geometry.metric(curve.tangent(s), curve.tangent(s))
        speed_defect = max(speed_defect, float(abs(speed - start)))
        contract_defect = max(contract_defect, lift_contract_defect(curve, s))
    return GeodesicVerification(
        residual=residual,
        speed_defect=speed_defect,
        contract_defect=contract_defect,
        parameters=parameters,
    )
