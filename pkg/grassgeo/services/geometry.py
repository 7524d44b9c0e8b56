"""
Pseudo-riemannian geometry of the nondegenerate grassmannian.

Tangent vectors are compared through the trace metric tr(t1* t2); the
intrinsic connection is evaluated by central finite differences of lifted
fields with one Richardson step.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from grassgeo.core.config import settings
from grassgeo.core.errors import DegeneratePoint, FiniteDifferenceError
from grassgeo.models.models import (
    Endomorphism,
    Field,
    GrassmannPoint,
    LiftedField,
    TangentVector,
    multi_index_basis,
)
from grassgeo.services import exterior, hermitian


logger = logging.getLogger(__name__)

MatrixFunction = Callable[[float], NDArray]


class CurveLike(Protocol):
    def tangent(self, s: float) -> TangentVector: ...

    def point(self, s: float) -> GrassmannPoint: ...


# ============== Metric and curvature ==============

def _star(ta: TangentVector, tb: TangentVector) -> NDArray:
    """Matrix of ta* tb on p in the basis of the representative: G^-1 tau_a^H J tau_b."""
    G = hermitian.checked_gram(ta.base)
    return np.linalg.solve(G, hermitian.pairing_matrix(ta.space, tb.tau, ta.tau))


def metric(t1: TangentVector, t2: TangentVector) -> Union[float, complex]:
    """
    Hermitian metric tr(t1* t2); its real part is the pseudo-riemannian metric.

    Raises:
        BasePointMismatch: If t1 and t2 live at different points
        DegeneratePoint: If the base point is degenerate
    """
    hermitian.same_base(t1, t2)
    return hermitian.field_scalar(t1.space, np.trace(_star(t1, t2)))


def real_metric(t1: TangentVector, t2: TangentVector) -> float:
    return float(np.real(metric(t1, t2)))


def curvature(t1: TangentVector, t2: TangentVector, t: TangentVector) -> TangentVector:
    """
    Closed-form curvature R(t1,t2)t = t t1*t2 + t2 t1*t - t t2*t1 - t1 t2*t.

    Evaluated on the representative: (t a*b) p = tau X_ab with X_ab = G^-1 tau_a^H J tau_b.
    """
    base = hermitian.same_base(t1, t2, t)
    tau = (
        t.tau @ _star(t1, t2)
        + t2.tau @ _star(t1, t)
        - t.tau @ _star(t2, t1)
        - t1.tau @ _star(t2, t)
    )
    return TangentVector(base, tau)


# ============== Finite differences ==============

def _central(f: MatrixFunction, h: float) -> NDArray:
    return (f(h) - f(-h)) / (2 * h)


def _richardson(f: MatrixFunction, h: float) -> NDArray:
    return (4 * _central(f, h / 2) - _central(f, h)) / 3


def derivative(f: MatrixFunction, h: Optional[float] = None) -> NDArray:
    """
    Derivative at 0 of a matrix-valued function: central differences with one
    Richardson step, retried once with h/10 when a perturbed point is degenerate.

    Raises:
        FiniteDifferenceError: If the step is out of range or both attempts fail
    """
    h = h or settings.FD_STEP
    if not 0 < h <= 1e-2:
        raise FiniteDifferenceError(f"finite-difference step {h} outside (0, 1e-2]")
    try:
        return _richardson(f, h)
    except DegeneratePoint:
        logger.warning("degenerate perturbed point at step %.1e, retrying with %.1e", h, h / 10)
    try:
        return _richardson(f, h / 10)
    except DegeneratePoint as exc:
        raise FiniteDifferenceError(f"perturbed points degenerate at steps {h} and {h / 10}") from exc


def perturbed(t: TangentVector, eps: float) -> GrassmannPoint:
    """The representative (1 + eps t) p = p + eps tau."""
    return GrassmannPoint(t.space, t.base.p + eps * t.tau)


def covariant_derivative(X: LiftedField, t: TangentVector, h: Optional[float] = None) -> TangentVector:
    """Intrinsic connection: tangent component at p of d/de X((1 + e t) p)."""
    D = derivative(lambda eps: X(perturbed(t, eps)), h)
    return hermitian.tangent_component(t.base, D)


def covariant_derivative_along(
    field_at: MatrixFunction, point: GrassmannPoint, h: Optional[float] = None
) -> TangentVector:
    """Covariant derivative of a field given along a curve through ``point`` at parameter 0."""
    return hermitian.tangent_component(point, derivative(field_at, h))


# ============== Lifted fields ==============

def constant_field(A: Endomorphism) -> LiftedField:
    """The lifted field q -> pi[q] A pi'[q]."""
    A = np.asarray(A)

    def field(q: GrassmannPoint) -> Endomorphism:
        pi_prime, pi = hermitian.projectors(q)
        return pi @ A @ pi_prime

    return field


def velocity_field(curve: CurveLike) -> MatrixFunction:
    """Velocity of a curve of representatives as an endomorphism, s -> T(s)."""
    return lambda s: hermitian.as_endomorphism(curve.tangent(s))


def field_value(X: LiftedField, point: GrassmannPoint) -> TangentVector:
    return hermitian.tangent_component(point, X(point))


def check_lifted(X: LiftedField, point: GrassmannPoint, g: NDArray) -> Tuple[float, float]:
    """
    Defects of the two lifted-field axioms at one point.

    Returns:
        (self_defect, representative_defect): ||X(p) - X(p)_p|| and ||X(pg) - X(p)||
    """
    value = X(point)
    pi_prime, pi = hermitian.projectors(point)
    self_defect = float(np.linalg.norm(value - pi @ value @ pi_prime))
    moved = X(GrassmannPoint(point.space, point.p @ g))
    return self_defect, float(np.linalg.norm(moved - value))


def connection_field(V: LiftedField, W: LiftedField, h: Optional[float] = None) -> LiftedField:
    """The lifted field q -> nabla_{V(q)} W at q, as an endomorphism."""

    def field(q: GrassmannPoint) -> Endomorphism:
        return hermitian.as_endomorphism(covariant_derivative(W, field_value(V, q), h))

    return field


def curvature_from_connection(
    t1: TangentVector, t2: TangentVector, t: TangentVector, h: Optional[float] = None
) -> TangentVector:
    """
    Curvature computed from the connection alone, scaled to match ``curvature``.

    Extends t1, t2, t to constant fields and evaluates
    nabla_1 nabla_2 X - nabla_2 nabla_1 X - nabla_[1,2] X by nested finite differences,
    then multiplies by ``settings.CURVATURE_SIGN``.
    """
    hermitian.same_base(t1, t2, t)
    inner_step = settings.FD_STEP
    outer_step = h or settings.NESTED_FD_STEP
    F1 = constant_field(hermitian.as_endomorphism(t1))
    F2 = constant_field(hermitian.as_endomorphism(t2))
    FX = constant_field(hermitian.as_endomorphism(t))

    first = covariant_derivative(connection_field(F2, FX, inner_step), t1, outer_step)
    second = covariant_derivative(connection_field(F1, FX, inner_step), t2, outer_step)
    bracket = hermitian.combine(
        (1.0, covariant_derivative(F2, t1, inner_step)),
        (-1.0, covariant_derivative(F1, t2, inner_step)),
    )
    third = covariant_derivative(FX, bracket, inner_step)
    value = hermitian.combine((1.0, first), (-1.0, second), (-1.0, third))
    return hermitian.scale(value, settings.CURVATURE_SIGN)


# ============== Tangent bases, Ricci and Einstein ==============

def tangent_basis(point: GrassmannPoint) -> List[Tuple[TangentVector, int]]:
    """
    Real basis of the tangent space, orthonormal with signs for the real metric.

    With orthonormal e_j in p and f_i in p-perp, t_ij sends e_j to f_i and the
    other e_l to 0; its sign is <f_i,f_i><e_j,e_j>. Over C the vectors i t_ij
    are added with the same signs.
    """
    if point.k == point.n:
        return []
    e = hermitian.orthonormalize(point)
    f = hermitian.orthonormalize(hermitian.complement(point))
    delta = hermitian.orthonormal_signs(e)
    eta = hermitian.orthonormal_signs(f)
    coefficients = hermitian.pairing_matrix(point.space, point.p, e.p)

    basis: List[Tuple[TangentVector, int]] = []
    for i in range(f.k):
        for j in range(e.k):
            tau = np.outer(f.p[:, i], delta[j] * coefficients[j, :])
            sign = int(eta[i] * delta[j])
            basis.append((TangentVector(point, tau), sign))
            if point.space.field is Field.COMPLEX:
                basis.append((TangentVector(point, 1j * tau), sign))
    return basis


def ricci(t1: TangentVector, t: TangentVector) -> float:
    """Real trace of t2 -> R(t1,t2)t over a signed orthonormal real basis."""
    base = hermitian.same_base(t1, t)
    total = 0.0
    for b, sign in tangent_basis(base):
        total += sign * real_metric(curvature(t1, b, t), b)
    return total


def einstein_constant(field: Field, n: int) -> int:
    """Ricci = c * Re tr(t* t1) with c = n - 2 over R and 2n over C."""
    return n - 2 if field is Field.REAL else 2 * n


# ============== Embedding verifiers ==============

@dataclass(frozen=True)
class GaussResidual:
    lhs: complex
    rhs: complex
    scalar_residual: float
    operator_residual: float
    operator_scale: float


def gauss_equation_verify(
    point: GrassmannPoint,
    t: TangentVector,
    t1: TangentVector,
    t2: TangentVector,
    w: TangentVector,
    m: int,
) -> GaussResidual:
    """
    Evaluate both sides of the Gauss equation of the m-Pluecker embedding.

    The scalar form pairs operators over the image of p with tr(A* B); the
    operator form compares (E w)* [B(t, t1*t2) + B(t2, t1*t)] with
    B(t1, w)* B(t2, t) on the image.
    """
    hermitian.same_base(t, t1, t2, w)
    space = point.space
    image = exterior.plucker_image(point, m)
    big = image.space

    T, T1, T2, W = (hermitian.as_endomorphism(x) for x in (t, t1, t2, w))

    def adj(A: NDArray) -> NDArray:
        return hermitian.adjoint(space, A)

    def B(S: NDArray, R: NDArray) -> NDArray:
        return exterior.bilinear_extension(S, R, m).M

    EW = exterior.derivation_extension(W, m).M
    first = B(T, adj(T1) @ T2) + B(T2, adj(T1) @ T)
    second = B(T, adj(T2) @ T1) + B(T1, adj(T2) @ T)
    lhs = exterior.operator_pairing(image, EW, first - second)
    rhs = exterior.operator_pairing(image, B(T1, W), B(T2, T)) - exterior.operator_pairing(
        image, B(T2, W), B(T1, T)
    )

    Q = image.p
    left = hermitian.adjoint(big, EW) @ first @ Q
    right = hermitian.adjoint(big, B(T1, W)) @ B(T2, T) @ Q
    return GaussResidual(
        lhs=lhs,
        rhs=rhs,
        scalar_residual=float(abs(lhs - rhs)),
        operator_residual=float(np.linalg.norm(left - right)),
        operator_scale=float(np.linalg.norm(right)),
    )


@dataclass(frozen=True)
class MinimalityResult:
    max_residual: float
    mean_curvature_norm: float


def mean_curvature(point: GrassmannPoint, m: int) -> NDArray:
    """Trace sum eps B(t, t) over the signed tangent basis."""
    size = multi_index_basis(point.n, m).size
    total = np.zeros((size, size), dtype=point.space.dtype)
    for t, sign in tangent_basis(point):
        total = total + sign * exterior.bform(t, t, m).M
    return total


def minimality_verify(point: GrassmannPoint, m: int) -> MinimalityResult:
    """Largest ||B(t_ij, t_ij)|| over the basis, with the mean-curvature norm alongside."""
    worst = 0.0
    for t, _ in tangent_basis(point):
        worst = max(worst, exterior.bform(t, t, m).norm())
    return MinimalityResult(
        max_residual=worst,
        mean_curvature_norm=float(np.linalg.norm(mean_curvature(point, m))),
    )


@dataclass(frozen=True)
class SecondFundamentalFormResult:
    residual: float
    orthogonality: float


def second_fundamental_form_verify(
    point: GrassmannPoint, t: TangentVector, X: LiftedField, m: int, h: Optional[float] = None
) -> SecondFundamentalFormResult:
    """
    Compare the ambient connection of the pushed-forward field with E(nabla_t X) + B(X(p), t).

    The ambient side differentiates q -> pi[Q] E(X(q)) pi'[Q], Q the Pluecker
    image of q, along the image of the curve p + e tau.
    """
    hermitian.same_base(t)
    image = exterior.plucker_image(point, m)

    def pushed(eps: float) -> NDArray:
        q = perturbed(t, eps)
        pi_prime, pi = hermitian.projectors(exterior.plucker_image(q, m))
        return pi @ exterior.derivation_extension(X(q), m).M @ pi_prime

    ambient = covariant_derivative_along(pushed, image, h)

    tangential = exterior.derivation_extension(
        hermitian.as_endomorphism(covariant_derivative(X, t, h)), m
    ).M @ image.p
    normal = exterior.bilinear_extension(X(point), hermitian.as_endomorphism(t), m).M @ image.p

    residual = float(np.linalg.norm(ambient.tau - tangential - normal))
    orthogonality = float(abs(metric(TangentVector(image, tangential), TangentVector(image, normal))))
    return SecondFundamentalFormResult(residual=residual, orthogonality=orthogonality)
