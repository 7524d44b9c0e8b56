"""
Exception hierarchy shared by the services and the command line.

Every error carries a human readable ``detail`` and the process exit code
the command line reports for it.
"""
from typing import Optional, Tuple


class GrassGeoError(Exception):
    """Base class for all library errors."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# ============== Linear algebra ==============

class DimensionMismatch(GrassGeoError):
    """Shapes of the inputs do not agree."""


class NonHermitianForm(GrassGeoError):
    """A form matrix is not equal to its conjugate transpose."""

    def __init__(self, detail: str, entry: Optional[Tuple[int, int]] = None):
        super().__init__(detail)
        self.entry = entry


class DegenerateForm(GrassGeoError):
    """A hermitian matrix has an eigenvalue below the nondegeneracy floor."""


class DegeneratePoint(GrassGeoError):
    """The form restricted to a subspace is singular (or nearly so)."""


class BasePointMismatch(GrassGeoError):
    """Tangent vectors attached to different base points were combined."""


class NotTangent(GrassGeoError):
    """A matrix does not lie in Lin(p, p-perp)."""


class WedgeLimitExceeded(GrassGeoError):
    """The dense exterior power would exceed the configured dimension limit."""


class FiniteDifferenceError(GrassGeoError):
    """A finite-difference stencil hit a degenerate point twice."""


# ============== Geodesics ==============

class NotGeneric(GrassGeoError):
    """t*t admits no orthonormal basis of nonisotropic eigenvectors."""

    exit_code = 2


# ============== Hyperbolic polyhedra ==============

class InfeasibleGram(GrassGeoError):
    """A Gram matrix cannot be realized in signature (4,1)."""

    exit_code = 3


class OutsideBall(GrassGeoError):
    """A point is not in the closed ball of negative vectors."""


# ============== Command line ==============

class UsageError(GrassGeoError):
    """Malformed command line or configuration."""

    exit_code = 64
