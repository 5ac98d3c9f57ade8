"""Exception taxonomy shared by all modules."""


class CsresError(Exception):
    """Base class for all package errors."""


class DomainError(CsresError):
    """Input outside the mathematical domain of the operation."""


class PoleError(CsresError):
    """Evaluation point within tolerance of a pole."""


class ConvergenceError(CsresError):
    """An infinite sum/product failed to satisfy the stopping rule."""


class AlgebraError(CsresError):
    """Invalid exact-arithmetic operation (e.g. inverting a non-unit)."""


class NumericalError(CsresError):
    """A numerical linear-algebra or quadrature step failed."""


class StokesRayError(NumericalError):
    """The Laplace ray passes too close to a Borel-plane singularity."""


class DegenerateError(CsresError):
    """Spectral-curve data requested at (or too near) a discriminant point."""


class ContourError(CsresError):
    """State-integral contour collides with the integrand's pole lattice."""


class IntegralityError(CsresError):
    """A Stokes constant came out non-integer at the working order."""


class UsageError(CsresError):
    """Malformed request (unknown identity id, bad CLI arguments, ...)."""


class UnsupportedModel(UsageError):
    """Operation not defined for the requested model."""
