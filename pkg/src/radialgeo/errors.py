"""Exception types shared across the toolkit."""


class RadialGeoError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RadialGeoError):
    """Input lies outside the domain an operation is defined on."""


class ConstraintViolation(RadialGeoError):
    """A model parameter violates a declared constraint.

    The message names the violated constraint so callers can report it.
    """


class HypothesisError(RadialGeoError):
    """A check was invoked on data violating its standing hypotheses."""


class PreconditionError(RadialGeoError):
    """An operation precondition (regime, coverage, ordering) fails."""


class DegenerateProfileError(RadialGeoError):
    """A curvature profile degenerates (e.g. vanishing lower bound)."""


class IntegrationFailure(RadialGeoError):
    """ODE integration could not reach the requested endpoint."""

    def __init__(self, message: str, last_t: float | None = None):
        super().__init__(message)
        self.last_t = last_t


class ResolutionError(RadialGeoError):
    """Finite-difference step and quadrature tolerance are incompatible."""
