"""Numerical comparison-geometry toolkit for radial curvature profiles.

The package verifies, at desk scale, the machinery behind convexity at
infinity on negatively curved spaces: overflow-safe Jacobi/Riccati ODE
solves for radial curvature bounds, strict-convexity pinching checks,
the iterative convex-exhaustion construction with its angle budget,
rotationally symmetric geometry (geodesics, volumes, mass-ratio
monotonicity), a mollified angular extension with decay estimates, and
a spectral exhaustion solver for the asymptotic Dirichlet problem.
"""

__version__ = "0.1.0"

from .errors import (
    ConstraintViolation,
    DegenerateProfileError,
    DomainError,
    HypothesisError,
    IntegrationFailure,
    PreconditionError,
    RadialGeoError,
    ResolutionError,
)

__all__ = [
    "ConstraintViolation",
    "DegenerateProfileError",
    "DomainError",
    "HypothesisError",
    "IntegrationFailure",
    "PreconditionError",
    "RadialGeoError",
    "ResolutionError",
    "__version__",
]
