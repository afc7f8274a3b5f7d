"""Exception types shared across the package."""
from __future__ import annotations


class FunvolError(Exception):
    """Base class for all package errors."""


class SchemaError(FunvolError):
    """A JSON spec (weight, function, body, manifest) failed validation."""


class UnsupportedVariant(FunvolError):
    """The requested operation would leave the closed catalog; never silently approximated."""


class NotDifferentiable(FunvolError):
    """Gradient or Hessian requested at a point where the function is not smooth."""


class UnknownSingularity(FunvolError):
    """Singularity descriptor unavailable (inverse-transform chain without a certified flat region)."""


class MinimizerNotFound(FunvolError):
    """Numeric inner minimization failed to converge."""


class NonConvergedError(FunvolError):
    """Adaptive quadrature hit its depth/panel budget with the error still above tolerance.

    Carries the best available estimate so report-oriented callers can still
    surface a value together with its (too large) error.
    """

    def __init__(self, message: str, value: float = float("nan"),
                 error: float = float("inf"), evaluations: int = 0):
        super().__init__(message)
        self.value = value
        self.error = error
        self.evaluations = evaluations
