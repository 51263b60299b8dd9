"""Exception types raised across the solver."""


class ConicError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ConicError):
    """Problem data violates a structural invariant."""


class DimensionMismatch(ValidationError):
    pass


class NonSymmetricP(ValidationError):
    pass


class BadConeSpec(ValidationError):
    pass


class NonFiniteData(ValidationError):
    pass


class DomainError(ConicError):
    """A vector left the (strict) interior of its cone domain."""


class ScalingFailure(ConicError):
    """A scaling-block factorization failed; the interior point is numerically lost."""


class StepTooSmall(ConicError):
    """Line search collapsed below the minimum admissible step size."""


class FactorizationFailure(ConicError):
    """A pivot became exactly zero even after regularization."""


class PatternMismatch(ConicError):
    """New matrix values do not share the sparsity pattern established at setup."""


class DegenerateDenominator(ConicError):
    """The tau-step denominator is numerically zero."""


class LostInterior(ConicError):
    """An accepted step produced an iterate outside the cone interior."""
