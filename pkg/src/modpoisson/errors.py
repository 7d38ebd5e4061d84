"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can report
failures without parsing messages.
"""


class ModPoissonError(Exception):
    code = "E_GENERIC"


class InvalidArgument(ModPoissonError, ValueError):
    code = "E_INVALID_ARGUMENT"


class DomainError(ModPoissonError, ValueError):
    """Evaluation point outside the region where a series converges."""

    code = "E_DOMAIN"


class DivergenceError(DomainError):
    code = "E_DIVERGENCE"


class DecodeError(ModPoissonError, ValueError):
    code = "E_DECODE"


class UnsupportedStatistic(ModPoissonError, ValueError):
    code = "E_UNSUPPORTED"


class SingularityError(ModPoissonError, ValueError):
    code = "E_SINGULARITY"


class StripViolation(ModPoissonError, ValueError):
    code = "E_STRIP"


class NumericError(ModPoissonError, ArithmeticError):
    """Quadrature or iteration failed to converge; ``achieved`` holds the best tolerance."""

    code = "E_NUMERIC"

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(ModPoissonError, RuntimeError):
    """A configured cap was reached; ``best`` holds the best result obtained."""

    code = "E_RESOURCE"

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
