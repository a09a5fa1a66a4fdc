"""Exception types raised across the package."""


class GPTwinError(Exception):
    """Base class for all package errors."""


class ArgumentError(GPTwinError, ValueError):
    """An argument violates a documented precondition."""


class OverdampedError(GPTwinError, ValueError):
    """The evolved system is no longer underdamped, so no damped frequency exists."""


class SingularInversionError(GPTwinError, ArithmeticError):
    """A closed-form inversion is singular at the given measurement."""


class DomainError(GPTwinError, ArithmeticError):
    """An inversion received a measurement outside the model's range."""


class NotPositiveDefiniteError(GPTwinError, ArithmeticError):
    """Covariance matrix stayed indefinite after maximal jitter."""


class OptimizationFailedError(GPTwinError, RuntimeError):
    """Every optimizer start failed."""


class SelectionFailedError(GPTwinError, RuntimeError):
    """No candidate in the model pool could be fitted."""


class ConfigError(GPTwinError, ValueError):
    """Scenario configuration is invalid.

    ``errors`` holds every violation found, not only the first.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class PipelineError(GPTwinError, RuntimeError):
    """A scenario stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
