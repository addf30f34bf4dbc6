"""Exception types shared across the package.

Every numerical failure mode gets its own class so callers can react to
singular linear algebra differently from a stalled Newton iteration or a
point that left the domain where a chart or constraint makes sense.
"""


class NumericsError(Exception):
    """Base class for all numerical failures raised by this package."""


class SingularJacobian(NumericsError):
    """A linear solve met a pivot too small to trust."""


class NoConvergence(NumericsError):
    """An iteration ran out of allowed steps before meeting its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EvaluationError(NumericsError):
    """A user-supplied callable returned a non-finite value."""


class DomainError(NumericsError):
    """Inputs are outside the domain where an operation is defined."""


class OffManifold(NumericsError):
    """A point violates the constraint defining a submanifold."""


class StepFailure(NumericsError):
    """A time-stepping loop failed; carries the index of the bad step.

    ``partial`` holds the trajectory points computed before the failure
    so callers can keep what the run produced.
    """

    def __init__(self, message, step, cause=None, partial=None):
        super().__init__(message)
        self.step = step
        self.cause = cause
        self.partial = partial


class UnknownSystem(KeyError):
    """Requested name is not in the built-in system catalogue."""


class ConfigError(ValueError):
    """A run configuration that cannot be parsed or validated."""
