"""Exception types shared across the package.

Each maps to a distinct failure mode so the CLI can translate them into
stable exit codes and tests can assert on the precise cause.
"""


class TorusLabError(Exception):
    """Base class for all package errors."""


class ConfigError(TorusLabError):
    """Malformed run configuration or input file."""


class MapValidationError(TorusLabError):
    """A map fails a structural requirement (degree, local diffeo, range)."""


class SingularMatrixError(TorusLabError):
    """A matrix that must be invertible is numerically singular."""


class NonConvergenceError(TorusLabError):
    """An iteration hit its cap before reaching the requested tolerance."""


class TangencyError(TorusLabError):
    """A line field is too uncertain (wide) to integrate reliably."""


class StepSizeError(TorusLabError):
    """Curve integration turned too sharply in one step to keep orientation."""


class PreconditionError(TorusLabError):
    """An operation was called on inputs that violate its contract."""
