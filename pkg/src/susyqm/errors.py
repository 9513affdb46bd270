"""Exception and warning types shared across the package."""

from __future__ import annotations


class SusyqmError(Exception):
    """Base class for all library errors."""


class DomainError(SusyqmError, ValueError):
    """An argument lies outside the supported domain of an operation."""


class PoleError(DomainError):
    """A gamma/beta evaluation was requested at a pole."""


class ConvergenceError(SusyqmError, RuntimeError):
    """An iterative scheme hit its iteration cap before meeting tolerance."""


class UnsupportedFeatureError(SusyqmError, NotImplementedError):
    """Request for a documented but deliberately unsupported feature."""


class SingularTransformError(SusyqmError, ValueError):
    """The transform denominator has interior nodes; the partner potential
    would be singular.

    Attributes
    ----------
    nodes : tuple of float
        Radial positions (interval midpoints) of the detected sign changes.
    """

    def __init__(self, message: str, nodes: tuple[float, ...] = ()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class InadmissibleW0Error(SusyqmError, ValueError):
    """The requested integration constant lies outside the nodeless domain.

    Attributes
    ----------
    allowed : str
        Human-readable description of the admissible set.
    """

    def __init__(self, message: str, allowed: str = ""):
        super().__init__(message)
        self.allowed = allowed


class CancellationWarning(UserWarning):
    """An alternating series lost most of its significant digits."""


class NonNormalizableWarning(UserWarning):
    """A candidate eigenfunction's norm does not stabilize on the grid."""
