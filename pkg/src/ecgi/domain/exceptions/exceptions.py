"""Domain exceptions."""

from typing import Any, Dict, Optional


class DomainException(Exception):
    """Base domain exception."""

    pass


class InvalidArgumentException(DomainException):
    """Raised when an argument violates an operation's precondition."""

    pass


class GeometryException(DomainException):
    """Raised when a geometric configuration is not admissible."""

    pass


class ConfigurationException(DomainException):
    """Raised when a simulation or experiment configuration is inconsistent."""

    pass


class FormatException(DomainException):
    """Raised when a persisted container cannot be decoded or validated."""

    pass


class InvalidStateException(DomainException):
    """Raised when cached intermediates do not match the current parameters."""

    pass


class SolverException(DomainException):
    """Raised when a linear solve fails."""

    def __init__(self, message: str, column: Optional[int] = None):
        super().__init__(message)
        self.column = column


class EstimationException(DomainException):
    """Raised when a statistic cannot be estimated from the data."""

    pass


class NonFiniteException(DomainException):
    """Raised when a loss or gradient becomes non-finite."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GradientCheckException(DomainException):
    """Raised when a gradient check meets non-finite values."""

    def __init__(
        self, message: str, parameter: Optional[str] = None, index: Optional[tuple] = None
    ):
        super().__init__(message)
        self.parameter = parameter
        self.index = index
