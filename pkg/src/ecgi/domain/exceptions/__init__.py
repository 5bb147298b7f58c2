"""Domain exceptions."""

from .exceptions import (
    DomainException,
    InvalidArgumentException,
    GeometryException,
    ConfigurationException,
    FormatException,
    InvalidStateException,
    SolverException,
    EstimationException,
    NonFiniteException,
    GradientCheckException,
)

__all__ = [
    "DomainException",
    "InvalidArgumentException",
    "GeometryException",
    "ConfigurationException",
    "FormatException",
    "InvalidStateException",
    "SolverException",
    "EstimationException",
    "NonFiniteException",
    "GradientCheckException",
]
