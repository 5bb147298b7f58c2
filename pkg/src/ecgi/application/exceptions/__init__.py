"""Application exceptions."""

from .exceptions import ApplicationException

__all__ = ["ApplicationException"]
