"""Application layer exceptions."""


class ApplicationException(Exception):
    """Base application exception."""

    pass
