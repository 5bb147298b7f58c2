"""ecgi: generative-prior ECG imaging laboratory."""

from .cli import main

__all__ = ["main"]
