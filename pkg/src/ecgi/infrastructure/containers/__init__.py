"""Named tensor container format."""

from .codec import (
    ContainerContents,
    decode_container,
    encode_container,
    load_container,
    save_container,
)

__all__ = [
    "ContainerContents",
    "decode_container",
    "encode_container",
    "load_container",
    "save_container",
]
