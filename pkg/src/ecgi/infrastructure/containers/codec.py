"""NamedTensorContainer (NTC1) codec.

Layout::

    b"NTC1" | uint32 LE header length | UTF-8 JSON header | payloads

The header is ``{"version": 1, "tensors": [{"name", "dtype", "shape",
"nbytes"}, ...], "metadata": {...}}`` and payloads follow in header order as
little-endian C-contiguous bytes.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ...domain.exceptions import FormatException

logger = logging.getLogger(__name__)

MAGIC = b"NTC1"
VERSION = 1
DTYPES = {
    "float64": np.dtype("<f8"),
    "float32": np.dtype("<f4"),
    "int64": np.dtype("<i8"),
    "int32": np.dtype("<i4"),
}


class TensorEntry(BaseModel):
    name: str = Field(..., min_length=1)
    dtype: str
    shape: List[int]
    nbytes: int = Field(..., ge=0)


class ContainerHeader(BaseModel):
    version: int
    tensors: List[TensorEntry]
    metadata: Dict[str, Any] = Field(default_factory=dict)


@dataclass
class ContainerContents:
    tensors: Dict[str, np.ndarray]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def require(self, name: str) -> np.ndarray:
        if name not in self.tensors:
            raise FormatException(f"container has no tensor named {name!r}")
        return self.tensors[name]


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (tuple, set, frozenset)):
        return list(value)
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"metadata value of type {type(value).__name__} is not serializable")


def _dtype_name(array: np.ndarray) -> str:
    for name, dtype in DTYPES.items():
        if array.dtype.kind == dtype.kind and array.dtype.itemsize == dtype.itemsize:
            return name
    raise FormatException(f"unsupported dtype {array.dtype}")


def encode_container(
    tensors: Mapping[str, np.ndarray], metadata: Optional[Dict[str, Any]] = None
) -> bytes:
    entries = []
    payloads = []
    for name, value in tensors.items():
        array = np.asarray(value)
        dtype_name = _dtype_name(array)
        data = np.ascontiguousarray(array, dtype=DTYPES[dtype_name]).tobytes()
        entries.append(
            {"name": name, "dtype": dtype_name, "shape": list(array.shape), "nbytes": len(data)}
        )
        payloads.append(data)
    header = json.dumps(
        {"version": VERSION, "tensors": entries, "metadata": metadata or {}},
        sort_keys=True,
        separators=(",", ":"),
        default=_json_default,
    ).encode("utf-8")
    return MAGIC + struct.pack("<I", len(header)) + header + b"".join(payloads)


def decode_container(data: bytes) -> ContainerContents:
    if len(data) < 8:
        raise FormatException("container is truncated before its header")
    if data[:4] != MAGIC:
        raise FormatException(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    (header_length,) = struct.unpack("<I", data[4:8])
    header_end = 8 + header_length
    if len(data) < header_end:
        raise FormatException("container is truncated inside its header")
    try:
        header = ContainerHeader.model_validate(json.loads(data[8:header_end].decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise FormatException(f"unreadable container header: {e}") from e
    if header.version != VERSION:
        raise FormatException(f"unsupported container version {header.version}")

    tensors: Dict[str, np.ndarray] = {}
    offset = header_end
    for entry in header.tensors:
        if entry.name in tensors:
            raise FormatException(f"duplicate tensor name {entry.name!r}")
        if entry.dtype not in DTYPES:
            raise FormatException(f"unsupported dtype {entry.dtype!r} for {entry.name!r}")
        if any(dim < 0 for dim in entry.shape):
            raise FormatException(f"negative dimension in {entry.name!r}")
        dtype = DTYPES[entry.dtype]
        expected = int(np.prod(entry.shape, dtype=np.int64)) * dtype.itemsize
        if entry.nbytes != expected:
            raise FormatException(
                f"{entry.name!r} declares {entry.nbytes} bytes, shape needs {expected}"
            )
        end = offset + entry.nbytes
        if end > len(data):
            raise FormatException(f"payload of {entry.name!r} is truncated")
        array = np.frombuffer(data, dtype=dtype, count=expected // dtype.itemsize, offset=offset)
        tensors[entry.name] = array.reshape(entry.shape).astype(dtype.newbyteorder("="), copy=True)
        offset = end
    if offset != len(data):
        raise FormatException(f"{len(data) - offset} trailing bytes after the last tensor")
    return ContainerContents(tensors, header.metadata)


def save_container(
    path: Union[str, Path],
    tensors: Mapping[str, np.ndarray],
    metadata: Optional[Dict[str, Any]] = None,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_container(tensors, metadata))
    logger.debug("wrote %s (%d tensors)", path, len(tensors))


def load_container(path: Union[str, Path]) -> ContainerContents:
    path = Path(path)
    if not path.is_file():
        raise FormatException(f"no container at {path}")
    return decode_container(path.read_bytes())
