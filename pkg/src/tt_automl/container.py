"""The TAML binary container holding models, datasets, benchmark tables and compressed
artifacts.

Layout: magic b"TAML", u32 LE version, u64 LE header length, UTF-8 JSON header
{"entries": [{name, dtype, shape, offset, length}], "meta": {...}}, then the payload of
row-major little-endian blobs. Offsets are relative to the payload start and 8-byte
aligned; gaps are zero padding.
"""

from __future__ import annotations

import json
import math
import struct
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

import attrs
import numpy as np

from tt_automl.constants import Container
from tt_automl.logger import get_logger

_logger = get_logger(__file__)

_PREAMBLE = struct.Struct("<4sIQ")


@attrs.define
class ContainerError(Exception):
    """Root of container errors."""


@attrs.define
class ContainerTruncatedError(ContainerError):
    """Fewer bytes than the preamble or header length announce."""

    needed: int
    available: int

    def __str__(self) -> str:
        return f"container truncated: need {self.needed} bytes, have {self.available}"


@attrs.define
class ContainerBadMagicError(ContainerError):
    """Not a TAML container."""

    magic: bytes

    def __str__(self) -> str:
        return f"bad magic {self.magic!r}, expected {Container.MAGIC!r}"


@attrs.define
class ContainerVersionError(ContainerError):
    """Unsupported container version."""

    version: int

    def __str__(self) -> str:
        return f"unsupported container version {self.version}"


@attrs.define
class ContainerHeaderError(ContainerError):
    """Header is not valid UTF-8 JSON of the expected shape."""

    detail: str

    def __str__(self) -> str:
        return f"malformed container header: {self.detail}"


@attrs.define
class ContainerDuplicateNameError(ContainerError):
    """Two entries share a name."""

    name: str

    def __str__(self) -> str:
        return f"duplicate entry name '{self.name}'"


@attrs.define
class ContainerLengthError(ContainerError):
    """Declared length disagrees with shape and dtype."""

    name: str
    length: int
    expected: int

    def __str__(self) -> str:
        return (
            f"entry '{self.name}' has length {self.length}, shape and dtype need "
            f"{self.expected}"
        )


@attrs.define
class ContainerBoundsError(ContainerError):
    """An entry reaches past the payload or is misaligned."""

    name: str
    detail: str

    def __str__(self) -> str:
        return f"entry '{self.name}' {self.detail}"


@attrs.define
class ContainerOverlapError(ContainerError):
    """Two entries share payload bytes."""

    first: str
    second: str

    def __str__(self) -> str:
        return f"entries '{self.first}' and '{self.second}' overlap"


@attrs.define
class ContainerDTypeError(ContainerError):
    """Unsupported element type."""

    dtype: str

    def __str__(self) -> str:
        return f"unsupported dtype '{self.dtype}' (f32, u8, i8, i64)"


@attrs.define
class ContainerIOError(ContainerError):
    """The file could not be read or written."""

    path: str
    cause: str

    def __str__(self) -> str:
        return f"cannot access container '{self.path}': {self.cause}"


class DType(Enum):
    """Element types of container entries."""

    F32 = "f32"
    U8 = "u8"
    I8 = "i8"
    I64 = "i64"

    def __str__(self) -> str:
        return self.value

    @property
    def numpy(self) -> np.dtype:
        return np.dtype(_NUMPY_DTYPES[self])

    @property
    def size(self) -> int:
        return self.numpy.itemsize

    @classmethod
    def parse(cls, value: Any) -> DType:
        try:
            return cls(value)
        except ValueError as exception:
            raise ContainerDTypeError(str(value)) from exception

    @classmethod
    def of(cls, array: np.ndarray) -> DType:
        for dtype, code in _NUMPY_DTYPES.items():
            if array.dtype == np.dtype(code):
                return dtype
        raise ContainerDTypeError(str(array.dtype))


_NUMPY_DTYPES = {DType.F32: "<f4", DType.U8: "u1", DType.I8: "i1", DType.I64: "<i8"}


@attrs.define
class ContainerData:
    """Named tensors in file order plus free-form metadata."""

    entries: dict[str, np.ndarray] = attrs.field(factory=dict)
    meta: dict[str, Any] = attrs.field(factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def require(self, name: str) -> np.ndarray:
        if name not in self.entries:
            raise ContainerHeaderError(f"missing entry '{name}'")
        return self.entries[name]


def _aligned(offset: int) -> int:
    return -(-offset // Container.ALIGNMENT) * Container.ALIGNMENT


def container_write(
    entries: Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]],
    meta: Mapping[str, Any] | None = None,
) -> bytes:
    """Serializes the entries in iteration order. Arrays must already have one of the
    container dtypes."""
    items = list(entries.items() if isinstance(entries, Mapping) else entries)
    header_entries = []
    blobs = []
    offset = 0
    seen: set[str] = set()
    for name, array in items:
        if name in seen:
            raise ContainerDuplicateNameError(name)
        seen.add(name)
        dtype = DType.of(np.asarray(array))
        blob = np.ascontiguousarray(array, dtype=dtype.numpy).tobytes()
        offset = _aligned(offset)
        header_entries.append(
            {
                "name": name,
                "dtype": str(dtype),
                "shape": [int(dim) for dim in np.shape(array)],
                "offset": offset,
                "length": len(blob),
            }
        )
        blobs.append((offset, blob))
        offset += len(blob)
    try:
        header = json.dumps(
            {"entries": header_entries, "meta": dict(meta or {})},
            separators=(",", ":"),
            ensure_ascii=False,
            allow_nan=False,
        ).encode("utf-8")
    except (TypeError, ValueError) as exception:
        raise ContainerHeaderError(f"meta is not JSON: {exception}") from exception
    payload = bytearray(offset)
    for start, blob in blobs:
        payload[start : start + len(blob)] = blob
    return (
        _PREAMBLE.pack(Container.MAGIC, Container.VERSION, len(header))
        + header
        + bytes(payload)
    )


def _parse_header(raw: bytes) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError, RecursionError) as exception:
        raise ContainerHeaderError(str(exception)) from exception
    if not isinstance(header, dict):
        raise ContainerHeaderError("header is not an object")
    entries, meta = header.get("entries"), header.get("meta", {})
    if not isinstance(entries, list) or not isinstance(meta, dict):
        raise ContainerHeaderError("expected an 'entries' list and a 'meta' object")
    for entry in entries:
        if not isinstance(entry, dict):
            raise ContainerHeaderError("entry is not an object")
        if not isinstance(entry.get("name"), str):
            raise ContainerHeaderError("entry without a string name")
        if not all(_is_count(entry.get(key)) for key in ("offset", "length")):
            raise ContainerHeaderError(f"entry '{entry['name']}' offset/length")
        shape = entry.get("shape")
        if not isinstance(shape, list) or not all(_is_count(dim) for dim in shape):
            raise ContainerHeaderError(f"entry '{entry['name']}' shape")
    return entries, meta


def _is_count(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


def container_read(data: bytes) -> ContainerData:
    """Parses and validates a container; every defect raises a ContainerError."""
    if len(data) < _PREAMBLE.size:
        raise ContainerTruncatedError(_PREAMBLE.size, len(data))
    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != Container.MAGIC:
        raise ContainerBadMagicError(magic)
    if version != Container.VERSION:
        raise ContainerVersionError(version)
    payload_start = _PREAMBLE.size + header_len
    if payload_start > len(data):
        raise ContainerTruncatedError(payload_start, len(data))
    entries, meta = _parse_header(data[_PREAMBLE.size : payload_start])
    payload_len = len(data) - payload_start

    spans = []
    result = ContainerData(meta=meta)
    for entry in entries:
        name = entry["name"]
        if name in result.entries:
            raise ContainerDuplicateNameError(name)
        dtype = DType.parse(entry.get("dtype"))
        shape = tuple(entry["shape"])
        offset, length = entry["offset"], entry["length"]
        if length != (expected := math.prod(shape) * dtype.size):
            raise ContainerLengthError(name, length, expected)
        if offset % Container.ALIGNMENT:
            raise ContainerBoundsError(name, f"offset {offset} is not 8-byte aligned")
        if offset + length > payload_len:
            raise ContainerBoundsError(
                name, f"ends at {offset + length}, payload has {payload_len} bytes"
            )
        spans.append((offset, offset + length, name))
        if not length:
            result.entries[name] = np.zeros(shape, dtype=dtype.numpy)
            continue
        result.entries[name] = (
            np.frombuffer(
                data,
                dtype=dtype.numpy,
                count=math.prod(shape),
                offset=payload_start + offset,
            )
            .reshape(shape)
            .copy()
        )
    spans.sort()
    for (_, end, first), (start, _, second) in zip(spans, spans[1:]):
        if start < end:
            raise ContainerOverlapError(first, second)
    return result


def write_container(
    path: Path,
    entries: Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]],
    meta: Mapping[str, Any] | None = None,
) -> None:
    data = container_write(entries, meta)
    try:
        path.write_bytes(data)
    except OSError as exception:
        raise ContainerIOError(str(path), str(exception)) from exception
    _logger.debug(f"wrote {len(data)} bytes to {path}")


def read_container(path: Path) -> ContainerData:
    try:
        data = path.read_bytes()
    except OSError as exception:
        raise ContainerIOError(str(path), str(exception)) from exception
    return container_read(data)
