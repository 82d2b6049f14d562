"""Little-endian binary layouts shared by ingest, sharder and storage.

Every file starts with an 8-byte magic. Record files follow it with a
u64 record count; the out-degree and vertex-value files carry no count,
their length is implied by ``n``.
"""

import os
import struct
from typing import NamedTuple

import numpy as np

from .errors import CorruptShard, StorageIOError

EDGE_MAGIC = b"BPEDGE01"
IN_SHARD_MAGIC = b"BSHIN001"
IN_SHARD_MAGIC_64 = b"BSHIN064"
OUT_SHARD_MAGIC = b"BSHOUT01"
DEGREE_MAGIC = b"BPDEG001"
VALUE_MAGIC = b"BPVAL001"
VALUE_MAGIC_64 = b"BPVAL064"

MAGIC_SIZE = 8
RECORD_HEADER_SIZE = MAGIC_SIZE + 8  # magic + u64 count

EDGE_DTYPE = np.dtype([("src", "<u4"), ("dst", "<u4")])
IN_RECORD_DTYPE = np.dtype([("src", "<u4"), ("dst", "<u4"), ("value", "<f4")])
OUT_RECORD_DTYPE = EDGE_DTYPE
VALUE_DTYPE = np.dtype("<f4")
DEGREE_DTYPE = np.dtype("<u4")

IN_RECORD_SIZE = IN_RECORD_DTYPE.itemsize
OUT_RECORD_SIZE = OUT_RECORD_DTYPE.itemsize

_COUNT = struct.Struct("<Q")


class ValueLayout(NamedTuple):
    """Edge/vertex value width. 32-bit is the default on-disk format."""

    bits: int
    value_dtype: np.dtype
    in_dtype: np.dtype
    in_magic: bytes
    value_magic: bytes

    @property
    def in_size(self):
        return self.in_dtype.itemsize


LAYOUTS = {
    32: ValueLayout(32, VALUE_DTYPE, IN_RECORD_DTYPE, IN_SHARD_MAGIC, VALUE_MAGIC),
    64: ValueLayout(64, np.dtype("<f8"),
                    np.dtype([("src", "<u4"), ("dst", "<u4"), ("value", "<f8")]),
                    IN_SHARD_MAGIC_64, VALUE_MAGIC_64),
}


def value_layout(bits=32):
    try:
        return LAYOUTS[bits]
    except KeyError:
        raise ValueError(f"value width must be 32 or 64 bits, got {bits}") from None


def write_records(path, magic, records):
    try:
        with open(path, "wb") as f:
            f.write(magic)
            f.write(_COUNT.pack(len(records)))
            f.write(np.ascontiguousarray(records).tobytes())
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e


def parse_records(path, data, magic, dtype):
    """Decode a record file already read into ``data`` (bytes)."""
    if len(data) < RECORD_HEADER_SIZE:
        raise CorruptShard(path, f"truncated header ({len(data)} bytes)")
    if data[:MAGIC_SIZE] != magic:
        raise CorruptShard(path, f"bad magic {data[:MAGIC_SIZE]!r}, expected {magic!r}")
    (count,) = _COUNT.unpack_from(data, MAGIC_SIZE)
    body = len(data) - RECORD_HEADER_SIZE
    if body != count * dtype.itemsize:
        raise CorruptShard(path, f"header says {count} records, body holds {body} bytes")
    return np.frombuffer(data, dtype=dtype, offset=RECORD_HEADER_SIZE).copy()


def read_records(path, magic, dtype):
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e
    return parse_records(path, data, magic, dtype)


def check_record_header(path, magic, dtype):
    """Validate magic and size without reading the body; returns the count."""
    try:
        size = os.path.getsize(path)
        with open(path, "rb") as f:
            head = f.read(RECORD_HEADER_SIZE)
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e
    if len(head) < RECORD_HEADER_SIZE or head[:MAGIC_SIZE] != magic:
        raise CorruptShard(path, "bad or truncated header")
    (count,) = _COUNT.unpack_from(head, MAGIC_SIZE)
    if size - RECORD_HEADER_SIZE != count * dtype.itemsize:
        raise CorruptShard(path, f"header says {count} records, file is {size} bytes")
    return count


def write_array_file(path, magic, array, dtype):
    try:
        with open(path, "wb") as f:
            f.write(magic)
            f.write(np.asarray(array, dtype=dtype).tobytes())
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e


def read_array_file(path, magic, dtype, n=None):
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e
    if data[:MAGIC_SIZE] != magic:
        raise CorruptShard(path, f"bad magic {data[:MAGIC_SIZE]!r}, expected {magic!r}")
    body = len(data) - MAGIC_SIZE
    if body % dtype.itemsize:
        raise CorruptShard(path, f"body of {body} bytes is not a whole number of entries")
    if n is not None and body != n * dtype.itemsize:
        raise CorruptShard(path, f"expected {n} entries, found {body // dtype.itemsize}")
    return np.frombuffer(data, dtype=dtype, offset=MAGIC_SIZE).copy()


def check_array_header(path, magic, dtype, n):
    try:
        size = os.path.getsize(path)
        with open(path, "rb") as f:
            head = f.read(MAGIC_SIZE)
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e
    if head != magic:
        raise CorruptShard(path, "bad magic")
    if size - MAGIC_SIZE != n * dtype.itemsize:
        raise CorruptShard(path, f"expected {n} entries, file is {size} bytes")


def read_edge_file(path):
    """Return the canonical edge stream as an ``EDGE_DTYPE`` array."""
    return read_records(path, EDGE_MAGIC, EDGE_DTYPE)


def write_edge_file(path, edges):
    write_records(path, EDGE_MAGIC, as_edge_records(edges))


def as_edge_records(edges):
    if isinstance(edges, np.ndarray) and edges.dtype == EDGE_DTYPE:
        return edges
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    out = np.empty(len(arr), dtype=EDGE_DTYPE)
    out["src"] = arr[:, 0]
    out["dst"] = arr[:, 1]
    return out


def read_value_file(path, n=None, bits=32):
    layout = value_layout(bits)
    return read_array_file(path, layout.value_magic, layout.value_dtype, n)


def write_value_file(path, values, bits=32):
    layout = value_layout(bits)
    write_array_file(path, layout.value_magic, values, layout.value_dtype)


def read_degree_file(path, n=None):
    return read_array_file(path, DEGREE_MAGIC, DEGREE_DTYPE, n)
