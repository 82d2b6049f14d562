"""Interval loading and scatter write-back with I/O accounting.

A full sequential read of one shard counts as one non-sequential read; a
contiguous block write into an in-shard counts as one non-sequential write.
Vertex-value slice accesses are counted separately so the per-interval
edge-shard read count stays exactly two.
"""

import os
import threading
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import CorruptShard, OffsetMismatch, StorageIOError
from .formats import (
    MAGIC_SIZE,
    OUT_RECORD_DTYPE,
    OUT_SHARD_MAGIC,
    RECORD_HEADER_SIZE,
    parse_records,
)
from .sharder import read_manifest


@dataclass(frozen=True)
class IoMetrics:
    edge_shard_nonseq_reads: int = 0
    scatter_nonseq_writes: int = 0
    vertex_file_accesses: int = 0
    bytes_read: int = 0
    bytes_written: int = 0
    # reads of in-shard blocks needed only when an update left out-edge slots unwritten
    block_fill_reads: int = 0

    def __sub__(self, other):
        return IoMetrics(**{f.name: getattr(self, f.name) - getattr(other, f.name) for f in fields(self)})

    def as_dict(self):
        return asdict(self)


class _Counters:
    def __init__(self):
        self._lock = threading.Lock()
        self._values = dict.fromkeys((f.name for f in fields(IoMetrics)), 0)

    def add(self, **deltas):
        with self._lock:
            for k, v in deltas.items():
                self._values[k] += v

    def snapshot(self):
        with self._lock:
            return IoMetrics(**self._values)

    def reset(self):
        with self._lock:
            for k in self._values:
                self._values[k] = 0


class IntervalSubgraph:
    """One interval in memory.

    In-edges are grouped per destination (CSR over ``in_ptr``) and are
    read-only. Out-edges keep out-shard order (grouped per source, CSR over
    ``out_ptr``) and carry a private value slot plus a written flag.
    """

    def __init__(self, p, first, last, values, in_records, in_ptr, in_src, in_val,
                 out_ptr, out_dst, out_target):
        self.p = p
        self.first = first
        self.last = last
        self.values = values
        self.loaded_values = values.copy()
        self.in_records = in_records
        self.in_ptr = in_ptr
        self.in_src = in_src
        self.in_val = in_val
        self.out_ptr = out_ptr
        self.out_dst = out_dst
        self.out_target = out_target  # interval index of each out-edge destination
        self.out_val = np.zeros(len(out_dst), dtype=values.dtype)
        self.out_written = np.zeros(len(out_dst), dtype=bool)
        self.out_degree = np.diff(out_ptr)

    @property
    def vertex_count(self):
        return self.last - self.first + 1

    def vertices(self):
        return range(self.first, self.last + 1)

    def in_edges(self, v):
        i = v - self.first
        a, b = self.in_ptr[i], self.in_ptr[i + 1]
        return self.in_src[a:b], self.in_val[a:b]

    def out_edges(self, v):
        i = v - self.first
        a, b = self.out_ptr[i], self.out_ptr[i + 1]
        return self.out_dst[a:b], self.out_val[a:b]


def _read_whole(path):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e


class ShardStore:
    """Disk access for one sharded graph; holds the I/O counters."""

    def __init__(self, manifest):
        self.manifest = manifest
        self._counters = _Counters()
        self._io_lock = threading.Lock()

    @classmethod
    def open(cls, path):
        return cls(read_manifest(path))

    def snapshot_metrics(self):
        return self._counters.snapshot()

    def reset_metrics(self):
        self._counters.reset()

    def load_interval(self, p):
        mf = self.manifest
        if not 0 <= p < mf.P:
            raise IndexError(f"interval {p} out of range 0..{mf.P - 1}")
        r = mf.intervals[p]
        k = len(r)
        with self._io_lock:
            in_path = mf.in_shard_path(p)
            in_bytes = _read_whole(in_path)
            self._counters.add(edge_shard_nonseq_reads=1, bytes_read=len(in_bytes))
            out_path = mf.out_shard_path(p)
            out_bytes = _read_whole(out_path)
            self._counters.add(edge_shard_nonseq_reads=1, bytes_read=len(out_bytes))
            values = self._read_value_slice(r.first, k)

        layout = mf.layout
        in_rec = parse_records(in_path, in_bytes, layout.in_magic, layout.in_dtype)
        out_rec = parse_records(out_path, out_bytes, OUT_SHARD_MAGIC, OUT_RECORD_DTYPE)

        in_dst = in_rec["dst"].astype(np.int64) - r.first
        if len(in_dst) and (in_dst.min() < 0 or in_dst.max() >= k):
            raise CorruptShard(in_path, "edge destination outside interval")
        order = np.argsort(in_dst, kind="stable")
        in_ptr = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(np.bincount(in_dst, minlength=k), out=in_ptr[1:])
        in_src = in_rec["src"][order].astype(np.int64)
        in_val = in_rec["value"][order].copy()
        in_src.flags.writeable = False
        in_val.flags.writeable = False

        out_src = out_rec["src"].astype(np.int64) - r.first
        if len(out_src) and (out_src.min() < 0 or out_src.max() >= k or np.any(np.diff(out_src) < 0)):
            raise CorruptShard(out_path, "sources outside interval or unsorted")
        out_ptr = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(np.bincount(out_src, minlength=k), out=out_ptr[1:])
        out_dst = out_rec["dst"].astype(np.int64)
        out_dst.flags.writeable = False
        out_target = mf.interval_of(out_dst)

        return IntervalSubgraph(p, r.first, r.last, values, in_rec, in_ptr, in_src, in_val,
                                out_ptr, out_dst, out_target)

    def write_back(self, sub):
        """Scatter out-edge slots into the in-shards, then persist vertex values."""
        mf = self.manifest
        p = sub.p
        r = mf.intervals[p]
        if (sub.first, sub.last) != (r.first, r.last):
            raise ValueError(f"subgraph range {sub.first}..{sub.last} does not match interval {p}")
        src = np.repeat(np.arange(sub.first, sub.last + 1), sub.out_degree)
        layout = mf.layout

        plans = []
        for q in range(mf.P):
            idx = np.nonzero(sub.out_target == q)[0]
            off, length = mf.blocks[(p, q)]
            if len(idx) * layout.in_size != length:
                raise OffsetMismatch(p, q, length, len(idx) * layout.in_size)
            if len(idx):
                plans.append((q, idx, off, length))

        with self._io_lock:
            for q, idx, off, length in plans:
                rec = np.empty(len(idx), dtype=layout.in_dtype)
                rec["src"] = src[idx]
                rec["dst"] = sub.out_dst[idx]
                rec["value"] = sub.out_val[idx]
                unwritten = ~sub.out_written[idx]
                if unwritten.any():
                    old = self._current_block(sub, q, off, length)
                    if not (np.array_equal(old["src"], rec["src"]) and np.array_equal(old["dst"], rec["dst"])):
                        raise CorruptShard(mf.in_shard_path(q), f"block ({p},{q}) topology differs from out-shard {p}")
                    rec["value"][unwritten] = old["value"][unwritten]
                path = mf.in_shard_path(q)
                try:
                    with open(path, "r+b") as f:
                        f.seek(off)
                        f.write(rec.tobytes())
                except OSError as e:
                    raise StorageIOError(path, e.strerror or str(e)) from e
                self._counters.add(scatter_nonseq_writes=1, bytes_written=length)
            self._write_value_slice(sub.first, sub.values)

    def _current_block(self, sub, q, off, length):
        size = self.manifest.layout.in_size
        if q == sub.p:
            start = (off - RECORD_HEADER_SIZE) // size
            return sub.in_records[start:start + length // size]
        path = self.manifest.in_shard_path(q)
        try:
            with open(path, "rb") as f:
                f.seek(off)
                data = f.read(length)
        except OSError as e:
            raise StorageIOError(path, e.strerror or str(e)) from e
        if len(data) != length:
            raise CorruptShard(path, f"block at {off} truncated")
        self._counters.add(block_fill_reads=1, bytes_read=length)
        return np.frombuffer(data, dtype=self.manifest.layout.in_dtype)

    def _read_value_slice(self, first, k):
        path = self.manifest.value_path
        dtype = self.manifest.layout.value_dtype
        nbytes = k * dtype.itemsize
        try:
            with open(path, "rb") as f:
                f.seek(MAGIC_SIZE + first * dtype.itemsize)
                data = f.read(nbytes)
        except OSError as e:
            raise StorageIOError(path, e.strerror or str(e)) from e
        if len(data) != nbytes:
            raise CorruptShard(path, "value file shorter than vertex count")
        self._counters.add(vertex_file_accesses=1, bytes_read=nbytes)
        return np.frombuffer(data, dtype=dtype).astype(dtype.newbyteorder("="))

    def _write_value_slice(self, first, values):
        path = self.manifest.value_path
        dtype = self.manifest.layout.value_dtype
        data = np.asarray(values, dtype=dtype).tobytes()
        try:
            with open(path, "r+b") as f:
                f.seek(MAGIC_SIZE + first * dtype.itemsize)
                f.write(data)
        except OSError as e:
            raise StorageIOError(path, e.strerror or str(e)) from e
        self._counters.add(vertex_file_accesses=1, bytes_written=len(data))

    def read_values(self):
        """Whole vertex-value vector (one vertex-file access)."""
        with self._io_lock:
            return self._read_value_slice(0, self.manifest.n)

    def read_in_shard(self, q):
        """Full in-shard record array; inspection helper, counted as one read."""
        path = self.manifest.in_shard_path(q)
        layout = self.manifest.layout
        data = _read_whole(path)
        self._counters.add(edge_shard_nonseq_reads=1, bytes_read=len(data))
        return parse_records(path, data, layout.in_magic, layout.in_dtype)


def value_file_bytes(manifest):
    """Raw bytes of the vertex-value file, for byte-identity comparisons."""
    return _read_whole(os.path.join(manifest.root, manifest.value_file))
