"""Interval partitioning and dual-shard materialization.

Each interval ``p`` owns two files: ``in_p.bin`` holds every edge whose
destination lies in ``p`` (with its value), ``out_p.bin`` every edge whose
source lies in ``p`` (topology only). Both are sorted by source, so inside
``in_q.bin`` the edges coming from interval ``p`` form one contiguous block;
the manifest records where each block starts.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetTooSmall,
    ConfigError,
    CorruptManifest,
    EmptyGraph,
    StorageIOError,
    VersionMismatch,
    VertexOutOfRange,
)
from .formats import (
    DEGREE_DTYPE,
    DEGREE_MAGIC,
    OUT_RECORD_DTYPE,
    OUT_SHARD_MAGIC,
    RECORD_HEADER_SIZE,
    as_edge_records,
    check_array_header,
    check_record_header,
    read_edge_file,
    value_layout,
    write_array_file,
    write_records,
)

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.txt"


@dataclass(frozen=True)
class IntervalRange:
    index: int
    first: int
    last: int  # inclusive

    def __len__(self):
        return self.last - self.first + 1

    def __contains__(self, v):
        return self.first <= v <= self.last


@dataclass
class GraphManifest:
    n: int
    m: int
    intervals: list
    in_shards: list
    out_shards: list
    degree_file: str
    value_file: str
    # (p, q) -> (absolute byte offset in in-shard q, byte length)
    blocks: dict
    value_bits: int = 32
    version: int = FORMAT_VERSION
    root: str = field(default=".", compare=False)

    @property
    def layout(self):
        return value_layout(self.value_bits)

    @property
    def P(self):
        return len(self.intervals)

    def path(self, name):
        return os.path.join(self.root, name)

    def in_shard_path(self, q):
        return self.path(self.in_shards[q])

    def out_shard_path(self, p):
        return self.path(self.out_shards[p])

    @property
    def degree_path(self):
        return self.path(self.degree_file)

    @property
    def value_path(self):
        return self.path(self.value_file)

    def interval_of(self, vertices):
        firsts = np.fromiter((r.first for r in self.intervals), dtype=np.int64, count=self.P)
        return np.searchsorted(firsts, vertices, side="right") - 1


def validate_intervals(intervals, n):
    if not intervals:
        raise ConfigError("at least one interval is required")
    expected = 0
    for i, r in enumerate(intervals):
        if r.index != i or r.first != expected or r.last < r.first:
            raise ConfigError(f"interval {i} ({r.first}..{r.last}) breaks contiguous coverage")
        expected = r.last + 1
    if expected != n:
        raise ConfigError(f"intervals cover 0..{expected - 1}, graph has n={n}")


def partition_intervals(in_counts, shards=None, budget=None):
    """Split vertices ``0..n-1`` into contiguous intervals.

    With ``shards=P`` an interval is closed once its in-edge total reaches
    ``ceil(m / P)`` and the last interval takes the remainder; an interval is
    also closed early when exactly one vertex remains per interval still to
    open, so the result always has ``P`` intervals. With ``budget`` intervals
    are filled greedily and closed before the in-edge total would exceed it.
    """
    counts = np.asarray(in_counts, dtype=np.int64)
    n = len(counts)
    if n == 0:
        raise EmptyGraph("graph has no vertices")
    if (shards is None) == (budget is None):
        raise ConfigError("give exactly one of shards or budget")

    cuts = []  # inclusive last vertex of every interval but the final one
    if shards is not None:
        if shards < 1:
            raise ConfigError(f"shards must be >= 1, got {shards}")
        if shards > n:
            raise ConfigError(f"shards={shards} exceeds vertex count {n}")
        target = math.ceil(int(counts.sum()) / shards)
        acc = 0
        for v in range(n):
            if len(cuts) == shards - 1:
                break
            acc += counts[v]
            must_close = n - v - 1 == shards - 1 - len(cuts)
            if acc >= target or must_close:
                cuts.append(v)
                acc = 0
    else:
        if budget < 1:
            raise ConfigError(f"budget must be >= 1, got {budget}")
        over = np.nonzero(counts > budget)[0]
        if len(over):
            v = int(over[0])
            raise BudgetTooSmall(v, int(counts[v]), budget)
        acc = 0
        for v in range(n):
            if acc + counts[v] > budget:
                cuts.append(v - 1)
                acc = 0
            acc += counts[v]

    ranges = []
    first = 0
    for i, last in enumerate(cuts + [n - 1]):
        ranges.append(IntervalRange(i, first, int(last)))
        first = int(last) + 1
    return ranges


def build_shards(edges, n, intervals, out_dir, value_bits=32):
    """Write in/out shards, the out-degree file and a zeroed value file.

    Returns the ``GraphManifest`` (not yet written to disk).
    """
    layout = value_layout(value_bits)
    edges = as_edge_records(edges)
    validate_intervals(intervals, n)
    m = len(edges)
    src = edges["src"].astype(np.int64)
    dst = edges["dst"].astype(np.int64)
    if m:
        bad = np.nonzero((src >= n) | (dst >= n))[0]
        if len(bad):
            i = int(bad[0])
            raise VertexOutOfRange(int(max(src[i], dst[i])), n)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise StorageIOError(out_dir, e.strerror or str(e)) from e

    P = len(intervals)
    firsts = np.array([r.first for r in intervals], dtype=np.int64)
    src_iv = np.searchsorted(firsts, src, side="right") - 1
    dst_iv = np.searchsorted(firsts, dst, side="right") - 1

    in_names, out_names = [], []
    blocks = {}
    for q in range(P):
        idx = np.nonzero(dst_iv == q)[0]
        # source asc, destination asc, then input order
        idx = idx[np.lexsort((idx, dst[idx], src[idx]))]
        rec = np.zeros(len(idx), dtype=layout.in_dtype)
        rec["src"] = src[idx]
        rec["dst"] = dst[idx]
        name = f"in_{q}.bin"
        write_records(os.path.join(out_dir, name), layout.in_magic, rec)
        in_names.append(name)

        per_source = np.bincount(src_iv[idx], minlength=P)
        offset = RECORD_HEADER_SIZE
        for p in range(P):
            length = int(per_source[p]) * layout.in_size
            blocks[(p, q)] = (offset, length)
            offset += length

    for p in range(P):
        idx = np.nonzero(src_iv == p)[0]
        idx = idx[np.lexsort((idx, dst[idx], src[idx]))]
        rec = np.empty(len(idx), dtype=OUT_RECORD_DTYPE)
        rec["src"] = src[idx]
        rec["dst"] = dst[idx]
        name = f"out_{p}.bin"
        write_records(os.path.join(out_dir, name), OUT_SHARD_MAGIC, rec)
        out_names.append(name)

    write_array_file(os.path.join(out_dir, "degree.bin"), DEGREE_MAGIC,
                     np.bincount(src, minlength=n), DEGREE_DTYPE)
    write_array_file(os.path.join(out_dir, "values.bin"), layout.value_magic,
                     np.zeros(n), layout.value_dtype)

    return GraphManifest(
        n=int(n), m=int(m), intervals=list(intervals),
        in_shards=in_names, out_shards=out_names,
        degree_file="degree.bin", value_file="values.bin",
        blocks=blocks, value_bits=value_bits, root=str(out_dir),
    )


def write_manifest(manifest, path=None):
    """Serialize as ``key=value`` lines plus ``interval``/``shard``/``block`` lines."""
    if path is None:
        path = manifest.path(MANIFEST_FILE)
    lines = [
        f"format_version={manifest.version}",
        f"n={manifest.n}",
        f"m={manifest.m}",
        f"P={manifest.P}",
        f"value_bits={manifest.value_bits}",
        f"degree_file={manifest.degree_file}",
        f"value_file={manifest.value_file}",
    ]
    for r in manifest.intervals:
        lines.append(f"interval {r.index} {r.first} {r.last}")
    for p, (i, o) in enumerate(zip(manifest.in_shards, manifest.out_shards)):
        lines.append(f"shard {p} {i} {o}")
    for (p, q), (off, length) in sorted(manifest.blocks.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        lines.append(f"block {p} {q} {off} {length}")
    try:
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e


def read_manifest(path):
    """Parse and validate a manifest; ``path`` may be the file or its directory."""
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST_FILE)
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e

    keys = {}
    intervals, shards, blocks = [], [], {}
    try:
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                k, _, v = line.partition("=")
                keys[k.strip()] = v.strip()
                continue
            kind, *rest = line.split()
            if kind == "interval":
                i, a, b = map(int, rest)
                intervals.append(IntervalRange(i, a, b))
            elif kind == "shard":
                shards.append((int(rest[0]), rest[1], rest[2]))
            elif kind == "block":
                p, q, off, length = map(int, rest)
                blocks[(p, q)] = (off, length)
            else:
                raise CorruptManifest(f"unknown line {line!r}")
    except ValueError as e:
        raise CorruptManifest(f"unparseable line: {e}") from e

    version = keys.get("format_version")
    if version != str(FORMAT_VERSION):
        raise VersionMismatch(version, FORMAT_VERSION)
    try:
        n, m, P = int(keys["n"]), int(keys["m"]), int(keys["P"])
        manifest = GraphManifest(
            n=n, m=m, intervals=intervals,
            in_shards=[s[1] for s in sorted(shards)],
            out_shards=[s[2] for s in sorted(shards)],
            degree_file=keys["degree_file"], value_file=keys["value_file"],
            blocks=blocks, value_bits=int(keys.get("value_bits", 32)),
            root=os.path.dirname(os.path.abspath(path)),
        )
    except KeyError as e:
        raise CorruptManifest(f"missing key {e.args[0]}") from e
    except ValueError as e:
        raise CorruptManifest(str(e)) from e
    if manifest.value_bits not in (32, 64):
        raise CorruptManifest(f"unsupported value_bits={manifest.value_bits}")

    if P < 1 or len(intervals) != P or [s[0] for s in sorted(shards)] != list(range(P)):
        raise CorruptManifest(f"P={P} but {len(intervals)} intervals, {len(shards)} shards")
    try:
        validate_intervals(intervals, n)
    except ConfigError as e:
        raise CorruptManifest(str(e)) from e
    _validate_files(manifest)
    return manifest


def _validate_files(manifest):
    P = manifest.P
    layout = manifest.layout
    for name in manifest.in_shards + manifest.out_shards + [manifest.degree_file, manifest.value_file]:
        if not os.path.isfile(manifest.path(name)):
            raise CorruptManifest(f"referenced file {name} does not exist")
    total_in = total_out = 0
    for q in range(P):
        count = check_record_header(manifest.in_shard_path(q), layout.in_magic, layout.in_dtype)
        total_in += count
        offset = RECORD_HEADER_SIZE
        for p in range(P):
            if (p, q) not in manifest.blocks:
                raise CorruptManifest(f"block ({p},{q}) missing")
            off, length = manifest.blocks[(p, q)]
            if off != offset or length % layout.in_size:
                raise CorruptManifest(f"block ({p},{q}) at {off}+{length} does not tile in-shard {q}")
            offset += length
        if offset != RECORD_HEADER_SIZE + count * layout.in_size:
            raise CorruptManifest(f"blocks of in-shard {q} cover {offset} bytes, shard has {count} records")
    for p in range(P):
        total_out += check_record_header(manifest.out_shard_path(p), OUT_SHARD_MAGIC, OUT_RECORD_DTYPE)
    if total_in != manifest.m or total_out != manifest.m:
        raise CorruptManifest(f"m={manifest.m} but shards hold {total_in} in / {total_out} out records")
    check_array_header(manifest.degree_path, DEGREE_MAGIC, DEGREE_DTYPE, manifest.n)
    check_array_header(manifest.value_path, layout.value_magic, layout.value_dtype, manifest.n)


def shard_graph(edges_path, out_dir, shards=None, budget=None, n=None, value_bits=32):
    """Read an ingest edge file, partition, build shards and write the manifest."""
    edges = read_edge_file(edges_path)
    if len(edges) == 0:
        raise EmptyGraph()
    if n is None:
        n = int(max(edges["src"].max(), edges["dst"].max())) + 1
    in_counts = np.bincount(edges["dst"], minlength=n)
    intervals = partition_intervals(in_counts, shards=shards, budget=budget)
    manifest = build_shards(edges, n, intervals, out_dir, value_bits=value_bits)
    write_manifest(manifest)
    return manifest
