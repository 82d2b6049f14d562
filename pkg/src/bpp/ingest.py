"""Edge-list parsing and dense id assignment."""

import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptyGraph, MalformedLine, StorageIOError
from .formats import EDGE_DTYPE, write_edge_file

EDGE_FILE = "edges.bin"
IDMAP_FILE = "idmap.txt"


class RawEdge(NamedTuple):
    src: int
    dst: int


@dataclass
class ParseDiagnostics:
    data_lines: int = 0
    comment_lines: int = 0
    blank_lines: int = 0
    duplicates_dropped: int = 0
    # line numbers that carried tokens beyond the first two
    extra_token_lines: list = field(default_factory=list)


@dataclass
class GraphStats:
    vertex_count: int
    edge_count: int
    max_out_degree: int
    max_in_degree: int

    def as_dict(self):
        return {
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
            "max_out_degree": self.max_out_degree,
            "max_in_degree": self.max_in_degree,
        }


class IdMap:
    """Bijection between external ids and dense ids ``0..n-1``."""

    def __init__(self, external_ids=()):
        self.to_external = list(external_ids)
        self.to_dense = {ext: i for i, ext in enumerate(self.to_external)}
        if len(self.to_dense) != len(self.to_external):
            raise ValueError("external ids must be unique")

    def __len__(self):
        return len(self.to_external)

    def __eq__(self, other):
        return isinstance(other, IdMap) and self.to_external == other.to_external

    def dense(self, ext):
        return self.to_dense[ext]

    def external(self, dense):
        return self.to_external[dense]

    def add(self, ext):
        d = self.to_dense.get(ext)
        if d is None:
            d = len(self.to_external)
            self.to_dense[ext] = d
            self.to_external.append(ext)
        return d

    def write(self, path):
        try:
            with open(path, "w") as f:
                for d, ext in enumerate(self.to_external):
                    f.write(f"{d} {ext}\n")
        except OSError as e:
            raise StorageIOError(path, e.strerror or str(e)) from e

    @classmethod
    def read(cls, path):
        ids = []
        try:
            with open(path) as f:
                for line_no, line in enumerate(f, 1):
                    parts = line.split()
                    if not parts:
                        continue
                    if len(parts) != 2 or int(parts[0]) != len(ids):
                        raise MalformedLine(line_no, line.rstrip("\n"))
                    ids.append(int(parts[1]))
        except OSError as e:
            raise StorageIOError(path, e.strerror or str(e)) from e
        return cls(ids)


def _is_uint(token):
    return token.isascii() and token.isdigit()


def parse_edge_list(lines, allow_duplicates=True, comment_prefix="#"):
    """Read ``src dst`` pairs from an iterable of text lines.

    Returns ``(edges, diagnostics)``. Raises ``MalformedLine`` on the first
    data line that does not start with two non-negative integers.
    """
    diag = ParseDiagnostics()
    edges = []
    seen = None if allow_duplicates else set()
    for line_no, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped:
            diag.blank_lines += 1
            continue
        if comment_prefix and stripped.startswith(comment_prefix):
            diag.comment_lines += 1
            continue
        tokens = stripped.split()
        if len(tokens) < 2 or not (_is_uint(tokens[0]) and _is_uint(tokens[1])):
            raise MalformedLine(line_no, line.rstrip("\n"))
        if len(tokens) > 2:
            diag.extra_token_lines.append(line_no)
        diag.data_lines += 1
        edge = RawEdge(int(tokens[0]), int(tokens[1]))
        if seen is not None:
            if edge in seen:
                diag.duplicates_dropped += 1
                continue
            seen.add(edge)
        edges.append(edge)
    return edges, diag


def add_reciprocal_edges(edges):
    """Append the reverse of every non-self-loop edge (undirected reading).

    A reverse that is already present in the input is not added again.
    """
    present = set(edges)
    out = list(edges)
    added = set()
    for u, v in edges:
        rev = RawEdge(v, u)
        if u != v and rev not in present and rev not in added:
            added.add(rev)
            out.append(rev)
    return out


def remap_ids(edges):
    """Assign dense ids by first appearance (src before dst within an edge).

    Returns ``(dense_edges, id_map, stats)`` where ``dense_edges`` is an
    ``EDGE_DTYPE`` array in input order.
    """
    if len(edges) == 0:
        raise EmptyGraph()
    id_map = IdMap()
    dense = np.empty(len(edges), dtype=EDGE_DTYPE)
    src = dense["src"]
    dst = dense["dst"]
    add = id_map.add
    for i, (u, v) in enumerate(edges):
        src[i] = add(u)
        dst[i] = add(v)
    return dense, id_map, compute_stats(dense, len(id_map))


def compute_stats(dense_edges, n):
    out_deg = np.bincount(dense_edges["src"], minlength=n)
    in_deg = np.bincount(dense_edges["dst"], minlength=n)
    return GraphStats(
        vertex_count=int(n),
        edge_count=int(len(dense_edges)),
        max_out_degree=int(out_deg.max()) if n else 0,
        max_in_degree=int(in_deg.max()) if n else 0,
    )


def ingest_file(input_path, output_dir, undirected=False, allow_duplicates=True, comment_prefix="#"):
    """Parse ``input_path`` and write ``edges.bin`` + ``idmap.txt`` to ``output_dir``."""
    try:
        with open(input_path) as f:
            edges, diag = parse_edge_list(f, allow_duplicates, comment_prefix)
    except OSError as e:
        raise StorageIOError(input_path, e.strerror or str(e)) from e
    if undirected:
        edges = add_reciprocal_edges(edges)
    dense, id_map, stats = remap_ids(edges)
    os.makedirs(output_dir, exist_ok=True)
    write_edge_file(os.path.join(output_dir, EDGE_FILE), dense)
    id_map.write(os.path.join(output_dir, IDMAP_FILE))
    return stats, diag
