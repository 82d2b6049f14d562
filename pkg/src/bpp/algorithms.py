"""Reference vertex kernels and in-memory oracles to check them against."""

from dataclasses import dataclass

import numpy as np

from .engine import UpdateFunction
from .errors import ConfigError, NoConvergence
from .formats import as_edge_records, write_value_file

ORACLE_MAX_ITERATIONS = 10000


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ConfigError(f"damping must lie in (0, 1), got {self.damping}")

    @property
    def base(self):
        return 1.0 - self.damping


class PageRank(UpdateFunction):
    """Unnormalized PageRank: ``base + damping * sum(in-edge values)``.

    Each vertex spreads ``value / out_degree`` over its out-edges; dangling
    vertices write nothing, so their mass leaves the system.
    """

    def __init__(self, params=None):
        self.params = params or PageRankParams()
        self._base = self.params.base
        self._damping = self.params.damping

    def init_vertex(self, v, out_degree):
        return 1.0

    def init_out_edge(self, u, v, out_degree):
        return 1.0 / out_degree

    def update(self, ctx):
        total = float(np.sum(ctx.in_values, dtype=np.float64)) if len(ctx.in_values) else 0.0
        ctx.value = self._base + self._damping * total
        if ctx.out_degree:
            ctx.broadcast(ctx.value / ctx.out_degree)


class ConnectedComponents(UpdateFunction):
    """Min-label propagation.

    Weak components need both directions of every edge present in the
    shards (ingest with ``undirected=True``).
    """

    def init_vertex(self, v, out_degree):
        return float(v)

    def init_out_edge(self, u, v, out_degree):
        return float(u)

    def update(self, ctx):
        label = ctx.value
        if len(ctx.in_values):
            label = min(label, float(ctx.in_values.min()))
        ctx.value = label
        if ctx.out_degree:
            ctx.broadcast(label)


def pagerank_update_function(params=None):
    return PageRank(params)


def wcc_update_function():
    return ConnectedComponents()


def pagerank_oracle(edges, n, params=None, tolerance=1e-7):
    """Synchronous float64 power iteration of the PageRank kernel."""
    params = params or PageRankParams()
    rec = as_edge_records(edges)
    src = rec["src"].astype(np.int64)
    dst = rec["dst"].astype(np.int64)
    out_deg = np.bincount(src, minlength=n).astype(np.float64)
    share = np.zeros(n)
    has_out = out_deg > 0
    x = np.ones(n)
    for _ in range(ORACLE_MAX_ITERATIONS):
        share[has_out] = x[has_out] / out_deg[has_out]
        new = params.base + params.damping * np.bincount(dst, weights=share[src], minlength=n)
        delta = float(np.max(np.abs(new - x))) if n else 0.0
        x = new
        if delta < tolerance:
            return x
    raise NoConvergence(ORACLE_MAX_ITERATIONS, delta)


class UnionFind:
    """Disjoint sets over ``0..n-1``; the root of a set is its smallest member."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            self.parent[hi] = lo


def wcc_oracle(edges, n):
    uf = UnionFind(n)
    rec = as_edge_records(edges)
    for u, v in zip(rec["src"].tolist(), rec["dst"].tolist()):
        uf.union(u, v)
    return [uf.find(v) for v in range(n)]


def format_value(value):
    """Shortest decimal that round-trips at the value's own precision."""
    if not isinstance(value, np.floating):
        value = np.float64(value)
    return np.format_float_positional(value, unique=True, trim="0")


def write_values_text(path, values, integer=False):
    """``vertex_id value`` per line, dense ids."""
    with open(path, "w") as f:
        for v, x in enumerate(values):
            f.write(f"{v} {int(x) if integer else format_value(x)}\n")


def export_values(values, text_path=None, binary_path=None, integer=False, bits=32):
    if text_path:
        write_values_text(text_path, values, integer)
    if binary_path:
        write_value_file(binary_path, values, bits)


ALGORITHMS = {
    "pagerank": pagerank_update_function,
    "wcc": wcc_update_function,
}
