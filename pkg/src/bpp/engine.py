"""Execution-interval driver.

Each pass visits intervals in ascending order: load, update every vertex,
write back. A vertex reads its in-edges from the snapshot taken at load
time, so a value written by a co-resident vertex becomes visible on the
next pass, while values scattered to later intervals are seen in the same
pass.
"""

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UpdatePanic
from .storage import IoMetrics


class UpdateFunction:
    """Vertex kernel contract. Subclass and override what you need.

    ``update`` receives a :class:`VertexContext` and may only touch that
    context: its own value, its read-only in-edges and its own out-edge slots.
    """

    def init_vertex(self, v, out_degree):
        return 0.0

    def init_out_edge(self, u, v, out_degree):
        return 0.0

    def update(self, ctx):
        pass


class VertexContext:
    __slots__ = ("id", "value", "in_sources", "in_values", "out_dests", "out_degree",
                 "iteration", "_slots", "_written")

    def __init__(self, vid, value, in_sources, in_values, out_dests, slots, written, iteration):
        self.id = vid
        self.value = value
        self.in_sources = in_sources
        self.in_values = in_values
        self.out_dests = out_dests
        self.out_degree = len(out_dests)
        self.iteration = iteration
        self._slots = slots
        self._written = written

    def set_out_edge(self, i, value):
        self._slots[i] = value
        self._written[i] = True

    def broadcast(self, value):
        """Write ``value`` into every out-edge slot."""
        self._slots[:] = value
        self._written[:] = True


@dataclass
class RunConfig:
    max_iterations: int = 10
    convergence_tolerance: float = 0.0
    worker_count: int = 1
    init_pass: bool = True

    def validate(self):
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations!r}")
        tol = self.convergence_tolerance
        if not (tol >= 0 and math.isfinite(tol)):
            raise ConfigError(f"convergence_tolerance must be a finite value >= 0, got {tol!r}")
        if self.worker_count < 0:
            raise ConfigError(f"worker_count must be >= 0, got {self.worker_count}")

    def workers(self):
        return self.worker_count or (os.cpu_count() or 1)


@dataclass
class RunReport:
    iterations: int
    final_delta: float
    converged: bool
    wall_seconds: float
    metrics: IoMetrics  # iteration passes only, init pass excluded
    init_metrics: IoMetrics


def _chunks(count, workers):
    workers = max(1, min(workers, count))
    step, extra = divmod(count, workers)
    start = 0
    for w in range(workers):
        end = start + step + (1 if w < extra else 0)
        yield start, end
        start = end


def _update_range(sub, fn, lo, hi, iteration):
    in_ptr, out_ptr = sub.in_ptr, sub.out_ptr
    values = sub.values
    for i in range(lo, hi):
        vid = sub.first + i
        a, b = in_ptr[i], in_ptr[i + 1]
        c, d = out_ptr[i], out_ptr[i + 1]
        ctx = VertexContext(vid, float(values[i]), sub.in_src[a:b], sub.in_val[a:b],
                            sub.out_dst[c:d], sub.out_val[c:d], sub.out_written[c:d], iteration)
        try:
            fn.update(ctx)
        except Exception as e:
            raise UpdatePanic(vid, e) from e
        values[i] = ctx.value


def run_interval(sub, fn, worker_count=1, iteration=0):
    """Apply ``fn.update`` once to every vertex of ``sub``, in place.

    Vertices are split into contiguous ranges, one per worker. Each vertex
    owns disjoint state, so the result does not depend on ``worker_count``.
    """
    k = sub.vertex_count
    if k == 0:
        return
    if worker_count <= 1 or k == 1:
        _update_range(sub, fn, 0, k, iteration)
        return
    with ThreadPoolExecutor(max_workers=worker_count) as pool:
        futures = [pool.submit(_update_range, sub, fn, lo, hi, iteration)
                   for lo, hi in _chunks(k, worker_count)]
        for f in futures:
            f.result()


def run_init_pass(store, fn):
    """Set every vertex value and every edge value from the init hooks."""
    mf = store.manifest
    for p in range(mf.P):
        sub = store.load_interval(p)
        if sub.vertex_count == 0:
            continue
        for i, v in enumerate(sub.vertices()):
            deg = int(sub.out_degree[i])
            sub.values[i] = fn.init_vertex(v, deg)
            a, b = sub.out_ptr[i], sub.out_ptr[i + 1]
            for j in range(a, b):
                sub.out_val[j] = fn.init_out_edge(v, int(sub.out_dst[j]), deg)
        sub.out_written[:] = True
        store.write_back(sub)


def run(store, fn, config=None):
    """Run ``fn`` over the sharded graph behind ``store``.

    Stops after ``max_iterations`` passes, or earlier once the largest
    per-vertex change in a pass drops below ``convergence_tolerance``.
    """
    config = config or RunConfig()
    config.validate()
    workers = config.workers()
    start = time.perf_counter()
    before_init = store.snapshot_metrics()
    if config.init_pass:
        run_init_pass(store, fn)
    after_init = store.snapshot_metrics()

    delta = math.inf
    converged = False
    iterations = 0
    for it in range(config.max_iterations):
        delta = 0.0
        for p in range(store.manifest.P):
            sub = store.load_interval(p)
            run_interval(sub, fn, workers, iteration=it)
            if sub.vertex_count:
                change = np.abs(sub.values.astype(np.float64) - sub.loaded_values.astype(np.float64))
                delta = max(delta, float(change.max()))
            store.write_back(sub)
        iterations = it + 1
        if config.convergence_tolerance > 0 and delta < config.convergence_tolerance:
            converged = True
            break

    return RunReport(
        iterations=iterations,
        final_delta=delta,
        converged=converged,
        wall_seconds=time.perf_counter() - start,
        metrics=store.snapshot_metrics() - after_init,
        init_metrics=after_init - before_init,
    )
