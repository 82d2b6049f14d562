"""Shard-count sweep and the analytical sliding-window seek model.

The sliding-window baseline is not executed. Its seek counts come from a
closed-form model: every interval reads its own shard plus one window of
each other shard (P reads), and writes the same P windows back.
"""

import csv
import io
import os
from dataclasses import astuple, dataclass, fields

from .algorithms import ALGORITHMS
from .engine import RunConfig, run
from .errors import StorageIOError
from .sharder import shard_graph
from .storage import ShardStore


def psw_predicted_seeks(P):
    """Per-pass ``(reads, writes)`` for the sliding-window model."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    return P * P, P * P


@dataclass(frozen=True)
class PswCostModel:
    P: int

    @property
    def psw_reads(self):
        return psw_predicted_seeks(self.P)[0]

    @property
    def psw_writes(self):
        return psw_predicted_seeks(self.P)[1]

    @property
    def bp_reads(self):
        return 2 * self.P

    @property
    def bp_max_writes(self):
        return self.P * self.P

    def worst_case_ratio(self):
        """Upper bound of BP seeks over sliding-window seeks per pass."""
        return (self.bp_reads + self.bp_max_writes) / (self.psw_reads + self.psw_writes)


@dataclass
class BenchRow:
    P: int
    algorithm: str
    iterations: int
    wall_seconds: float
    edge_shard_nonseq_reads: int
    scatter_nonseq_writes: int
    bytes_read: int
    bytes_written: int
    psw_predicted_reads: int


def bench_row(P, algorithm, report):
    m = report.metrics
    return BenchRow(
        P=P,
        algorithm=algorithm,
        iterations=report.iterations,
        wall_seconds=report.wall_seconds,
        edge_shard_nonseq_reads=m.edge_shard_nonseq_reads,
        scatter_nonseq_writes=m.scatter_nonseq_writes,
        bytes_read=m.bytes_read,
        bytes_written=m.bytes_written,
        psw_predicted_reads=psw_predicted_seeks(P)[0] * report.iterations,
    )


def run_sweep(edges_path, work_dir, shard_counts, algorithm="pagerank", iterations=5,
              tolerance=0.0, workers=1, value_bits=32):
    """Re-shard the graph for every P and run ``algorithm`` on each layout."""
    make_fn = ALGORITHMS[algorithm]
    rows = []
    for P in shard_counts:
        manifest = shard_graph(edges_path, os.path.join(work_dir, f"bench-P{P}"), shards=P,
                               value_bits=value_bits)
        store = ShardStore(manifest)
        report = run(store, make_fn(), RunConfig(max_iterations=iterations,
                                                 convergence_tolerance=tolerance,
                                                 worker_count=workers))
        rows.append(bench_row(P, algorithm, report))
    return rows


def _cell(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_bench_csv(rows):
    if not rows:
        raise ValueError("no benchmark rows")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRow)])
    for row in rows:
        w.writerow([_cell(v) for v in astuple(row)])
    return buf.getvalue()


def emit_bench_csv(rows, path):
    text = format_bench_csv(rows)
    try:
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        raise StorageIOError(path, e.strerror or str(e)) from e
