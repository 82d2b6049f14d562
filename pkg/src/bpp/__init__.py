"""BiShard Parallel out-of-core graph engine."""

from .algorithms import (
    ConnectedComponents,
    PageRank,
    PageRankParams,
    pagerank_oracle,
    pagerank_update_function,
    wcc_oracle,
    wcc_update_function,
)
from .engine import RunConfig, RunReport, UpdateFunction, VertexContext, run, run_init_pass, run_interval
from .ingest import GraphStats, IdMap, RawEdge, ingest_file, parse_edge_list, remap_ids
from .sharder import GraphManifest, IntervalRange, build_shards, partition_intervals, read_manifest, shard_graph, write_manifest
from .storage import IntervalSubgraph, IoMetrics, ShardStore

__all__ = [
    "ConnectedComponents", "GraphManifest", "GraphStats", "IdMap", "IntervalRange",
    "IntervalSubgraph", "IoMetrics", "PageRank", "PageRankParams", "RawEdge", "RunConfig",
    "RunReport", "ShardStore", "UpdateFunction", "VertexContext", "build_shards",
    "ingest_file", "pagerank_oracle", "pagerank_update_function", "parse_edge_list",
    "partition_intervals", "read_manifest", "remap_ids", "run", "run_init_pass",
    "run_interval", "shard_graph", "wcc_oracle", "wcc_update_function", "write_manifest",
]
