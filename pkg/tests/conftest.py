import os
from pathlib import Path

import numpy as np
import pytest

from bpp.sharder import build_shards, partition_intervals, write_manifest
from bpp.storage import ShardStore

ROOT = Path(__file__).resolve().parent.parent

ACCEPTANCE_RESULTS = []


def random_edges(rng, n, m, self_loops=True):
    edges = rng.integers(0, n, size=(m, 2))
    if not self_loops:
        keep = edges[:, 0] != edges[:, 1]
        edges = edges[keep]
    return edges


def make_store(tmp_path, edges, n, shards=None, intervals=None, name="g", value_bits=32):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if intervals is None:
        in_counts = np.bincount(edges[:, 1], minlength=n) if len(edges) else np.zeros(n, dtype=int)
        intervals = partition_intervals(in_counts, shards=shards or 1)
    manifest = build_shards(edges, n, intervals, str(tmp_path / name), value_bits=value_bits)
    write_manifest(manifest)
    return ShardStore(manifest)


def wiki_vote_path():
    """Location of the SNAP wiki-Vote edge list, if present."""
    candidates = [os.environ.get("BPP_WIKI_VOTE"), ROOT / "data" / "wiki-Vote.txt",
                  ROOT / "tests" / "data" / "wiki-Vote.txt"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def wiki_vote():
    path = wiki_vote_path()
    if path is None:
        pytest.fail("wiki-Vote.txt not found: set BPP_WIKI_VOTE or place it at data/wiki-Vote.txt "
                    "(https://snap.stanford.edu/data/wiki-Vote.html)", pytrace=False)
    return path


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
