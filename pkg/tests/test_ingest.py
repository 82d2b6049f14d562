import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpp.errors import EmptyGraph, MalformedLine
from bpp.formats import read_edge_file
from bpp.ingest import IdMap, RawEdge, add_reciprocal_edges, ingest_file, parse_edge_list, remap_ids


def lines(*rows):
    return io.StringIO("\n".join(rows) + "\n")


def test_parse_plain():
    edges, diag = parse_edge_list(lines("0 1", "0 2", "1 2"))
    assert edges == [(0, 1), (0, 2), (1, 2)]
    assert diag.data_lines == 3


def test_parse_skips_comments_and_blanks():
    edges, diag = parse_edge_list(lines("# header", "", "5 7"))
    assert edges == [RawEdge(5, 7)]
    assert diag.comment_lines == 1
    assert diag.blank_lines == 1


def test_parse_tab_separated_with_extra_tokens():
    edges, diag = parse_edge_list(lines("3\t4", "4 5 1.0"))
    assert edges == [(3, 4), (4, 5)]
    assert diag.extra_token_lines == [2]


@pytest.mark.parametrize("bad", ["7", "a b", "1 -2", "1.5 2"])
def test_parse_malformed_reports_line(bad):
    with pytest.raises(MalformedLine) as exc:
        parse_edge_list(lines("0 1", "# c", bad))
    assert exc.value.line_no == 3


def test_duplicates_kept_by_default_and_dropped_on_request():
    edges, _ = parse_edge_list(lines("0 1", "0 1", "1 0"))
    assert len(edges) == 3
    edges, diag = parse_edge_list(lines("0 1", "0 1", "1 0"), allow_duplicates=False)
    assert edges == [(0, 1), (1, 0)]
    assert diag.duplicates_dropped == 1


def test_custom_comment_prefix():
    edges, _ = parse_edge_list(lines("% x", "1 2"), comment_prefix="%")
    assert edges == [(1, 2)]


def test_remap_first_appearance():
    dense, id_map, stats = remap_ids([RawEdge(5, 7), RawEdge(7, 5)])
    assert dense.tolist() == [(0, 1), (1, 0)]
    assert (stats.vertex_count, stats.edge_count) == (2, 2)
    assert id_map.to_external == [5, 7]


def test_remap_self_loop():
    dense, _, stats = remap_ids([RawEdge(3, 3)])
    assert dense.tolist() == [(0, 0)]
    assert stats.vertex_count == 1
    assert stats.max_out_degree == 1
    assert stats.max_in_degree == 1


def test_remap_empty():
    with pytest.raises(EmptyGraph):
        remap_ids([])


def test_remap_hundred_edges_twenty_ids():
    rng = np.random.default_rng(7)
    while True:
        pairs = rng.integers(10, 30, size=(100, 2))
        if len(set(pairs.ravel().tolist())) == 20:
            break
    raw = [RawEdge(int(a), int(b)) for a, b in pairs]
    dense, _, stats = remap_ids(raw)
    assert stats.vertex_count == 20
    assert stats.edge_count == 100
    assert set(dense["src"].tolist()) | set(dense["dst"].tolist()) == set(range(20))


edge_lists = st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 10**6)), min_size=1, max_size=60)


@given(edge_lists)
def test_remap_round_trip_and_degree_sums(pairs):
    raw = [RawEdge(*p) for p in pairs]
    dense, id_map, stats = remap_ids(raw)
    back = [(id_map.external(s), id_map.external(d)) for s, d in dense.tolist()]
    assert back == pairs
    n = stats.vertex_count
    assert n == len({x for p in pairs for x in p})
    assert set(dense["src"].tolist()) | set(dense["dst"].tolist()) == set(range(n))
    out_deg = np.bincount(dense["src"], minlength=n)
    in_deg = np.bincount(dense["dst"], minlength=n)
    assert out_deg.sum() == in_deg.sum() == stats.edge_count
    assert stats.max_out_degree == out_deg.max()
    assert stats.max_in_degree == in_deg.max()


def test_reciprocal_edges():
    out = add_reciprocal_edges([RawEdge(0, 1), RawEdge(1, 2), RawEdge(2, 1), RawEdge(3, 3)])
    assert sorted(out) == [(0, 1), (1, 0), (1, 2), (2, 1), (3, 3)]


def test_idmap_file_round_trip(tmp_path):
    m = IdMap([42, 7, 1000])
    m.write(tmp_path / "idmap.txt")
    assert (tmp_path / "idmap.txt").read_text() == "0 42\n1 7\n2 1000\n"
    assert IdMap.read(tmp_path / "idmap.txt") == m


def test_ingest_file_writes_canonical_edge_file(tmp_path):
    src = tmp_path / "g.txt"
    src.write_text("# FromNodeId ToNodeId\n30 10\n10 20\n")
    stats, _ = ingest_file(src, tmp_path / "out")
    raw = (tmp_path / "out" / "edges.bin").read_bytes()
    assert raw[:8] == b"BPEDGE01"
    assert int.from_bytes(raw[8:16], "little") == 2
    assert raw[16:] == bytes([0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0])
    assert read_edge_file(tmp_path / "out" / "edges.bin").tolist() == [(0, 1), (1, 2)]
    assert (tmp_path / "out" / "idmap.txt").read_text() == "0 30\n1 10\n2 20\n"
    assert stats.vertex_count == 3
