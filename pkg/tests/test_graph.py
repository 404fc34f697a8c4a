from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from permweyl.graph import (Graph, GraphFormatError, bowtie, builtin_graph, cuntz, golden_mean,
                            load_graph, parse_graph_json, parse_graph_text, validate)

from conftest import graphs

TESTDATA = Path(__file__).resolve().parent.parent / "testdata"


def test_bowtie_valid(bt):
    assert validate(bt).valid
    assert bt.num_vertices == 3 and bt.num_edges == 6


def test_single_loop_has_no_exit():
    rep = validate(Graph("u", [("x", "u", "u")]))
    assert not rep.valid
    assert any("no exit" in p for p in rep.problems)


def test_sink_and_source():
    rep = validate(Graph("uv", [("x", "u", "v")]))
    text = " ".join(rep.problems)
    assert "v is a sink" in text and "u is a source" in text


def test_cycle_with_exit_elsewhere_still_flagged():
    # a 2-cycle whose vertices both emit one edge, next to a healthy component
    g = Graph("abc", [("x", "a", "b"), ("y", "b", "a"), ("p", "c", "c"), ("q", "c", "c")])
    assert not validate(g).valid


@pytest.mark.parametrize("k,n", [(1, 6), (2, 12), (3, 24), (4, 48), (5, 96)])
def test_bowtie_path_counts(bt, k, n):
    assert len(bt.paths(k)) == n == 3 * 2**k


def test_free_monoid_paths():
    g = Graph("u", [("x", "u", "u"), ("y", "u", "u")])
    assert [g.path_name(p) for p in g.paths(2)] == ["xx", "xy", "yx", "yy"]


def test_golden_mean_level3(gm):
    names = {gm.path_name(p) for p in gm.paths(3)}
    assert {"111", "132", "321", "113", "323"} <= names


def test_k0_rejected(bt):
    with pytest.raises(ValueError):
        bt.paths(0)


def _profile(g, k):
    by_src = {}
    for (u, v), n in g.count_paths_by_endpoints(k).items():
        by_src.setdefault(u, []).append(n)
    return Counter(tuple(sorted(ns)) for ns in by_src.values())


def test_bowtie_class_profiles(bt):
    assert _profile(bt, 2) == Counter({(1, 1, 2): 3})
    assert _profile(bt, 3) == Counter({(2, 3, 3): 3})
    assert _profile(bt, 4) == Counter({(5, 5, 6): 3})


def test_level1_counts_are_multiplicities(o3, bt):
    assert o3.count_paths_by_endpoints(1) == {(0, 0): 3}
    assert sum(bt.count_paths_by_endpoints(1).values()) == 6


def test_base_order():
    # declared out of order; ranks follow (source, range, declaration)
    g = Graph("uv", [("z", "v", "u"), ("y", "u", "v"), ("x", "u", "u"), ("w", "u", "u"), ("t", "v", "v")])
    assert g.edges == ("x", "w", "y", "z", "t")


@given(graphs(max_vertices=5, max_edges=10))
def test_paths_sorted_unique(g):
    for k in (1, 2, 3):
        ps = g.paths(k)
        assert ps == sorted(set(ps))
        assert all(g.is_path(p) for p in ps)


@given(graphs(max_vertices=5, max_edges=10))
def test_counts_match_adjacency_power(g):
    a = g.adjacency().astype(object)
    power = np.identity(g.num_vertices, dtype=object)
    for k in range(1, 5):
        power = power.dot(a)
        counts = g.count_paths_by_endpoints(k)
        for u in range(g.num_vertices):
            for v in range(g.num_vertices):
                assert counts.get((u, v), 0) == power[u, v]


@given(graphs(max_vertices=5, max_edges=10))
def test_path_extension_identity(g):
    for k in range(2, 6):
        total = sum(g.count_paths_by_endpoints(k).values())
        ext = sum(sum(n for (u, _), n in g.count_paths_by_endpoints(k - 1).items() if u == g.rng[e])
                  for e in range(g.num_edges))
        assert total == ext


def test_text_roundtrip(bt):
    g = parse_graph_text(bt.to_text())
    assert g.to_json() == bt.to_json()
    assert parse_graph_json(bt.to_json()).digest == bt.digest


def test_testdata_matches_builtins():
    assert load_graph(TESTDATA / "bowtie.graph").digest == bowtie().digest
    assert load_graph(TESTDATA / "golden.graph").digest == golden_mean().digest
    assert load_graph(TESTDATA / "o3.graph").digest == cuntz(3).digest
    assert builtin_graph("o2").digest == cuntz(2).digest


@pytest.mark.parametrize("text,needle", [
    ("vertex u\nvertex u\n", "line 2: duplicate vertex"),
    ("vertex u\nedge a u v\n", "line 2: edge 'a' uses undeclared vertex 'v'"),
    ("vertex u\nedge a u u\nedge a u u\n", "line 3: duplicate edge"),
    ("vertex u\nedgy a u u\n", "line 2: cannot parse"),
])
def test_parse_errors(text, needle):
    with pytest.raises(GraphFormatError, match=needle):
        parse_graph_text(text)


def test_json_errors():
    with pytest.raises(GraphFormatError, match=r"edges\[0\]"):
        parse_graph_json({"vertices": ["u"], "edges": [{"name": "a", "source": "u", "target": "x"}]})
    with pytest.raises(GraphFormatError):
        parse_graph_json({"vertices": ["u"]})


def test_digest_is_content_based(bt):
    assert bt.digest == bowtie().digest
    assert bt.digest != golden_mean().digest
    assert len(bt.digest) == 16 and int(bt.digest, 16) >= 0
