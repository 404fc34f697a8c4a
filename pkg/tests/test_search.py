import random

import pytest
from hypothesis import given, settings

from permweyl.algebra import image_in_subalgebra
from permweyl.dynamics import is_automorphism, ordered_permutation_graph
from permweyl.permgraph import build_permutation_graph, check_subgraph_conditions, recover_permutation
from permweyl.permutations import count_endpoint_fixing, enumerate_endpoint_fixing, parse_cycles
from permweyl.search import (AllOf, AlwaysTrue, FixedPointConstraint, PatternConstraint,
                             RejectFirstEdge, SearchCapExceeded, SearchConfig, count,
                             derived_automorphism_count, enumerate_automorphisms,
                             enumerate_constrained, enumerate_endomorphisms,
                             enumerate_outer_classes, run_search)

from conftest import graphs


def brute(g, k):
    autos = [t for t in enumerate_endpoint_fixing(g, k) if is_automorphism(build_permutation_graph(t))]
    keys = {ordered_permutation_graph(build_permutation_graph(t)).key for t in autos}
    return set(autos), keys


def searched(g, k, **kw):
    autos = {recover_permutation(pg) for pg in enumerate_automorphisms(g, SearchConfig(level=k, **kw))}
    keys = [og.key for og in enumerate_outer_classes(g, SearchConfig(level=k, **kw))]
    return autos, keys


@pytest.mark.parametrize("k,n_auto,n_cls", [(1, 1, 1), (2, 2, 2), (3, 32, 4)])
def test_bowtie_counts(bt, k, n_auto, n_cls):
    assert count(bt, SearchConfig(level=k, mode="all-automorphisms")) == n_auto
    assert count(bt, SearchConfig(level=k, mode="outer-classes")) == n_cls
    assert derived_automorphism_count(bt, k, n_cls) == n_auto


def test_bowtie_level3_contains_representatives(bt):
    autos, keys = searched(bt, 3)
    for text in ("Id", "(dfe,cab)", "(bde,bcb)(ede,ecb)", "(bde,bcb)(dfe,cab)(ede,ecb)"):
        t = parse_cycles(bt, 3, text)
        assert t in autos
        assert ordered_permutation_graph(build_permutation_graph(t)).key in keys


def test_bowtie_level2_oracle(bt):
    autos, keys = searched(bt, 2)
    b_autos, b_keys = brute(bt, 2)
    assert autos == b_autos and set(keys) == b_keys


def test_o3_level1(o3):
    # six edge permutations, all automorphisms, pairwise inequivalent
    assert count(o3, SearchConfig(level=1, mode="outer-classes")) == 6
    assert count(o3, SearchConfig(level=1, mode="all-automorphisms")) == 6


@settings(max_examples=40)
@given(graphs())
def test_oracle_equivalence(g):
    for k in (1, 2, 3):
        if count_endpoint_fixing(g, k) > 2000:
            continue
        autos, keys = searched(g, k)
        b_autos, b_keys = brute(g, k)
        assert autos == b_autos
        assert len(keys) == len(set(keys))
        assert set(keys) == b_keys


@settings(max_examples=25)
@given(graphs())
def test_endomorphisms_are_all_perms(g):
    k = 2
    if count_endpoint_fixing(g, k) > 2000:
        return
    got = {recover_permutation(pg) for pg in enumerate_endomorphisms(g, SearchConfig(level=k))}
    assert got == set(enumerate_endpoint_fixing(g, k))


def test_endomorphism_cap(bt):
    with pytest.raises(SearchCapExceeded):
        run_search(bt, SearchConfig(level=3, mode="all-endomorphisms", endomorphism_cap=1000))


def test_python_kernel_agrees(bt, o3):
    for g, k in ((bt, 3), (o3, 2)):
        for mode in ("all-automorphisms", "outer-classes"):
            cfg = SearchConfig(level=k, mode=mode, emit="count-only")
            assert run_search(g, cfg).count == run_search(g, cfg, python=True).count


def test_parallel_determinism(bt, o3):
    for g, k, mode in ((bt, 3, "all-automorphisms"), (o3, 2, "outer-classes")):
        one = run_search(g, SearchConfig(level=k, mode=mode, jobs=1))
        three = run_search(g, SearchConfig(level=k, mode=mode, jobs=3))
        key = (lambda x: x.key) if mode == "outer-classes" else (lambda x: tuple(sorted(x.edges)))
        assert [key(x) for x in one.items] == [key(x) for x in three.items]
        assert one.count == three.count


def test_o3_no_duplicates_and_mes_consistency(o3):
    ogs = list(enumerate_outer_classes(o3, SearchConfig(level=2)))
    assert len(ogs) == 96 == len({og.key for og in ogs})
    for og in random.Random(0).sample(ogs, 20):
        again = ordered_permutation_graph(build_permutation_graph(og.representative()))
        assert again.key == og.key


def test_pruning_replay(bt):
    # every prefix of an emitted graph's edges is a valid partial graph
    rng = random.Random(1)
    for pg in enumerate_automorphisms(bt, SearchConfig(level=3)):
        edges = list(pg.edges)
        rng.shuffle(edges)
        for n in range(len(edges) + 1):
            assert check_subgraph_conditions(pg.with_edges(edges[:n]))


def test_trivial_constraints(bt):
    plain = [tuple(sorted(pg.edges)) for pg in enumerate_automorphisms(bt, SearchConfig(level=3))]
    cfg = SearchConfig(level=3, mode="all-automorphisms", constraint=AlwaysTrue())
    assert [tuple(sorted(pg.edges)) for pg in enumerate_constrained(bt, cfg)] == plain
    cfg = SearchConfig(level=3, mode="all-automorphisms", constraint=RejectFirstEdge())
    assert list(enumerate_constrained(bt, cfg)) == []


def _fixes(t, prefixes):
    g = t.graph
    return all(t(p) == p for p in g.paths(t.level) if g.edges[p[0]] in prefixes)


@pytest.mark.parametrize("prefixes", [{"c", "e", "f"}, {"a"}, {"b", "d"}])
def test_fixed_point_constraint(bt, prefixes):
    autos, _ = searched(bt, 3)
    cfg = SearchConfig(level=3, mode="all-automorphisms", constraint=FixedPointConstraint(frozenset(prefixes)))
    got = {recover_permutation(pg) for pg in enumerate_constrained(bt, cfg)}
    assert got == {t for t in autos if _fixes(t, prefixes)}


def test_pattern_constraint_matches_algebra(bt):
    groups = [["a", "b", "d"], ["c", "e", "f"]]
    for k in (2, 3):
        autos, _ = searched(bt, k)
        want = {t for t in autos
                if image_in_subalgebra(build_permutation_graph(t), groups, targets=[0]).inside}
        cfg = SearchConfig(level=k, mode="all-automorphisms",
                           constraint=PatternConstraint(bt, groups, targets=[0]))
        got = {recover_permutation(pg) for pg in enumerate_constrained(bt, cfg)}
        assert got == want


def test_pattern_constraint_rejects_bad_partitions(bt):
    with pytest.raises(ValueError):
        PatternConstraint(bt, [["a", "b"], ["c", "e", "f"]])
    with pytest.raises(ValueError):
        PatternConstraint(bt, [["a", "c", "d"], ["b", "e", "f"]])


def test_allof(bt):
    groups = [["a", "b", "d"], ["c", "e", "f"]]
    both = AllOf(FixedPointConstraint(frozenset("cef")), PatternConstraint(bt, groups, targets=[0]))
    cfg = SearchConfig(level=3, mode="all-automorphisms", constraint=both)
    got = {recover_permutation(pg) for pg in enumerate_constrained(bt, cfg)}
    autos, _ = searched(bt, 3)
    want = {t for t in autos if _fixes(t, "cef")
            and image_in_subalgebra(build_permutation_graph(t), groups, targets=[0]).inside}
    assert got == want and got


def test_budget_reports_incomplete(bt):
    res = run_search(bt, SearchConfig(level=4, mode="outer-classes", emit="count-only", node_budget=1000))
    assert not res.complete and res.reason
