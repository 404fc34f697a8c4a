import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from permweyl.permutations import (CapExceeded, CycleNotationError, EndpointFixingPermutation,
                                   count_endpoint_fixing, enumerate_endpoint_fixing, format_cycles,
                                   parse_cycles, permutation_from_json, random_endpoint_fixing)

from conftest import graphs

TAU4 = "(abde,bdfe,bcab)(ecab,edfe)"


def test_bowtie_counts(bt):
    assert count_endpoint_fixing(bt, 1) == 1
    assert count_endpoint_fixing(bt, 2) == 8
    assert count_endpoint_fixing(bt, 3) == 373_248 == (2 * 6 * 6)**3
    big = count_endpoint_fixing(bt, 4)
    assert big == (math.factorial(5)**2 * math.factorial(6))**3
    assert 1.0e21 < big < 1.2e21


def test_all_classes_singletons_gives_identity_only(bt):
    perms = list(enumerate_endpoint_fixing(bt, 1))
    assert len(perms) == 1 and perms[0].is_identity


def test_enumeration_bowtie_level2(bt):
    perms = list(enumerate_endpoint_fixing(bt, 2))
    assert len(perms) == 8 == len(set(perms))
    assert perms[0].is_identity


def test_enumeration_golden_level3(gm):
    # brute force over all bijections of E^3 that keep endpoints
    ps = gm.paths(3)
    ends = [(gm.path_source(p), gm.path_range(p)) for p in ps]
    brute = sum(all(ends[i] == ends[j] for i, j in enumerate(img))
                for img in itertools.permutations(range(len(ps))))
    assert len(list(enumerate_endpoint_fixing(gm, 3))) == count_endpoint_fixing(gm, 3) == brute


def test_cap_refuses_with_exact_count(bt):
    with pytest.raises(CapExceeded, match="373248"):
        next(enumerate_endpoint_fixing(bt, 3, cap=1000))


def test_parse_examples(bt):
    t = parse_cycles(bt, 2, "(de, cb)")
    de, cb = bt.parse_path("de"), bt.parse_path("cb")
    assert t(de) == cb and t(cb) == de
    assert parse_cycles(bt, 3, "Id").is_identity
    t4 = parse_cycles(bt, 4, TAU4)
    assert t4(bt.parse_path("abde")) == bt.parse_path("bdfe")
    assert t4(bt.parse_path("bcab")) == bt.parse_path("abde")


def test_format(bt):
    assert format_cycles(EndpointFixingPermutation.identity(bt, 2)) == "Id"
    # cycles start at, and are sorted by, their least path
    assert format_cycles(parse_cycles(bt, 2, "(de,cb)")) == "(cb,de)"
    assert format_cycles(parse_cycles(bt, 4, TAU4)) == "(abde,bdfe,bcab)(ecab,edfe)"


@pytest.mark.parametrize("text,needle", [
    ("(dx,cb)", "unknown path"),
    ("(de,cb)(de,cb)", "more than once"),
    ("(de,ab)", "does not share source and range"),
    ("(de,cb", "cannot parse"),
    ("(d,c)", "length 1, expected 2"),
])
def test_parse_errors(bt, text, needle):
    with pytest.raises(CycleNotationError, match=needle):
        parse_cycles(bt, 2, text)


def test_dotted_names():
    from permweyl.graph import Graph
    g = Graph("u", [("e1", "u", "u"), ("e2", "u", "u")])
    t = parse_cycles(g, 2, "(e1.e2, e2.e1)")
    assert format_cycles(t) == "(e1.e2,e2.e1)"


def test_json_roundtrip(bt):
    t = parse_cycles(bt, 4, TAU4)
    assert t.to_json()["level"] == 4
    assert permutation_from_json(bt, t.to_json()) == t


@given(graphs(), st.integers(1, 3), st.integers(0, 10**6))
def test_roundtrip_and_inverse(g, k, seed):
    rng = random.Random(seed)
    for _ in range(5):
        t = random_endpoint_fixing(g, k, rng)
        assert parse_cycles(g, k, format_cycles(t)) == t
        inv = t.inverse()
        for p in g.paths(k):
            assert inv(t(p)) == p
            assert g.path_source(t(p)) == g.path_source(p)
            assert g.path_range(t(p)) == g.path_range(p)


@given(graphs())
def test_stream_length_matches_count(g):
    for k in (1, 2, 3):
        n = count_endpoint_fixing(g, k)
        if n <= 10**4:
            assert sum(1 for _ in enumerate_endpoint_fixing(g, k)) == n
