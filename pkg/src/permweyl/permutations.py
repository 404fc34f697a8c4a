"""Endpoint-fixing permutations of the path set E^k and their cycle notation."""

from __future__ import annotations

import itertools
import json
import math
import re
from functools import cached_property

from .graph import Graph


class CycleNotationError(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


class EndpointFixingPermutation:
    """A bijection of the length-``level`` paths that preserves every class E^k_{u->v}.

    Stored as one index array per (u, v) class: ``arrays[c][i] = j`` means the
    i-th path of class ``c`` is sent to its j-th path. Classes and their
    members follow :meth:`Graph.level`.
    """

    __slots__ = ("graph", "level", "arrays", "__dict__")

    def __init__(self, graph: Graph, level: int, arrays):
        if level < 1:
            raise ValueError("level must be >= 1")
        self.graph = graph
        self.level = level
        lv = graph.level(level)
        keys = list(lv.blocks)
        arrays = tuple(tuple(a) for a in arrays)
        if len(arrays) != len(keys):
            raise ValueError("one array per (source, range) class is required")
        for key, arr in zip(keys, arrays):
            if sorted(arr) != list(range(len(lv.blocks[key]))):
                raise ValueError(f"array for class {key} is not a permutation")
        self.arrays = arrays

    @classmethod
    def identity(cls, graph: Graph, level: int) -> EndpointFixingPermutation:
        lv = graph.level(level)
        return cls(graph, level, [range(len(m)) for m in lv.blocks.values()])

    @classmethod
    def from_mapping(cls, graph: Graph, level: int, mapping) -> EndpointFixingPermutation:
        """Build from a (partial) dict path -> path; unnamed paths are fixed."""
        lv = graph.level(level)
        arrays = []
        for key, members in lv.blocks.items():
            pos = {lv.words[i]: n for n, i in enumerate(members)}
            arr = []
            for i in members:
                w = lv.words[i]
                img = tuple(mapping.get(w, w))
                if img not in pos:
                    raise ValueError(f"{graph.path_name(w)} -> {graph.path_name(img)} "
                                     "does not preserve source and range")
                arr.append(pos[img])
            arrays.append(arr)
        return cls(graph, level, arrays)

    @cached_property
    def mapping(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        lv = self.graph.level(self.level)
        out = {}
        for members, arr in zip(lv.blocks.values(), self.arrays):
            for n, i in enumerate(members):
                out[lv.words[i]] = lv.words[members[arr[n]]]
        return out

    def __call__(self, path) -> tuple[int, ...]:
        return self.mapping[tuple(path)]

    def inverse(self) -> EndpointFixingPermutation:
        inv = []
        for arr in self.arrays:
            a = [0] * len(arr)
            for i, j in enumerate(arr):
                a[j] = i
            inv.append(a)
        return EndpointFixingPermutation(self.graph, self.level, inv)

    @property
    def is_identity(self) -> bool:
        return all(tuple(a) == tuple(range(len(a))) for a in self.arrays)

    def cycles(self) -> list[list[tuple[int, ...]]]:
        """Nontrivial cycles, each starting at its least path, sorted by that path."""
        seen = set()
        out = []
        for p in self.graph.paths(self.level):
            if p in seen:
                continue
            cyc = [p]
            seen.add(p)
            q = self(p)
            while q != p:
                cyc.append(q)
                seen.add(q)
                q = self(q)
            if len(cyc) > 1:
                out.append(cyc)
        return out

    def __eq__(self, other):
        return (isinstance(other, EndpointFixingPermutation) and other.level == self.level
                and other.graph is self.graph and other.arrays == self.arrays)

    def __hash__(self):
        return hash((self.level, self.arrays))

    def __repr__(self):
        return f"EndpointFixingPermutation(level={self.level}, {format_cycles(self)})"

    def to_json(self) -> dict:
        name = self.graph.path_name
        return {"level": self.level, "cycles": [[name(p) for p in c] for c in self.cycles()]}


def count_endpoint_fixing(graph: Graph, k: int) -> int:
    counts = graph.count_paths_by_endpoints(k)
    return math.prod(math.factorial(n) for n in counts.values())


def enumerate_endpoint_fixing(graph: Graph, k: int, cap: int = 10**7):
    """Yield every endpoint-fixing permutation at level ``k``, identity first."""
    total = count_endpoint_fixing(graph, k)
    if total > cap:
        raise CapExceeded(f"{total} endpoint-fixing permutations at level {k} exceeds cap {cap}")
    sizes = [len(m) for m in graph.level(k).blocks.values()]
    for arrays in itertools.product(*(itertools.permutations(range(n)) for n in sizes)):
        yield EndpointFixingPermutation(graph, k, arrays)


def random_endpoint_fixing(graph: Graph, k: int, rng) -> EndpointFixingPermutation:
    arrays = []
    for members in graph.level(k).blocks.values():
        a = list(range(len(members)))
        rng.shuffle(a)
        arrays.append(a)
    return EndpointFixingPermutation(graph, k, arrays)


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(graph: Graph, k: int, text: str) -> EndpointFixingPermutation:
    """Parse ``"Id"`` or ``"(p1, p2, ...)(q1, ...)"``; whitespace is ignored."""
    body = re.sub(r"\s+", "", text)
    if body in ("Id", "id", ""):
        return EndpointFixingPermutation.identity(graph, k)
    if _CYCLE.sub("", body):
        raise CycleNotationError(f"cannot parse permutation {text!r}")
    mapping = {}
    owner = {}
    for ci, group in enumerate(_CYCLE.findall(body)):
        names = group.split(",")
        cyc = []
        for name in names:
            try:
                p = graph.parse_path(name)
            except ValueError as exc:
                raise CycleNotationError(f"unknown path {name!r}: {exc}") from None
            if len(p) != k:
                raise CycleNotationError(f"path {name!r} has length {len(p)}, expected {k}")
            if p in owner:
                raise CycleNotationError(f"path {name!r} appears more than once")
            owner[p] = ci
            cyc.append(p)
        ends = {(graph.path_source(p), graph.path_range(p)) for p in cyc}
        if len(ends) > 1:
            bad = next(p for p in cyc if (graph.path_source(p), graph.path_range(p))
                       != (graph.path_source(cyc[0]), graph.path_range(cyc[0])))
            raise CycleNotationError(f"path {graph.path_name(bad)!r} does not share source and "
                                     f"range with {graph.path_name(cyc[0])!r}")
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            mapping[a] = b
    return EndpointFixingPermutation.from_mapping(graph, k, mapping)


def format_cycles(perm: EndpointFixingPermutation) -> str:
    cycles = perm.cycles()
    if not cycles:
        return "Id"
    name = perm.graph.path_name
    return "".join("(" + ",".join(name(p) for p in c) + ")" for c in cycles)


def permutation_from_json(graph: Graph, obj) -> EndpointFixingPermutation:
    obj = json.loads(obj) if isinstance(obj, str) else obj
    k = int(obj["level"])
    text = "".join("(" + ",".join(c) + ")" for c in obj["cycles"]) or "Id"
    return parse_cycles(graph, k, text)
