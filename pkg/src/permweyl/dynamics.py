"""Synchronization tests, induced shift maps on finite windows, and ordered permutation graphs."""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cached_property

from .graph import Graph
from .permgraph import (LabeledEdge, LabeledGraph, PermutationGraph, build_permutation_graph,
                        resolving_clashes)
from .permutations import EndpointFixingPermutation


class NotResolvingError(ValueError):
    pass


class NotSynchronizingError(ValueError):
    pass


_LABEL = {"first": lambda mu: mu.first, "second": lambda mu: mu.second}


def _label_fn(which):
    try:
        return _LABEL[which]
    except KeyError:
        raise ValueError("which must be 'first' or 'second'") from None


class PairGraph:
    """Off-diagonal pairs of vertices, joined along pairs of distinct equally labeled edges.

    An arc goes from (s(mu), s(nu)) to (r(mu), r(nu)). Arcs that touch the
    diagonal are dropped; in a resolving graph they cannot lie on a cycle of
    off-diagonal pairs.
    """

    def __init__(self, lg: LabeledGraph, which: str):
        lab = _label_fn(which)
        self.lg = lg
        self.which = which
        by_label = defaultdict(list)
        for mu in lg.edges:
            by_label[lab(mu)].append(mu)
        self.arcs: dict[tuple[int, int], list[tuple[tuple[int, int], LabeledEdge, LabeledEdge]]] = {}
        for group in by_label.values():
            for mu in group:
                for nu in group:
                    if mu is nu or mu.source == nu.source or mu.range == nu.range:
                        continue
                    self.arcs.setdefault((mu.source, nu.source), []).append(
                        ((mu.range, nu.range), mu, nu))
        n = lg.num_vertices
        self.nodes = [(a, b) for a in range(n) for b in range(n) if a != b]

    def successors(self, node):
        return [t for t, _, _ in self.arcs.get(node, ())]

    def topological_order(self):
        """Nodes in topological order, or None when there is a cycle."""
        indeg = {v: 0 for v in self.nodes}
        for v in self.nodes:
            for t in self.successors(v):
                indeg[t] += 1
        queue = deque(v for v in self.nodes if indeg[v] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for t in self.successors(v):
                indeg[t] -= 1
                if indeg[t] == 0:
                    queue.append(t)
        return order if len(order) == len(self.nodes) else None

    def find_cycle(self):
        """A shortest cycle as a list of (mu, nu) edge pairs, or None."""
        best = None
        for root in self.nodes:
            if root not in self.arcs:
                continue
            # breadth-first search back to root
            parent = {}
            queue = deque([root])
            found = False
            while queue and not found:
                node = queue.popleft()
                for t, mu, nu in self.arcs.get(node, ()):
                    if t == root:
                        parent[root] = (node, mu, nu)
                        found = True
                        break
                    if t not in parent:
                        parent[t] = (node, mu, nu)
                        queue.append(t)
            if not found:
                continue
            cyc = []
            node = root
            while True:
                prev, mu, nu = parent[node]
                cyc.append((mu, nu))
                node = prev
                if node == root:
                    break
            cyc.reverse()
            if best is None or len(cyc) < len(best):
                best = cyc
        return best


def _require_resolving(lg, which):
    clashes = resolving_clashes(lg, which)
    if clashes:
        a, b = clashes[0]
        kind = "left" if which == "first" else "right"
        raise NotResolvingError(f"not {kind}-resolving: {lg.edge_name(a)} and {lg.edge_name(b)}")


def is_synchronizing(lg: LabeledGraph, which: str) -> bool:
    """Left-synchronizing for ``first``, right-synchronizing for ``second``."""
    _require_resolving(lg, which)
    return PairGraph(lg, which).topological_order() is not None


@dataclass(frozen=True)
class SyncWitness:
    """Two distinct closed walks carrying the same label word."""

    which: str
    walk_a: tuple[LabeledEdge, ...]
    walk_b: tuple[LabeledEdge, ...]

    @property
    def label(self) -> tuple[int, ...]:
        lab = _label_fn(self.which)
        return tuple(lab(mu) for mu in self.walk_a)

    def primitive(self, walk):
        """Shortest closed walk whose repetition gives ``walk``."""
        n = len(walk)
        for d in range(1, n + 1):
            if n % d == 0 and walk == walk[:d] * (n // d):
                return walk[:d]
        return walk

    def replay(self, lg: LabeledGraph) -> bool:
        lab = _label_fn(self.which)
        edges = set(lg.edges)
        for w in (self.walk_a, self.walk_b):
            if not w or not all(mu in edges for mu in w):
                return False
            if any(w[i].range != w[(i + 1) % len(w)].source for i in range(len(w))):
                return False
        if [lab(m) for m in self.walk_a] != [lab(m) for m in self.walk_b]:
            return False
        return self.walk_a != self.walk_b

    def describe(self, lg: LabeledGraph) -> str:
        g = lg.graph
        lab = _label_fn(self.which)
        parts = []
        for w in (self.walk_a, self.walk_b):
            p = self.primitive(w)
            word = lg.graph.path_name(tuple(lab(m) for m in p)) if g.single_char_names else \
                ".".join(g.edges[lab(m)] for m in p)
            kind = "loop" if len(p) == 1 else "cycle"
            parts.append(f"a {kind} labeled {word} through {lg.node_name(p[0].source)}")
        return " and ".join(parts)

    def to_json(self, lg: LabeledGraph) -> dict:
        g = lg.graph
        walks = [[{"source": lg.node_name(m.source), "range": lg.node_name(m.range),
                   "first": g.edges[m.first], "second": g.edges[m.second]} for m in w]
                 for w in (self.walk_a, self.walk_b)]
        return {"label": self.which, "walks": walks, "description": self.describe(lg)}


def synchronization_witness(lg: LabeledGraph, which: str) -> SyncWitness | None:
    _require_resolving(lg, which)
    cyc = PairGraph(lg, which).find_cycle()
    if cyc is None:
        return None
    return SyncWitness(which, tuple(m for m, _ in cyc), tuple(n for _, n in cyc))


def synchronization_delay(lg: LabeledGraph, which: str) -> int:
    """Least m such that equal labels on length-m paths force equal source (first) or range (second)."""
    pg = PairGraph(lg, which)
    _require_resolving(lg, which)
    order = pg.topological_order()
    if order is None:
        raise NotSynchronizingError(f"not synchronizing in the {which} label")
    if lg.num_vertices <= 1:
        return 0
    longest = {v: 0 for v in pg.nodes}
    for v in order:
        for t in pg.successors(v):
            longest[t] = max(longest[t], longest[v] + 1)
    return max(longest.values(), default=0) + 1


def is_diagonal_automorphism(lg: LabeledGraph) -> bool:
    return is_synchronizing(lg, "first")


def is_automorphism(lg: LabeledGraph) -> bool:
    return is_synchronizing(lg, "first") and is_synchronizing(lg, "second")


# -- one-sided shift map ---------------------------------------------------------

class WindowTooShort(ValueError):
    def __init__(self, required: int, got: int):
        super().__init__(f"word of length {got} is too short; at least {required} edges are needed")
        self.required = required


@dataclass(frozen=True)
class WindowImage:
    """The part of phi(x) fixed by a finite prefix of x."""

    word: tuple[int, ...]
    determined: int


def _in_by_first(lg):
    table = {}
    for mu in lg.edges:
        table[mu.range, mu.first] = mu
    return table


def one_sided_image(lg: LabeledGraph, word) -> WindowImage:
    """Image prefix beta·y of every infinite path starting with ``word``.

    Here beta is the source and y the second label of the unique path of the
    permutation graph whose first label is the infinite path. A word of
    length n with first-label delay m fixes the first k-1+n-m edges.
    """
    word = tuple(word)
    g = lg.graph
    if not g.is_path(word):
        raise ValueError("word is not a path of the base graph")
    m = synchronization_delay(lg, "first")
    if len(word) < m + 1:
        raise WindowTooShort(m + 1, len(word))
    table = _in_by_first(lg)
    traces = []
    for rho in range(lg.num_vertices):
        trace = []
        v = rho
        for e in reversed(word):
            mu = table.get((v, e))
            if mu is None:
                break
            trace.append(mu)
            v = mu.source
        else:
            traces.append(trace[::-1])
    keep = len(word) - m
    heads = {(t[0].source, tuple(mu.second for mu in t[:keep])) for t in traces}
    if len(heads) != 1:
        raise NotSynchronizingError("first label does not determine the image")
    beta, y = heads.pop()
    out = lg.nodes.words[beta] + y
    return WindowImage(out, len(out))


# -- minimal emitted sequences ---------------------------------------------------

@dataclass(frozen=True)
class MinimalEmittedSequence:
    """Eventually periodic token sequence; tokens are (edge rank, vertex rank)."""

    preperiod: tuple[tuple[int, int], ...]
    period: tuple[tuple[int, int], ...]

    @classmethod
    def canonical(cls, pre, per):
        pre, per = list(pre), list(per)
        n = len(per)
        for d in range(1, n + 1):
            if n % d == 0 and per == per[:d] * (n // d):
                per = per[:d]
                break
        while pre and pre[-1] == per[-1]:
            pre.pop()
            per = per[-1:] + per[:-1]
        return cls(tuple(pre), tuple(per))

    def prefix(self, n: int) -> tuple:
        out = list(self.preperiod[:n])
        while len(out) < n:
            out.extend(self.period)
        return tuple(out[:n])

    def _horizon(self, other) -> int:
        return (max(len(self.preperiod), len(other.preperiod))
                + math.lcm(len(self.period), len(other.period)))

    def __lt__(self, other):
        h = self._horizon(other)
        return self.prefix(h) < other.prefix(h)

    def sort_key(self, horizon: int):
        return self.prefix(horizon)

    def render(self, graph: Graph) -> str:
        def tok(t):
            return f"{graph.edges[t[0]]}{graph.vertices[t[1]]}"
        pre = " ".join(tok(t) for t in self.preperiod)
        per = " ".join(tok(t) for t in self.period)
        return (pre + " " if pre else "") + f"({per})^inf"


def _out_lists(lg):
    out = [[] for _ in range(lg.num_vertices)]
    for mu in lg.edges:
        out[mu.source].append(mu)
    return out


def _mes_from(lg, out, vertex):
    g = lg.graph
    states = {}
    tokens = []
    cur = frozenset([vertex])
    while cur not in states:
        states[cur] = len(tokens)
        best = min((mu.first, g.rng[mu.second]) for v in cur for mu in out[v])
        tokens.append(best)
        cur = frozenset(mu.range for v in cur for mu in out[v]
                        if (mu.first, g.rng[mu.second]) == best)
    i = states[cur]
    return MinimalEmittedSequence.canonical(tokens[:i], tokens[i:])


def minimal_emitted_sequence(lg: LabeledGraph, vertex: int) -> MinimalEmittedSequence:
    return _mes_from(lg, _out_lists(lg), vertex)


def all_minimal_emitted_sequences(lg: LabeledGraph) -> list[MinimalEmittedSequence]:
    out = _out_lists(lg)
    return [_mes_from(lg, out, v) for v in range(lg.num_vertices)]


# -- ordered permutation graphs --------------------------------------------------

class OrderedPermutationGraph:
    """Class-canonical relabeling of a first-label synchronizing permutation graph.

    Vertices are symbols (u, v, i), read o^i_{u->v}; ``edges[j]`` is
    (source symbol, range symbol, first label, second label) for mu_j.
    """

    def __init__(self, graph: Graph, level: int, edges):
        self.graph = graph
        self.level = level
        self.edges = tuple(edges)

    @cached_property
    def key(self) -> str:
        return json.dumps([self.level, self.edges], separators=(",", ":"))

    def __eq__(self, other):
        return (isinstance(other, OrderedPermutationGraph) and other.graph == self.graph
                and other.key == self.key)

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"OrderedPermutationGraph(level={self.level}, {len(self.edges)} edges)"

    def symbol_name(self, sym) -> str:
        u, v, i = sym
        return f"o{i}_{self.graph.vertices[u]}{self.graph.vertices[v]}" \
            if self.graph.single_char_names else f"o{i}_{self.graph.vertices[u]}.{self.graph.vertices[v]}"

    def as_labeled_graph(self) -> LabeledGraph:
        """Identify o^i_{u->v} with the i-th path of E^{k-1}_{u->v}."""
        nodes = self.graph.level(self.level - 1)
        edges = [LabeledEdge(nodes.blocks[s[0], s[1]][s[2]], nodes.blocks[r[0], r[1]][r[2]], e, f)
                 for s, r, e, f in self.edges]
        return LabeledGraph(self.graph, self.level, edges)

    def representative(self) -> EndpointFixingPermutation:
        from .permgraph import recover_permutation
        return recover_permutation(self.as_labeled_graph())

    def to_json(self) -> dict:
        g = self.graph
        return {
            "level": self.level,
            "edges": [
                {"index": j, "source": self.symbol_name(s), "range": self.symbol_name(r),
                 "first": g.edges[e], "second": g.edges[f]}
                for j, (s, r, e, f) in enumerate(self.edges)
            ],
        }

    def to_dot(self, name: str = "ordered") -> str:
        g = self.graph
        blocks = defaultdict(set)
        for s, r, _, _ in self.edges:
            blocks[s[:2]].add(s)
            blocks[r[:2]].add(r)
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
        for n, key in enumerate(sorted(blocks)):
            lines.append(f"  subgraph cluster_{n} {{")
            lines.append("    style=dashed;")
            lines.append(f'    label="{g.vertices[key[0]]} -> {g.vertices[key[1]]}";')
            for sym in sorted(blocks[key]):
                lines.append(f'    "{self.symbol_name(sym)}";')
            lines.append("  }")
        for j, (s, r, e, f) in enumerate(self.edges):
            lines.append(f'  "{self.symbol_name(s)}" -> "{self.symbol_name(r)}" '
                         f'[label="{g.edges[e]}/{g.edges[f]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def vertex_ranks(lg: LabeledGraph) -> list[int]:
    """Position of each vertex within its (u, v) block under the MES order."""
    mes = all_minimal_emitted_sequences(lg)
    horizon = (max(len(m.preperiod) for m in mes)
               + math.lcm(*(len(m.period) for m in mes)))
    keys = [m.prefix(horizon) for m in mes]
    rank = [0] * lg.num_vertices
    for block, members in lg.nodes.blocks.items():
        ordered = sorted(members, key=lambda i: keys[i])
        for a, b in zip(ordered, ordered[1:]):
            if keys[a] == keys[b]:
                raise NotSynchronizingError(
                    f"vertices {lg.node_name(a)} and {lg.node_name(b)} share a minimal emitted "
                    "sequence; the graph is not synchronizing in the first label")
        for pos, i in enumerate(ordered):
            rank[i] = pos
    return rank


def ordered_permutation_graph(lg: LabeledGraph) -> OrderedPermutationGraph:
    rank = vertex_ranks(lg)
    g = lg.graph
    nodes = lg.nodes

    def sym(i):
        return (nodes.src[i], nodes.rng[i], rank[i])

    # edge order: first label, then base range of the second label, then range vertex rank
    items = sorted(((mu.first, g.rng[mu.second], rank[mu.range]), sym(mu.source), sym(mu.range),
                    mu.first, mu.second) for mu in lg.edges)
    return OrderedPermutationGraph(g, lg.level, [(s, r, e, f) for _, s, r, e, f in items])


def shift_space_equivalent(lg1: LabeledGraph, lg2: LabeledGraph) -> bool:
    if lg1.level != lg2.level:
        raise ValueError(f"levels differ: {lg1.level} and {lg2.level}")
    return ordered_permutation_graph(lg1) == ordered_permutation_graph(lg2)


def apply_g_pi(tau: EndpointFixingPermutation, pi: EndpointFixingPermutation) -> EndpointFixingPermutation:
    """The permutation with g_pi(tau)(e pi(alpha)) = pi(beta) f whenever tau(e alpha) = beta f."""
    k = tau.level
    if k < 2:
        raise ValueError("g_pi is defined for level >= 2")
    if pi.level != k - 1 or pi.graph is not tau.graph:
        raise ValueError("pi must act on paths of length level-1 of the same graph")
    mapping = {}
    for p in tau.graph.paths(k):
        q = tau(p)
        mapping[(p[0],) + pi(p[1:])] = pi(q[:-1]) + (q[-1],)
    return EndpointFixingPermutation.from_mapping(tau.graph, k, mapping)


def permutation_graph(obj) -> LabeledGraph:
    """Accept either a permutation or a labeled graph."""
    if isinstance(obj, EndpointFixingPermutation):
        return build_permutation_graph(obj)
    return obj


__all__ = [
    "PairGraph", "SyncWitness", "NotResolvingError", "NotSynchronizingError", "WindowTooShort",
    "WindowImage", "MinimalEmittedSequence", "OrderedPermutationGraph", "is_synchronizing",
    "synchronization_witness", "synchronization_delay", "is_diagonal_automorphism",
    "is_automorphism", "one_sided_image", "minimal_emitted_sequence",
    "all_minimal_emitted_sequences", "vertex_ranks", "ordered_permutation_graph",
    "shift_space_equivalent", "apply_g_pi", "permutation_graph", "PermutationGraph",
]
