"""Permutation graphs: labeled graphs on E^{k-1} with one doubly labeled edge per path of E^k.

An input path e·alpha with tau(e·alpha) = beta·f becomes the edge
``beta --[e,f]--> alpha``. Vertices are node indices of ``graph.level(k-1)``;
labels are base edge indices.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .graph import Graph
from .permutations import EndpointFixingPermutation


@dataclass(frozen=True, order=True)
class LabeledEdge:
    source: int
    range: int
    first: int
    second: int


@dataclass(frozen=True)
class Violation:
    condition: str
    site: str

    def __str__(self):
        return f"condition {self.condition}: {self.site}"


@dataclass(frozen=True)
class LemmaReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def failing(self) -> set[str]:
        return {v.condition for v in self.violations}

    def count(self, condition: str) -> int:
        return sum(v.condition == condition for v in self.violations)

    def __str__(self):
        if self.ok:
            return "all conditions hold"
        return "\n".join(str(v) for v in self.violations)


class LabeledGraph:
    """A labeled graph shaped like a permutation graph: vertices E^{k-1}, labels in E^1 x E^1.

    The edge list may be arbitrary, so this class also serves as the
    partial graph of the search and as the target of mutation tests.
    """

    def __init__(self, graph: Graph, level: int, edges):
        if level < 1:
            raise ValueError("level must be >= 1")
        self.graph = graph
        self.level = level
        self.nodes = graph.level(level - 1)
        self.edges = tuple(edges)

    @property
    def num_vertices(self) -> int:
        return len(self.nodes)

    def with_edges(self, edges) -> LabeledGraph:
        return LabeledGraph(self.graph, self.level, edges)

    # endpoints of nodes in the base graph
    def node_src(self, i: int) -> int:
        return self.nodes.src[i]

    def node_rng(self, i: int) -> int:
        return self.nodes.rng[i]

    def node_name(self, i: int) -> str:
        return self.nodes.name(i)

    def edge_name(self, mu: LabeledEdge) -> str:
        g = self.graph
        return (f"{self.node_name(mu.source)} -[{g.edges[mu.first]},{g.edges[mu.second]}]-> "
                f"{self.node_name(mu.range)}")

    def labels(self, which: str) -> list[int]:
        if which not in ("first", "second"):
            raise ValueError("which must be 'first' or 'second'")
        return [getattr(mu, which) for mu in self.edges]

    def __eq__(self, other):
        return (isinstance(other, LabeledGraph) and other.level == self.level
                and other.graph is self.graph and sorted(other.edges) == sorted(self.edges))

    def __hash__(self):
        return hash((self.level, tuple(sorted(self.edges))))

    def __repr__(self):
        return f"{type(self).__name__}(level={self.level}, {len(self.edges)} edges)"

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        g = self.graph
        return {
            "level": self.level,
            "edges": [
                {"source": self.node_name(mu.source), "range": self.node_name(mu.range),
                 "first": g.edges[mu.first], "second": g.edges[mu.second]}
                for mu in self.edges
            ],
        }

    def to_dot(self, name: str = "permgraph") -> str:
        g = self.graph
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
        for n, ((u, v), members) in enumerate(self.nodes.blocks.items()):
            lines.append(f"  subgraph cluster_{n} {{")
            lines.append("    style=dashed;")
            lines.append(f'    label="{g.vertices[u]} -> {g.vertices[v]}";')
            for i in members:
                lines.append(f'    n{i} [label="{_dot_escape(self.node_name(i))}"];')
            lines.append("  }")
        for mu in self.edges:
            lab = f"{g.edges[mu.first]}/{g.edges[mu.second]}"
            lines.append(f'  n{mu.source} -> n{mu.range} [label="{_dot_escape(lab)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


class PermutationGraph(LabeledGraph):
    """The permutation graph of an endpoint-fixing permutation.

    ``edges[i]`` is the edge of the i-th input path of ``graph.paths(level)``.
    """

    def __init__(self, perm: EndpointFixingPermutation):
        g, k = perm.graph, perm.level
        prev = g.level(k - 1)
        edges = []
        for p in g.paths(k):
            q = perm(p)
            alpha = prev.find(p[1:], g.rng[p[0]])
            beta = prev.find(q[:-1], g.src[q[0]])
            edges.append(LabeledEdge(beta, alpha, p[0], q[-1]))
        super().__init__(g, k, edges)
        self.perm = perm


def build_permutation_graph(perm: EndpointFixingPermutation) -> PermutationGraph:
    return PermutationGraph(perm)


class MalformedPermutationGraph(ValueError):
    def __init__(self, report: LemmaReport):
        super().__init__(str(report))
        self.report = report


def recover_permutation(lg: LabeledGraph) -> EndpointFixingPermutation:
    """Read tau(e·alpha) = beta·f off every edge ``beta --[e,f]--> alpha``."""
    if isinstance(lg, PermutationGraph):
        return lg.perm
    report = check_lemma_properties(lg)
    if not report.ok:
        raise MalformedPermutationGraph(report)
    words = lg.nodes.words
    mapping = {(mu.first,) + words[mu.range]: words[mu.source] + (mu.second,) for mu in lg.edges}
    return EndpointFixingPermutation.from_mapping(lg.graph, lg.level, mapping)


def as_labeled_graph(pg: LabeledGraph) -> LabeledGraph:
    """Forget the permutation a graph was built from."""
    return LabeledGraph(pg.graph, pg.level, pg.edges)


# -- structural characterization ------------------------------------------------

def _endpoint_violations(lg: LabeledGraph, mu: LabeledEdge):
    g = lg.graph
    out = []
    if lg.node_src(mu.source) != g.src[mu.first] or lg.node_src(mu.range) != g.rng[mu.first]:
        out.append(Violation("1", lg.edge_name(mu)))
    if lg.node_rng(mu.source) != g.src[mu.second] or lg.node_rng(mu.range) != g.rng[mu.second]:
        out.append(Violation("3", lg.edge_name(mu)))
    return out


def check_lemma_properties(lg: LabeledGraph) -> LemmaReport:
    """Check the four defining conditions of a permutation graph.

    (1) first labels are compatible with the base sources of both endpoints;
    (2) each (e, alpha) with alpha starting at r(e) receives exactly one edge;
    (3) second labels are compatible with the base ranges of both endpoints;
    (4) each (f, beta) with beta ending at s(f) emits exactly one edge.
    """
    g = lg.graph
    viol = []
    n = lg.num_vertices
    for mu in lg.edges:
        if not (0 <= mu.source < n and 0 <= mu.range < n
                and 0 <= mu.first < g.num_edges and 0 <= mu.second < g.num_edges):
            viol.append(Violation("1", f"edge {mu} references unknown vertices or labels"))
            continue
        viol.extend(_endpoint_violations(lg, mu))
    inc = Counter((mu.first, mu.range) for mu in lg.edges)
    emit = Counter((mu.second, mu.source) for mu in lg.edges)
    for e in range(g.num_edges):
        for a in range(n):
            if lg.node_src(a) == g.rng[e]:
                c = inc.get((e, a), 0)
                if c != 1:
                    viol.append(Violation("2", f"{c} edges with first label {g.edges[e]} "
                                               f"into {lg.node_name(a)}"))
    for f in range(g.num_edges):
        for b in range(n):
            if lg.node_rng(b) == g.src[f]:
                c = emit.get((f, b), 0)
                if c != 1:
                    viol.append(Violation("4", f"{c} edges with second label {g.edges[f]} "
                                               f"out of {lg.node_name(b)}"))
    return LemmaReport(tuple(viol))


def check_subgraph_conditions(lg: LabeledGraph) -> bool:
    """True iff the edges can be extended to a permutation graph.

    That is: label/endpoint compatibility holds and no (e, alpha) or
    (f, beta) pair is used twice.
    """
    seen1, seen2 = set(), set()
    for mu in lg.edges:
        if _endpoint_violations(lg, mu):
            return False
        k1, k2 = (mu.first, mu.range), (mu.second, mu.source)
        if k1 in seen1 or k2 in seen2:
            return False
        seen1.add(k1)
        seen2.add(k2)
    return True


def resolving_clashes(lg: LabeledGraph, which: str) -> list[tuple[LabeledEdge, LabeledEdge]]:
    """Pairs of distinct edges breaking left- (first) or right-resolving (second)."""
    if which not in ("first", "second"):
        raise ValueError("which must be 'first' or 'second'")
    groups = defaultdict(list)
    for mu in lg.edges:
        key = (mu.range, mu.first) if which == "first" else (mu.source, mu.second)
        groups[key].append(mu)
    return [(ms[0], m) for ms in groups.values() for m in ms[1:]]


def check_resolving(lg: LabeledGraph, which: str) -> bool:
    return not resolving_clashes(lg, which)


@dataclass
class TextileView:
    """The LR textile system of a permutation graph.

    ``p`` maps an edge to its first label and a vertex to its base source;
    ``q`` maps an edge to its second label and a vertex to its base range.
    """

    pg: LabeledGraph
    problems: list[str] = field(default_factory=list)

    def p_edge(self, mu: LabeledEdge) -> int:
        return mu.first

    def q_edge(self, mu: LabeledEdge) -> int:
        return mu.second

    def p_vertex(self, i: int) -> int:
        return self.pg.node_src(i)

    def q_vertex(self, i: int) -> int:
        return self.pg.node_rng(i)

    @property
    def is_lr(self) -> bool:
        return not self.problems


def as_textile_system(pg: LabeledGraph) -> TextileView:
    view = TextileView(pg)
    g = pg.graph
    for mu in pg.edges:
        # both maps must be graph homomorphisms onto E
        if (view.p_vertex(mu.source), view.p_vertex(mu.range)) != (g.src[mu.first], g.rng[mu.first]):
            view.problems.append(f"p is not a homomorphism at {pg.edge_name(mu)}")
        if (view.q_vertex(mu.source), view.q_vertex(mu.range)) != (g.src[mu.second], g.rng[mu.second]):
            view.problems.append(f"q is not a homomorphism at {pg.edge_name(mu)}")
    quads = Counter(pg.edges)
    for mu, c in quads.items():
        if c > 1:
            view.problems.append(f"edge {pg.edge_name(mu)} is not determined by its quadruple")
    for a, b in resolving_clashes(pg, "first"):
        view.problems.append(f"p is not left-resolving: {pg.edge_name(a)} and {pg.edge_name(b)}")
    for a, b in resolving_clashes(pg, "second"):
        view.problems.append(f"q is not right-resolving: {pg.edge_name(a)} and {pg.edge_name(b)}")
    return view


def labeled_graph_from_json(graph: Graph, obj) -> LabeledGraph:
    obj = json.loads(obj) if isinstance(obj, str) else obj
    k = int(obj["level"])
    nodes = graph.level(k - 1)

    def node(name):
        if k == 1:
            return graph.vertex_index[name]
        return nodes.find(graph.parse_path(name))

    edges = [LabeledEdge(node(d["source"]), node(d["range"]), graph.edge_index[d["first"]],
                         graph.edge_index[d["second"]]) for d in obj["edges"]]
    return LabeledGraph(graph, k, edges)


def path_language(lg: LabeledGraph, n: int, which: str) -> set[tuple[int, ...]]:
    """Label words of all length-``n`` paths in the labeled graph."""
    lab = (lambda mu: mu.first) if which == "first" else (lambda mu: mu.second)
    step = defaultdict(lambda: defaultdict(set))
    for mu in lg.edges:
        step[mu.source][lab(mu)].add(mu.range)
    # each word keeps the set of vertices its paths can end at
    memo = {}

    def moves(ends):
        if ends not in memo:
            nxt = defaultdict(set)
            for v in ends:
                for x, rs in step[v].items():
                    nxt[x] |= rs
            memo[ends] = [(x, frozenset(rs)) for x, rs in nxt.items()]
        return memo[ends]

    frontier = {(): frozenset(range(lg.num_vertices))}
    for _ in range(n):
        frontier = {w + (x,): rs for w, ends in frontier.items() for x, rs in moves(ends)}
    return set(frontier)
