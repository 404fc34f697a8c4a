"""Symbolic images, inverses, composition, and orders of permutative endomorphisms.

Elements of C*(E) appear only as formal sums of matrix units S_mu S_nu^*.
Induced shift maps on the two-sided edge shift are handled as codes:
labeled graphs read in pairs (x, z), together with a shift offset.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

from .dynamics import (NotSynchronizingError, OrderedPermutationGraph, is_automorphism,
                       is_synchronizing, ordered_permutation_graph, synchronization_witness)
from .graph import Graph
from .permgraph import LabeledGraph, PermutationGraph, build_permutation_graph
from .permutations import EndpointFixingPermutation


def as_permutation_graph(obj) -> LabeledGraph:
    if isinstance(obj, EndpointFixingPermutation):
        return build_permutation_graph(obj)
    if isinstance(obj, OrderedPermutationGraph):
        return build_permutation_graph(obj.representative())
    if isinstance(obj, LabeledGraph):
        return obj
    raise TypeError(f"cannot read {type(obj).__name__} as a permutation graph")


# -- formal sums ------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Node:
    """A path, or the empty path at ``vertex`` when ``word`` is empty."""

    vertex: int
    word: tuple[int, ...] = ()

    def range(self, graph: Graph) -> int:
        return graph.rng[self.word[-1]] if self.word else self.vertex

    def extend(self, word) -> Node:
        return Node(self.vertex, self.word + tuple(word))

    def name(self, graph: Graph) -> str:
        return graph.path_name(self.word) if self.word else graph.vertices[self.vertex]


def _node_of(lg: LabeledGraph, i: int) -> Node:
    return Node(lg.nodes.src[i], lg.nodes.words[i])


def _factor(graph, node: Node, star: bool = False) -> str:
    if not node.word:
        return f"P_{graph.vertices[node.vertex]}"
    return f"S_{graph.path_name(node.word)}" + ("*" if star else "")


@dataclass(frozen=True)
class SymbolicSum:
    """Sum of terms S_beta S_delta S_alpha^* with beta, alpha paths or vertices."""

    graph: Graph
    terms: tuple[tuple[Node, tuple[int, ...], Node], ...]

    def __post_init__(self):
        ordered = tuple(sorted(set(self.terms)))
        if len(ordered) != len(self.terms):
            raise ValueError("duplicate terms")
        object.__setattr__(self, "terms", ordered)

    def __len__(self):
        return len(self.terms)

    def matrix_units(self) -> list[tuple[Node, Node]]:
        """Each term as S_mu S_nu^* with mu = beta delta and nu = alpha."""
        return sorted((b.extend(d) if d else b, a) for b, d, a in self.terms)

    def collapsed(self) -> list[tuple[Node, Node]]:
        """Repeatedly replace sum_x S_{px} S_{qx}^* over all edges x out of r(p) by S_p S_q^*."""
        g = self.graph
        units = set(self.matrix_units())
        changed = True
        while changed:
            changed = False
            groups = defaultdict(set)
            for mu, nu in units:
                if mu.word and nu.word and mu.word[-1] == nu.word[-1]:
                    groups[_trunc(g, mu), _trunc(g, nu)].add(mu.word[-1])
            for (p, q), xs in sorted(groups.items()):
                v = p.range(g)
                if q.range(g) == v and xs == set(g.out_edges[v]):
                    for x in xs:
                        units.discard((p.extend((x,)), q.extend((x,))))
                    units.add((p, q))
                    changed = True
                    break
        return sorted(units)

    def render(self) -> str:
        if not self.terms:
            return "0"
        g = self.graph
        out = []
        for b, d, a in self.terms:
            parts = [_factor(g, b)] if b.word or not d else []
            if d:
                parts.append(f"S_{g.path_name(d)}")
            parts.append(_factor(g, a, star=True))
            out.append(" ".join(parts))
        return " + ".join(out)

    def render_collapsed(self) -> str:
        g = self.graph
        units = self.collapsed()
        if not units:
            return "0"
        out = []
        for mu, nu in units:
            if not nu.word:
                out.append(_factor(g, mu))
            elif not mu.word:
                out.append(_factor(g, nu, star=True))
            else:
                out.append(f"{_factor(g, mu)} {_factor(g, nu, star=True)}")
        return " + ".join(out)

    def to_json(self) -> dict:
        g = self.graph
        return {
            "terms": [[b.name(g), g.path_name(d) if d else "", a.name(g)] for b, d, a in self.terms],
            "raw": self.render(),
            "collapsed": self.render_collapsed(),
        }


def _trunc(graph, node: Node) -> Node:
    if len(node.word) > 1:
        return Node(node.vertex, node.word[:-1])
    return Node(graph.src[node.word[0]], ())


# -- path tracing in a permutation graph -------------------------------------------

class Tracer:
    """Lookup tables for following labels through a permutation graph."""

    def __init__(self, lg: LabeledGraph):
        self.lg = lg
        self.in_first = {}
        self.out_second = {}
        for mu in lg.edges:
            self.in_first[mu.range, mu.first] = mu
            self.out_second[mu.source, mu.second] = mu

    def back_first(self, rho: int, word, vertex: int | None = None):
        """The path with first label ``word`` ending at ``rho``, or None.

        For the empty word the path is the vertex ``rho`` itself, which
        must lie over base vertex ``vertex``.
        """
        if not word:
            if vertex is not None and self.lg.nodes.src[rho] != vertex:
                return None
            return []
        trail = []
        v = rho
        for e in reversed(word):
            mu = self.in_first.get((v, e))
            if mu is None:
                return None
            trail.append(mu)
            v = mu.source
        trail.reverse()
        return trail

    def forward_second(self, start: int, word):
        trail = []
        v = start
        for f in word:
            mu = self.out_second.get((v, f))
            if mu is None:
                return None
            trail.append(mu)
            v = mu.range
        return trail


def image_of_path(obj, gamma) -> SymbolicSum:
    """lambda_tau(S_gamma) as the sum over paths A with first label gamma."""
    lg = as_permutation_graph(obj)
    g = lg.graph
    gamma = tuple(g.parse_path(gamma) if isinstance(gamma, str) else gamma)
    if not g.is_path(gamma):
        raise ValueError("unknown path")
    tr = Tracer(lg)
    terms = []
    for rho in range(lg.num_vertices):
        a = tr.back_first(rho, gamma)
        if a is None:
            continue
        terms.append((_node_of(lg, a[0].source), tuple(mu.second for mu in a), _node_of(lg, rho)))
    return SymbolicSum(g, tuple(terms))


def image_of_edge(obj, e) -> SymbolicSum:
    lg = as_permutation_graph(obj)
    g = lg.graph
    if isinstance(e, str):
        if e not in g.edge_index:
            raise ValueError(f"unknown edge {e!r}")
        e = g.edge_index[e]
    if not 0 <= e < g.num_edges:
        raise ValueError(f"unknown edge {e!r}")
    return image_of_path(lg, (e,))


# -- composition and inverse -------------------------------------------------------

class CompositionError(ValueError):
    pass


def compose_permutations(outer, inner) -> EndpointFixingPermutation:
    """The permutation of lambda_outer o lambda_inner, at level k + l - 1."""
    to = as_permutation_graph(outer)
    pi = as_permutation_graph(inner)
    if to.graph is not pi.graph and to.graph != pi.graph:
        raise CompositionError("permutation graphs over different base graphs")
    g = pi.graph
    l, k = to.level, pi.level
    tr = Tracer(to)
    owords = to.nodes.words
    mapping = {}
    for mu in pi.edges:
        alpha = pi.nodes.words[mu.range]
        alpha_v = pi.nodes.src[mu.range]
        bf = pi.nodes.words[mu.source] + (mu.second,)
        for rho in range(to.num_vertices):
            a = tr.back_first(rho, alpha, alpha_v)
            if a is None:
                continue
            b = tr.back_first(rho, bf)
            if b is None:
                continue
            delta = owords[a[0].source] if a else owords[rho]
            src = (mu.first,) + delta + tuple(x.second for x in a)
            dst = owords[b[0].source] + tuple(x.second for x in b)
            if src in mapping and mapping[src] != dst:
                raise CompositionError(f"path {g.path_name(src)} receives two images")
            mapping[src] = dst
    level = k + l - 1
    if len(mapping) != len(g.paths(level)):
        raise CompositionError("composition does not cover every path")
    try:
        return EndpointFixingPermutation.from_mapping(g, level, mapping)
    except ValueError as exc:
        raise CompositionError(str(exc)) from None


def compose(outer, inner) -> PermutationGraph:
    return build_permutation_graph(compose_permutations(outer, inner))


def is_identity_graph(obj) -> bool:
    lg = as_permutation_graph(obj)
    words = lg.nodes.words
    return all((mu.first,) + words[mu.range] == words[mu.source] + (mu.second,) for mu in lg.edges)


class NotAnAutomorphism(ValueError):
    pass


@dataclass
class InverseResult:
    graph: PermutationGraph
    level: int
    tried: list[int] = field(default_factory=list)


def inverse(obj, max_level: int | None = None) -> PermutationGraph:
    return find_inverse(obj, max_level).graph


def find_inverse(obj, max_level: int | None = None) -> InverseResult:
    """Permutative inverse found level by level and checked on both sides.

    At level j the candidate pi is forced: for each slot (e, alpha) and each
    vertex rho, the path A with first label alpha ending at rho and the word
    W = e s(A) L2(A) determine a path B leaving W[:k-1] with second label
    W[k-1:], and pi(e alpha) must be the first label of B.
    """
    lg = as_permutation_graph(obj)
    for which in ("first", "second"):
        if not is_synchronizing(lg, which):
            w = synchronization_witness(lg, which)
            raise NotAnAutomorphism(f"not synchronizing in the {which} label: {w.describe(lg)}")
    g, k = lg.graph, lg.level
    tr = Tracer(lg)
    words = lg.nodes.words
    if max_level is None:
        from .dynamics import synchronization_delay
        max_level = k + synchronization_delay(lg, "first") + synchronization_delay(lg, "second") + 2
    tried = []
    for j in range(1, max_level + 1):
        tried.append(j)
        target = g.level(j - 1)
        mapping = {}
        ok = True
        for e in range(g.num_edges):
            for ai in range(len(target)):
                if target.src[ai] != g.rng[e]:
                    continue
                alpha = target.words[ai]
                images = set()
                for rho in range(lg.num_vertices):
                    a = tr.back_first(rho, alpha, target.src[ai])
                    if a is None:
                        continue
                    w = (e,) + (words[a[0].source] if a else words[rho]) + tuple(x.second for x in a)
                    start = lg.nodes.find(w[:k - 1], g.src[e])
                    b = tr.forward_second(start, w[k - 1:])
                    end = b[-1].range if b else start
                    if b is None or end != rho:
                        ok = False
                        break
                    images.add(tuple(x.first for x in b))
                if not ok or len(images) != 1:
                    ok = False
                    break
                mapping[(e,) + alpha] = images.pop()
            if not ok:
                break
        if not ok:
            continue
        try:
            pi = EndpointFixingPermutation.from_mapping(g, j, mapping)
        except ValueError:
            continue
        try:
            if is_identity_graph(compose(lg, pi)) and is_identity_graph(compose(pi, lg)):
                return InverseResult(build_permutation_graph(pi), j, tried)
        except CompositionError:
            continue
    raise NotAnAutomorphism(f"no permutative inverse found up to level {max_level}")


# -- codes for induced shift maps --------------------------------------------------

class StateBudgetExceeded(RuntimeError):
    def __init__(self, states: int, budget: int):
        super().__init__(f"code with {states} states exceeds the budget of {budget}")
        self.states = states
        self.budget = budget


def _walks(graph: Graph, n: int):
    """Paths of length n, generated without touching the graph's cache."""
    if n <= 0:
        return []
    cur = [(e,) for e in range(graph.num_edges)]
    for _ in range(n - 1):
        cur = [p + (e,) for p in cur for e in graph.out_edges[graph.rng[p[-1]]]]
    return cur


def _count_walks(graph: Graph, n: int) -> int:
    counts = [len(graph.in_edges[v]) for v in range(graph.num_vertices)]
    for _ in range(n - 1):
        counts = [sum(counts[graph.src[e]] for e in graph.in_edges[v]) for v in range(graph.num_vertices)]
    return sum(counts)


@dataclass(frozen=True)
class CompositeCode:
    """phi = sigma^{-offset} o chi, with chi presented by a labeled graph.

    Edges are (source, range, x, z): along a bi-infinite path with x-labels
    x the z-labels spell chi(x). The graph is left-resolving in x, so chi(x)_i
    depends only on x_i, x_{i+1}, ... .
    """

    graph: Graph
    states: int
    edges: tuple[tuple[int, int, int, int], ...]
    offset: int = 0

    @cached_property
    def key(self) -> str:
        return json.dumps([self.offset, self.states, self.edges], separators=(",", ":"))

    def trimmed(self) -> CompositeCode:
        """Keep only edges on bi-infinite paths."""
        edges = set(self.edges)
        while True:
            has_in = {r for _, r, _, _ in edges}
            has_out = {s for s, _, _, _ in edges}
            keep = {e for e in edges if e[0] in has_in and e[1] in has_out}
            if keep == edges:
                break
            edges = keep
        live = sorted({s for s, _, _, _ in edges})
        idx = {s: i for i, s in enumerate(live)}
        return CompositeCode(self.graph, len(live),
                             tuple(sorted((idx[s], idx[r], x, z) for s, r, x, z in edges)),
                             self.offset)

    def minimized(self) -> CompositeCode:
        """Trim, merge states with equal pasts (Moore refinement), then re-time.

        Re-timing moves every z-label one edge forward while all edges into
        each state agree on z; each step lowers the offset by one.
        """
        code = self._merged()
        for _ in range(code.states + 1):
            nxt = code._retimed()
            if nxt is None:
                break
            code = nxt._merged()
        return code._canonical()

    def _merged(self) -> CompositeCode:
        code = self.trimmed()
        n = code.states
        incoming = [[] for _ in range(n)]
        for s, r, x, z in code.edges:
            incoming[r].append((x, z, s))
        cls = [0] * n
        count = 1 if n else 0
        while True:
            sigs = {}
            new = [sigs.setdefault((cls[v], tuple(sorted((x, z, cls[s]) for x, z, s in incoming[v]))),
                                   len(sigs)) for v in range(n)]
            if len(sigs) == count:
                break
            cls, count = new, len(sigs)
        edges = {(cls[s], cls[r], x, z) for s, r, x, z in code.edges}
        return CompositeCode(self.graph, count, tuple(sorted(edges)), self.offset)

    def _canonical(self) -> CompositeCode:
        """Renumber states so that isomorphic presentations get equal keys.

        In-edges of a state carry distinct x-labels (left-resolving), so a
        backward traversal in x-order from a chosen start is forced. Starts are
        tried among the states with the least in-label multiset, keeping the
        least serialization; states not reached are handled the same way.
        """
        n = self.states
        into = [[] for _ in range(n)]
        for s, r, x, z in self.edges:
            into[r].append((x, z, s))
        for lst in into:
            lst.sort()
        sig = [tuple((x, z) for x, z, _ in lst) for lst in into]
        order = {}
        while len(order) < n:
            rest = [v for v in range(n) if v not in order]
            least = min(sig[v] for v in rest)
            best, best_loc = None, None
            for start in (v for v in rest if sig[v] == least):
                loc, seq = self._traverse(start, order, into, best)
                if loc is not None:
                    best, best_loc = seq, loc
            order = best_loc
        edges = tuple(sorted((order[a], order[b], x, z) for a, b, x, z in self.edges))
        return CompositeCode(self.graph, n, edges, self.offset)

    @staticmethod
    def _traverse(start, order, into, best):
        """Backward traversal from ``start`` emitting (state, x, z, source) in visit order.

        Gives up (returns None) as soon as the sequence compares above ``best``.
        Every edge into a reached state has a reached source, so the emitted
        edges are exactly the in-edges of the newly numbered states.
        """
        loc = dict(order)
        loc[start] = len(loc)
        queue = [start]
        seq = []
        tied = best is not None
        for c in queue:
            for x, z, src in into[c]:
                if src not in loc:
                    loc[src] = len(loc)
                    queue.append(src)
                item = (loc[c], x, z, loc[src])
                if tied:
                    i = len(seq)
                    if i >= len(best) or item > best[i]:
                        return None, None
                    if item < best[i]:
                        tied = False
                seq.append(item)
        if tied and len(seq) == len(best):
            return None, None  # identical serialization, keep the first
        return loc, seq

    def _retimed(self):
        zin = {}
        for _, r, _, z in self.edges:
            if zin.setdefault(r, z) != z:
                return None
        edges = tuple(sorted({(s, r, x, zin[s]) for s, r, x, _ in self.edges}))
        return CompositeCode(self.graph, self.states, edges, self.offset - 1)

    def is_identity(self) -> bool:
        code = self.minimized()
        return code.offset == 0 and all(x == z for _, _, x, z in code.edges)

    def apply_periodic(self, word) -> tuple[int, ...]:
        """phi of the periodic point ...www..., aligned with w at position 0."""
        p = len(word)
        edges = [(s * p + t, r * p + (t + 1) % p, t, z)
                 for s, r, x, z in self.edges for t in range(p) if x == word[t]]
        prod = CompositeCode(self.graph, self.states * p, tuple(edges)).trimmed()
        out = [set() for _ in range(p)]
        for _, _, t, z in prod.edges:
            out[t].add(z)
        if any(len(zs) != 1 for zs in out):
            raise ValueError(f"phi is not determined on ({self.graph.path_name(word)})^inf")
        chi = [zs.pop() for zs in out]
        return tuple(chi[(i - self.offset) % p] for i in range(p))

    def language(self, n: int) -> set:
        """Pair-label words of length n read along the presenting graph."""
        out = defaultdict(list)
        for s, r, x, z in self.edges:
            out[s].append((r, (x, z)))
        frontier = {(v, ()) for v in range(self.states)}
        for _ in range(n):
            frontier = {(r, w + (lab,)) for v, w in frontier for r, lab in out[v]}
        return {w for _, w in frontier}

    def same_map(self, other: CompositeCode) -> bool:
        """Do both codes present the same shift map?"""
        a, b = self.minimized(), other.minimized()
        if a.graph != b.graph or a.offset != b.offset:
            return False
        by_x = defaultdict(list)
        for s, r, x, z in b.edges:
            by_x[x].append((s, r, z))
        n2 = b.states
        edges = [(s1 * n2 + s2, r1 * n2 + r2, z1, z2)
                 for s1, r1, x, z1 in a.edges for s2, r2, z2 in by_x.get(x, ())]
        prod = CompositeCode(a.graph, a.states * n2, tuple(edges)).trimmed()
        return all(z1 == z2 for _, _, z1, z2 in prod.edges)

    def block_map(self, memory: int, anticipation: int) -> dict:
        """Table x_{i-memory} .. x_{i+anticipation} -> phi(x)_i, if that window suffices."""
        code = self.trimmed()
        shift = -self.offset
        lo, hi = -memory - shift, anticipation - shift
        if lo > 0:
            raise ValueError("window too short on the left")
        in_x = defaultdict(list)
        for s, r, x, z in code.edges:
            in_x[r, x].append((s, z))
        table = {}
        for w in _walks(self.graph, memory + anticipation + 1):
            # chi(x)_j for j = i - offset sits at index memory - offset of w
            j = memory - self.offset
            if j < 0 or j >= len(w):
                raise ValueError("window does not reach the output position")
            cur = set(range(code.states))
            zs = set()
            for t in range(len(w) - 1, j - 1, -1):
                nxt = set()
                zs = set()
                for r in cur:
                    for s, z in in_x.get((r, w[t]), ()):
                        nxt.add(s)
                        zs.add(z)
                cur = nxt
            if len(zs) != 1:
                raise ValueError("window is too short to determine phi")
            table[w] = zs.pop()
        return table

    def to_json(self) -> dict:
        g = self.graph
        return {"states": self.states, "offset": self.offset,
                "edges": [[s, r, g.edges[x], g.edges[z]] for s, r, x, z in self.edges]}


def code_of(obj) -> CompositeCode:
    """phi_tau = sigma^{-(k-1)} o phi_T, with phi_T read off the two labels."""
    if isinstance(obj, CompositeCode):
        return obj
    lg = as_permutation_graph(obj)
    if not is_synchronizing(lg, "first"):
        w = synchronization_witness(lg, "first")
        raise NotSynchronizingError(f"no induced shift map: {w.describe(lg)}")
    edges = sorted({(mu.source, mu.range, mu.first, mu.second) for mu in lg.edges})
    return CompositeCode(lg.graph, lg.num_vertices, tuple(edges), lg.level - 1)


def compose_codes(outer: CompositeCode, inner: CompositeCode, budget: int | None = None) -> CompositeCode:
    """Code of phi_outer o phi_inner: product matched on the middle label, minimized."""
    if outer.graph != inner.graph:
        raise CompositionError("codes over different base graphs")
    by_x = defaultdict(list)
    for s, r, x, z in outer.edges:
        by_x[x].append((s, r, z))
    n1 = outer.states
    edges = {(s2 * n1 + s1, r2 * n1 + r1, x2, z1)
             for s2, r2, x2, z2 in inner.edges for s1, r1, z1 in by_x.get(z2, ())}
    live = {s for s, _, _, _ in edges}
    if budget is not None and len(live) > budget:
        raise StateBudgetExceeded(len(live), budget)
    code = CompositeCode(outer.graph, inner.states * n1, tuple(edges), outer.offset + inner.offset)
    return code.minimized()


def compose_ordered(og1, og2, budget: int | None = None) -> CompositeCode:
    """Minimized code of phi_1 o phi_2; depends only on the two classes."""
    return compose_codes(code_of(og1).minimized(), code_of(og2).minimized(), budget)



# -- orders --------------------------------------------------------------------------

@dataclass(frozen=True)
class Finite:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class ExceedsBound:
    bound: int
    certificate: str = ""

    def __str__(self):
        return f">{self.bound}"


@dataclass(frozen=True)
class BudgetExceeded:
    """Undecided: the composed code outgrew the state budget."""

    bound: int
    excluded_below: int
    states: int
    budget: int
    lcm: int = 1

    def __str__(self):
        return f"? (no order below {self.excluded_below}, budget of {self.budget} states exceeded)"


def cycles_of_length(graph: Graph, p: int):
    """Closed paths of length p, each rotation listed separately."""
    return [w for w in _walks(graph, p) if graph.rng[w[-1]] == graph.src[w[0]]]


def periodic_orbit_lcm(code: CompositeCode, bound: int, max_points: int = 20000, max_period: int = 12):
    """lcm of phi-orbit lengths over periodic points; stops once it exceeds ``bound``.

    Returns (lcm, certificate) where the certificate names a point whose orbit
    length (or the running lcm) already passes the bound, or None.
    """
    g = code.graph
    lcm = 1
    total = 0
    for p in range(1, max_period + 1):
        if total + _count_walks(g, p) > 4 * max_points:
            break
        ws = cycles_of_length(g, p)
        if total + len(ws) > max_points:
            break
        total += len(ws)
        seen = set()
        for w in ws:
            if w in seen:
                continue
            orbit = [w]
            cur = code.apply_periodic(w)
            while cur != w:
                orbit.append(cur)
                if len(orbit) > bound:
                    return len(orbit), (f"periodic point ({g.path_name(w)})^inf has an orbit "
                                        f"longer than {bound}")
                cur = code.apply_periodic(cur)
            seen.update(orbit)
            lcm = math.lcm(lcm, len(orbit))
            if lcm > bound:
                return lcm, (f"orbit lengths of periodic points of period <= {p} have lcm "
                             f"{lcm} > {bound}")
    return lcm, None


def order(obj, bound: int = 100, state_budget: int = 10**7, max_points: int = 20000):
    """Least n <= bound with phi^n = id, or ExceedsBound, or BudgetExceeded."""
    base = code_of(obj).minimized()
    lcm, cert = periodic_orbit_lcm(base, bound, max_points=max_points)
    if cert is not None:
        return ExceedsBound(bound, cert)
    cur = base
    n = 1
    while True:
        if n % lcm == 0 and cur.is_identity():
            return Finite(n)
        if n >= bound:
            return ExceedsBound(bound, f"no power up to {bound} is the identity")
        try:
            cur = compose_codes(base, cur, state_budget)
        except StateBudgetExceeded as exc:
            return BudgetExceeded(bound, n + 1, exc.states, state_budget, lcm)
        n += 1


def power_code(obj, n: int, budget: int | None = None) -> CompositeCode:
    base = code_of(obj).minimized()
    cur = base
    for _ in range(n - 1):
        cur = compose_codes(base, cur, budget)
    return cur


def edge_permutation(graph: Graph, mapping) -> EndpointFixingPermutation:
    """Level-1 permutation from an edge renaming; it must fix endpoints."""
    m = {}
    for a, b in dict(mapping).items():
        ea = graph.edge_index[a] if isinstance(a, str) else a
        eb = graph.edge_index[b] if isinstance(b, str) else b
        m[(ea,)] = (eb,)
    return EndpointFixingPermutation.from_mapping(graph, 1, m)


# -- subalgebra test ---------------------------------------------------------------------

@dataclass
class SubalgebraReport:
    inside: bool
    generator: int = -1
    rewriting: dict = field(default_factory=dict)
    witness: str = ""

    def __str__(self):
        if self.inside:
            return "inside: " + "; ".join(f"lambda(T{i + 1}) = {r}" for i, r in self.rewriting.items())
        return f"outside: lambda(T{self.generator + 1}) needs {self.witness}"


def image_in_subalgebra(obj, generators, targets=None, expand: int = 0) -> SubalgebraReport:
    """Is each lambda(T_i) a sum of words T_w T_v^* in the generators?

    ``generators`` lists groups of edges; T_i is the sum of S_e over group i.
    The images are expanded by up to ``expand`` extra edges when the first
    attempt fails.
    """
    lg = as_permutation_graph(obj)
    g = lg.graph
    groups = [[g.edge_index[x] if isinstance(x, str) else x for x in grp] for grp in generators]
    label = {}
    for i, grp in enumerate(groups):
        for e in grp:
            if e in label:
                raise ValueError("generators overlap")
            label[e] = i
    if len(label) != g.num_edges:
        raise ValueError("generators must partition the edges")
    targets = range(len(groups)) if targets is None else targets

    def pattern(node: Node):
        return tuple(label[e] for e in node.word)

    def names(w):
        return "".join(f"T{i + 1}" for i in w) if w else "1"

    report = SubalgebraReport(True)
    for i in targets:
        units = set()
        for e in groups[i]:
            units.update(image_of_edge(lg, e).matrix_units())
        for extra in range(expand + 1):
            if extra:
                units = {(mu.extend((x,)), nu.extend((x,))) for mu, nu in units
                         for x in g.out_edges[nu.range(g)]}
            blocks = defaultdict(set)
            for mu, nu in units:
                blocks[pattern(mu), pattern(nu)].add((mu, nu))
            missing = None
            for (w, v), have in sorted(blocks.items()):
                full = _block(g, label, w, v)
                if have != full:
                    missing = next(iter(sorted(full - have)), None)
                    bad = (w, v)
                    break
            if missing is None:
                report.rewriting[i] = " + ".join(f"{names(w)} ({names(v)})*" for w, v in sorted(blocks))
                break
        else:
            mu, nu = missing
            return SubalgebraReport(False, i, {}, f"{_factor(g, mu)} {_factor(g, nu, True)} "
                                                 f"to complete {names(bad[0])} ({names(bad[1])})*")
    return report


def _block(g, label, w, v):
    """All (mu, nu) with group words w, v and a common range."""
    def paths_with(pattern):
        if not pattern:
            return [Node(x, ()) for x in range(g.num_vertices)]
        return [Node(g.src[p[0]], p) for p in g.paths(len(pattern))
                if tuple(label[e] for e in p) == pattern]
    ps, qs = paths_with(w), paths_with(v)
    return {(mu, nu) for mu in ps for nu in qs if mu.range(g) == nu.range(g)}


# -- symmetries of the base graph -------------------------------------------------------

def graph_symmetries(graph: Graph):
    """All edge bijections that come from graph automorphisms (brute force)."""
    import itertools
    out = []
    for vperm in itertools.permutations(range(graph.num_vertices)):
        buckets = defaultdict(list)
        for e in range(graph.num_edges):
            buckets[graph.src[e], graph.rng[e]].append(e)
        ok = all(len(buckets[vperm[s], vperm[r]]) == len(es) for (s, r), es in buckets.items())
        if not ok:
            continue
        choices = []
        keys = sorted(buckets)
        for key in keys:
            tgt = buckets[vperm[key[0]], vperm[key[1]]]
            choices.append([list(zip(buckets[key], p)) for p in itertools.permutations(tgt)])
        for combo in itertools.product(*choices):
            m = dict(pair for part in combo for pair in part)
            out.append(tuple(m[e] for e in range(graph.num_edges)))
    return sorted(set(out))


def is_graph_symmetry(graph: Graph, sym) -> bool:
    sym = tuple(sym)
    if sorted(sym) != list(range(graph.num_edges)):
        return False
    vmap = {}
    for e, f in enumerate(sym):
        for a, b in ((graph.src[e], graph.src[f]), (graph.rng[e], graph.rng[f])):
            if vmap.setdefault(a, b) != b:
                return False
    return len(set(vmap.values())) == len(vmap)


def conjugate_permutation(perm: EndpointFixingPermutation, sym) -> EndpointFixingPermutation:
    """sym o tau o sym^{-1} on paths; the permutation graph is relabeled by sym."""
    mapping = {tuple(sym[e] for e in p): tuple(sym[e] for e in perm(p))
               for p in perm.graph.paths(perm.level)}
    return EndpointFixingPermutation.from_mapping(perm.graph, perm.level, mapping)


@dataclass
class QuotientResult:
    representatives: list
    orbits: list
    action: str


def quotient_by_graph_symmetries(classes, symmetries, action: str = "auto") -> QuotientResult:
    """Orbit representatives of ordered graphs under base-graph symmetries.

    Vertex-fixing symmetries act by composing lambda_sym on the left; others
    act by conjugation. ``action`` forces one of "compose" or "conjugate".
    """
    classes = list(classes)
    if not classes:
        return QuotientResult([], [], action)
    g = classes[0].graph
    syms = []
    for s in symmetries:
        s = tuple(g.edge_index[x] if isinstance(x, str) else x for x in s)
        if not is_graph_symmetry(g, s):
            raise ValueError(f"{[g.edges[e] for e in s]} is not a graph automorphism")
        syms.append(s)
    index = {og: i for i, og in enumerate(classes)}
    seen = [False] * len(classes)
    reps, orbits = [], []

    def act(og, s):
        fixes = all(g.src[s[e]] == g.src[e] and g.rng[s[e]] == g.rng[e] for e in range(g.num_edges))
        mode = action if action != "auto" else ("compose" if fixes else "conjugate")
        tau = og.representative()
        if mode == "compose":
            new = compose_permutations(edge_permutation(g, dict(enumerate(s))), tau)
        else:
            new = conjugate_permutation(tau, s)
        return ordered_permutation_graph(build_permutation_graph(new))

    for i, og in enumerate(classes):
        if seen[i]:
            continue
        orbit = {og}
        frontier = [og]
        while frontier:
            cur = frontier.pop()
            for s in syms:
                nxt = act(cur, s)
                if nxt not in orbit:
                    orbit.add(nxt)
                    frontier.append(nxt)
        for o in orbit:
            if o in index:
                seen[index[o]] = True
        reps.append(og)
        orbits.append(sorted(orbit))
    return QuotientResult(reps, orbits, action)
