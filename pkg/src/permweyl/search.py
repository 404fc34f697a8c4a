"""Pruned recursive enumeration of permutative automorphisms and of their outer classes.

The partial permutation graph is grown one edge at a time. A slot is a pair
(e, alpha) with alpha in E^{k-1}_{r(e)->*}; slots are filled in the order
(e, range of alpha, block position of alpha), and each slot receives a
candidate (beta, f) with f ending where alpha ends and beta running from
s(e) to s(f). After every placement the partial graph must

* use each (f, beta) at most once,
* have acyclic pair graphs for both labels (unless endomorphisms are wanted),
* for outer classes, draw sources from each (u, v) block in first-use order.

The inner loop is a resumable, iterative kernel over flat integer arrays,
compiled with numba when it is available.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import OrderedPermutationGraph
from .graph import Graph
from .permgraph import PermutationGraph
from .permutations import EndpointFixingPermutation, count_endpoint_fixing

log = logging.getLogger(__name__)

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

MODES = ("all-automorphisms", "outer-classes", "all-endomorphisms")
EMITS = ("collect", "stream", "count-only")

DONE, BUDGET, FULL = 0, 1, 2


class SearchCapExceeded(RuntimeError):
    pass


# -- constraints -------------------------------------------------------------------

class Constraint:
    """Per-edge admissibility filter for the partial graph.

    ``admissible`` sees one candidate edge beta --[e,f]--> alpha (words as
    tuples of edge indices, empty at level 1). Filtering candidates this way
    is inherited by construction: a subgraph of an admissible graph only
    contains admissible edges.
    """

    name = "constraint"

    def admissible(self, graph: Graph, e: int, alpha: tuple, beta: tuple, f: int) -> bool:
        return True

    # Optional agreement rule: slots with the same non-None key must receive
    # candidates with the same value. Also inherited by construction.
    def group_key(self, graph: Graph, e: int, alpha: tuple):
        return None

    def group_value(self, graph: Graph, e: int, alpha: tuple, beta: tuple, f: int):
        return None

    def describe(self, graph: Graph) -> str:
        return self.name


class AllOf(Constraint):
    """Conjunction; at most one member may use an agreement rule."""

    def __init__(self, *parts):
        self.parts = [p for p in parts if p is not None]
        grouped = [p for p in self.parts if type(p).group_key is not Constraint.group_key]
        if len(grouped) > 1:
            raise ValueError("only one agreement constraint is supported per search")
        self.grouped = grouped[0] if grouped else None
        self.name = " & ".join(p.name for p in self.parts)

    def admissible(self, graph, e, alpha, beta, f):
        return all(p.admissible(graph, e, alpha, beta, f) for p in self.parts)

    def group_key(self, graph, e, alpha):
        return self.grouped.group_key(graph, e, alpha) if self.grouped else None

    def group_value(self, graph, e, alpha, beta, f):
        return self.grouped.group_value(graph, e, alpha, beta, f) if self.grouped else None

    def describe(self, graph):
        return " & ".join(p.describe(graph) for p in self.parts)


class AlwaysTrue(Constraint):
    name = "always-true"


class RejectFirstEdge(Constraint):
    """Admits nothing for the least edge, so no full graph survives."""

    name = "reject-first-edge"

    def admissible(self, graph, e, alpha, beta, f):
        return e != 0


@dataclass
class FixedPointConstraint(Constraint):
    """tau fixes every path whose first edge lies in ``prefixes``."""

    prefixes: frozenset = frozenset()
    name = "fix-prefixes"

    def resolved(self, graph: Graph) -> set[int]:
        out = set()
        for p in self.prefixes:
            out.add(p if isinstance(p, int) else graph.edge_index[p])
        return out

    def admissible(self, graph, e, alpha, beta, f):
        if e not in self._cache(graph):
            return True
        return (e,) + alpha == beta + (f,)

    def _cache(self, graph):
        key = id(graph)
        if getattr(self, "_key", None) != key:
            self._key = key
            self._set = self.resolved(graph)
        return self._set

    def describe(self, graph):
        names = sorted(graph.edges[e] for e in self.resolved(graph))
        return "fix-prefixes " + ",".join(names)


class PatternConstraint(Constraint):
    """lambda(T_i) stays in the algebra generated by the ``T_j = sum of S_e over group j``.

    Needs a partition in which every vertex receives exactly one edge of each
    group, so a group word and a range vertex pin down a path.
    Then lambda(T_i) is a sum of words in the T_j and their adjoints exactly
    when the group word of tau(e alpha) depends only on the group word of
    alpha, for e in group i. Only groups listed in ``targets`` are enforced.
    """

    name = "pattern"

    def __init__(self, graph: Graph, groups, targets=None):
        self.groups = [[graph.edge_index[x] if isinstance(x, str) else x for x in grp]
                       for grp in groups]
        self.label = {}
        for i, grp in enumerate(self.groups):
            for e in grp:
                if e in self.label:
                    raise ValueError("generator groups overlap")
                self.label[e] = i
        if len(self.label) != graph.num_edges:
            raise ValueError("generator groups must partition the edges")
        for v in range(graph.num_vertices):
            for i in range(len(self.groups)):
                ins = [e for e in graph.in_edges[v] if self.label[e] == i]
                if len(ins) != 1:
                    raise ValueError("each vertex must receive exactly one edge of every group")
        self.targets = set(range(len(self.groups)) if targets is None else targets)
        self.graph = graph

    def pattern(self, word):
        return tuple(self.label[e] for e in word)

    def group_key(self, graph, e, alpha):
        i = self.label[e]
        if i not in self.targets:
            return None
        return (i, self.pattern(alpha))

    def group_value(self, graph, e, alpha, beta, f):
        return self.pattern(beta + (f,))

    def describe(self, graph):
        return "pattern " + " | ".join(",".join(graph.edges[e] for e in grp) for grp in self.groups)


# -- configuration -------------------------------------------------------------------

@dataclass
class SearchConfig:
    level: int
    mode: str = "outer-classes"
    constraint: Constraint | None = None
    jobs: int = 1
    emit: str = "collect"
    node_budget: int | None = None
    time_budget: float | None = None
    split_depth: int | None = None
    endomorphism_cap: int = 10**7
    chunk_nodes: int = 1 << 22
    progress: object = None

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.emit not in EMITS:
            raise ValueError(f"emit must be one of {EMITS}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("PERMWEYL_JOBS", "1")))
    except ValueError:
        return 1


@dataclass
class SearchResult:
    count: int = 0
    items: list = field(default_factory=list)
    nodes: int = 0
    complete: bool = True
    elapsed: float = 0.0
    reason: str = ""


# -- problem setup ---------------------------------------------------------------------

class Problem:
    """Slots, candidates and block data for one (graph, level, constraint)."""

    def __init__(self, graph: Graph, level: int, constraint: Constraint | None = None,
                 forced_first: bool = False):
        self.graph = graph
        self.level = level
        g = graph
        nodes = g.level(level - 1)
        self.nodes = nodes
        N, M = len(nodes), g.num_edges
        self.N, self.M = N, M
        slots = []
        for e in range(M):
            grp = sorted((i for i in range(N) if nodes.src[i] == g.rng[e]),
                         key=lambda i: (nodes.rng[i], nodes.block_pos[i]))
            slots.extend((e, a) for a in grp)
        self.slots = slots
        ptr = [0]
        cb, cf, cv = [], [], []
        gkeys, gvals = {}, {}
        sgrp = []
        for e, a in slots:
            key = None if constraint is None else constraint.group_key(g, e, nodes.words[a])
            sgrp.append(-1 if key is None else gkeys.setdefault(key, len(gkeys)))
            for f in range(M):
                if g.rng[f] != nodes.rng[a]:
                    continue
                for b in nodes.blocks.get((g.src[e], g.src[f]), ()):
                    if constraint is not None and not constraint.admissible(
                            g, e, nodes.words[a], nodes.words[b], f):
                        continue
                    cb.append(b)
                    cf.append(f)
                    if sgrp[-1] >= 0:
                        val = constraint.group_value(g, e, nodes.words[a], nodes.words[b], f)
                        cv.append(gvals.setdefault(val, len(gvals)))
                    else:
                        cv.append(0)
            ptr.append(len(cb))
        if forced_first:
            # forced slots first, then agreeing slots next to each other
            order = sorted(range(len(slots)),
                           key=lambda j: (ptr[j + 1] - ptr[j] != 1, sgrp[j] if sgrp[j] >= 0 else -1))
            slots, cb, cf, cv, sgrp, ptr = _reorder(slots, cb, cf, cv, sgrp, ptr, order)
            self.slots = slots
        S = len(slots)
        self.S = S
        self.slot_e = np.array([s[0] for s in slots], dtype=np.int64)
        self.slot_a = np.array([s[1] for s in slots], dtype=np.int64)
        self.cand_ptr = np.array(ptr, dtype=np.int64)
        self.cand_b = np.array(cb if cb else [0], dtype=np.int64)
        self.cand_f = np.array(cf if cf else [0], dtype=np.int64)
        self.cand_val = np.array(cv if cv else [0], dtype=np.int64)
        self.slot_grp = np.array(sgrp, dtype=np.int64)
        self.ngroups = len(gkeys)
        keys = list(nodes.blocks)
        bidx = {k: n for n, k in enumerate(keys)}
        self.node_block = np.array([bidx[nodes.src[i], nodes.rng[i]] for i in range(N)],
                                   dtype=np.int64)
        self.node_bpos = np.array(nodes.block_pos, dtype=np.int64)
        self.nblocks = len(keys)
        # arc capacity: one unordered arc per pair of equally labeled edges
        per_first = np.bincount(self.slot_e, minlength=M)
        per_second = np.zeros(M, dtype=np.int64)
        for f in range(M):
            per_second[f] = sum(1 for i in range(N) if nodes.rng[i] == g.src[f])
        self.arc_cap = int(max((per_first ** 2).sum(), (per_second ** 2).sum(), 1))
        self.list_cap = int(max(per_first.max(initial=1), per_second.max(initial=1), 1))

    def permutation(self, choice) -> EndpointFixingPermutation:
        g, words = self.graph, self.nodes.words
        mapping = {}
        for j, c in enumerate(choice):
            e, a = self.slots[j]
            b, f = int(self.cand_b[c]), int(self.cand_f[c])
            mapping[(e,) + words[a]] = words[b] + (f,)
        return EndpointFixingPermutation.from_mapping(g, self.level, mapping)

    def ordered(self, choice) -> OrderedPermutationGraph:
        """The graph as placed, read with o^i_{u->v} = i-th vertex of its block."""
        nodes = self.nodes

        def sym(i):
            return (nodes.src[i], nodes.rng[i], nodes.block_pos[i])

        edges = []
        for j, c in enumerate(choice):
            e, a = self.slots[j]
            b, f = int(self.cand_b[c]), int(self.cand_f[c])
            edges.append((sym(b), sym(a), e, f))
        return OrderedPermutationGraph(self.graph, self.level, edges)


def make_problem(graph, level, constraint, mode) -> Problem:
    """Outer classes need the canonical slot order; other modes may fill forced slots first."""
    forced = constraint is not None and mode != "outer-classes"
    return Problem(graph, level, constraint, forced_first=forced)


def _reorder(slots, cb, cf, cv, sgrp, ptr, order):
    nslots, ncb, ncf, ncv, nptr = [], [], [], [], [0]
    for j in order:
        nslots.append(slots[j])
        ncb.extend(cb[ptr[j]:ptr[j + 1]])
        ncf.extend(cf[ptr[j]:ptr[j + 1]])
        ncv.extend(cv[ptr[j]:ptr[j + 1]])
        nptr.append(len(ncb))
    return nslots, ncb, ncf, ncv, [sgrp[j] for j in order], nptr


class KernelState:
    """All mutable arrays of one search; the kernel resumes from them."""

    def __init__(self, pb: Problem, outer: bool, sync: bool, lo=None, hi=None, target=None,
                 buffer=4096, store=True):
        S, N, M = pb.S, pb.N, pb.M
        self.lo = np.array(pb.cand_ptr[:-1] if lo is None else lo, dtype=np.int64)
        self.hi = np.array(pb.cand_ptr[1:] if hi is None else hi, dtype=np.int64)
        self.ctrl = np.zeros(8, dtype=np.int64)
        # ctrl: 0 depth, 1 started, 2 target, 3 outer, 4 sync, 5 store, 6 solutions, 7 nodes
        self.ctrl[2] = S if target is None else target
        self.ctrl[3] = int(outer)
        self.ctrl[4] = int(sync)
        self.ctrl[5] = int(store)
        self.ptr = np.zeros(S + 1, dtype=np.int64)
        self.choice = np.zeros(S + 1, dtype=np.int64)
        self.occ2 = np.zeros(M * N, dtype=np.int64)
        self.used = np.zeros(N, dtype=np.int64)
        self.fresh = np.zeros(max(pb.nblocks, 1), dtype=np.int64)
        self.l_cnt = np.zeros((2, M), dtype=np.int64)
        self.l_b = np.zeros((2, M, pb.list_cap), dtype=np.int64)
        self.l_a = np.zeros((2, M, pb.list_cap), dtype=np.int64)
        self.head = np.full((2, N * N), -1, dtype=np.int64)
        self.arc_to = np.zeros((2, pb.arc_cap), dtype=np.int64)
        self.arc_from = np.zeros((2, pb.arc_cap), dtype=np.int64)
        self.arc_next = np.zeros((2, pb.arc_cap), dtype=np.int64)
        self.arc_top = np.zeros(2, dtype=np.int64)
        self.saved = np.zeros((2, S + 1), dtype=np.int64)
        self.stamp = np.zeros(N * N, dtype=np.int64)
        self.stack = np.zeros(N * N + 1, dtype=np.int64)
        self.stamp_ctr = np.zeros(1, dtype=np.int64)
        self.out = np.zeros((buffer, max(S, 1)), dtype=np.int64)
        self.grp_val = np.zeros(max(pb.ngroups, 1), dtype=np.int64)
        self.grp_cnt = np.zeros(max(pb.ngroups, 1), dtype=np.int64)


@njit(cache=True)
def _reaches(head, arc_to, arc_next, L, src, dst, stamp, stack, stamp_ctr):
    if src == dst:
        return True
    stamp_ctr[0] += 1
    cur = stamp_ctr[0]
    sp = 0
    stack[sp] = src
    sp += 1
    stamp[src] = cur
    while sp > 0:
        sp -= 1
        x = stack[sp]
        arc = head[L, x]
        while arc >= 0:
            y = arc_to[L, arc]
            if y == dst:
                return True
            if stamp[y] != cur:
                stamp[y] = cur
                stack[sp] = y
                sp += 1
            arc = arc_next[L, arc]
    return False


@njit(cache=True)
def _add_arcs(L, lab, b, a, N, l_cnt, l_b, l_a, head, arc_to, arc_from, arc_next, arc_top,
              stamp, stack, stamp_ctr):
    """Join the new edge b->a to every placed edge with the same label; False on a cycle."""
    n = l_cnt[L, lab]
    for t in range(n):
        b2 = l_b[L, lab, t]
        a2 = l_a[L, lab, t]
        if b2 == b or a2 == a:
            continue
        if b < b2:
            u = b * N + b2
        else:
            u = b2 * N + b
        if a < a2:
            w = a * N + a2
        else:
            w = a2 * N + a
        if _reaches(head, arc_to, arc_next, L, w, u, stamp, stack, stamp_ctr):
            return False
        x = arc_top[L]
        arc_to[L, x] = w
        arc_from[L, x] = u
        arc_next[L, x] = head[L, u]
        head[L, u] = x
        arc_top[L] = x + 1
    return True


@njit(cache=True)
def _pop_arcs(L, upto, head, arc_from, arc_next, arc_top):
    while arc_top[L] > upto:
        x = arc_top[L] - 1
        head[L, arc_from[L, x]] = arc_next[L, x]
        arc_top[L] = x


@njit(cache=True)
def _unplace(d, slot_e, slot_a, cand_b, cand_f, choice, N, occ2, used, fresh, node_block,
             l_cnt, saved, head, arc_from, arc_next, arc_top, slot_grp, grp_cnt):
    c = choice[d]
    if slot_grp[d] >= 0:
        grp_cnt[slot_grp[d]] -= 1
    b = cand_b[c]
    f = cand_f[c]
    occ2[f * N + b] = 0
    used[b] -= 1
    if used[b] == 0:
        fresh[node_block[b]] -= 1
    l_cnt[0, slot_e[d]] -= 1
    l_cnt[1, f] -= 1
    _pop_arcs(0, saved[0, d], head, arc_from, arc_next, arc_top)
    _pop_arcs(1, saved[1, d], head, arc_from, arc_next, arc_top)


@njit(cache=True)
def search_kernel(slot_e, slot_a, cand_b, cand_f, node_block, node_bpos, N,
                  lo, hi, ctrl, ptr, choice, occ2, used, fresh, l_cnt, l_b, l_a,
                  head, arc_to, arc_from, arc_next, arc_top, saved, stamp, stack, stamp_ctr,
                  out, node_limit, slot_grp, cand_val, grp_val, grp_cnt):
    """Run until done (0), ``node_limit`` more placements (1), or a full buffer (2).

    Returns (status, number of rows written to ``out``).
    """
    target = ctrl[2]
    outer = ctrl[3] == 1
    sync = ctrl[4] == 1
    store = ctrl[5] == 1
    nout = 0
    cap = out.shape[0]
    stop_at = ctrl[7] + node_limit
    if ctrl[1] == 0:
        ctrl[1] = 1
        ctrl[0] = 0
        if target == 0:
            ctrl[6] += 1
            ctrl[0] = -1
            return 0, 0
        ptr[0] = lo[0]
    d = ctrl[0]
    if d < 0:
        return 0, 0
    while True:
        if d == target:
            ctrl[6] += 1
            if store:
                for j in range(target):
                    out[nout, j] = choice[j]
                nout += 1
            d -= 1
            _unplace(d, slot_e, slot_a, cand_b, cand_f, choice, N, occ2, used, fresh,
                     node_block, l_cnt, saved, head, arc_from, arc_next, arc_top, slot_grp, grp_cnt)
            if store and nout == cap:
                ctrl[0] = d
                return 2, nout
            continue
        if ctrl[7] >= stop_at:
            ctrl[0] = d
            return 1, nout
        placed = False
        e = slot_e[d]
        a = slot_a[d]
        while ptr[d] < hi[d]:
            c = ptr[d]
            ptr[d] += 1
            b = cand_b[c]
            f = cand_f[c]
            if occ2[f * N + b] != 0:
                continue
            if outer and node_bpos[b] > fresh[node_block[b]]:
                continue
            gi = slot_grp[d]
            if gi >= 0 and grp_cnt[gi] > 0 and grp_val[gi] != cand_val[c]:
                continue
            saved[0, d] = arc_top[0]
            saved[1, d] = arc_top[1]
            if sync:
                ok = _add_arcs(0, e, b, a, N, l_cnt, l_b, l_a, head, arc_to, arc_from,
                               arc_next, arc_top, stamp, stack, stamp_ctr)
                if ok:
                    ok = _add_arcs(1, f, b, a, N, l_cnt, l_b, l_a, head, arc_to, arc_from,
                                   arc_next, arc_top, stamp, stack, stamp_ctr)
                if not ok:
                    _pop_arcs(0, saved[0, d], head, arc_from, arc_next, arc_top)
                    _pop_arcs(1, saved[1, d], head, arc_from, arc_next, arc_top)
                    continue
            occ2[f * N + b] = 1
            used[b] += 1
            if used[b] == 1:
                fresh[node_block[b]] += 1
            n1 = l_cnt[0, e]
            l_b[0, e, n1] = b
            l_a[0, e, n1] = a
            l_cnt[0, e] = n1 + 1
            n2 = l_cnt[1, f]
            l_b[1, f, n2] = b
            l_a[1, f, n2] = a
            l_cnt[1, f] = n2 + 1
            if gi >= 0:
                if grp_cnt[gi] == 0:
                    grp_val[gi] = cand_val[c]
                grp_cnt[gi] += 1
            choice[d] = c
            ctrl[7] += 1
            placed = True
            break
        if placed:
            d += 1
            if d < target:
                ptr[d] = lo[d]
            continue
        if d == 0:
            ctrl[0] = -1
            return 0, nout
        d -= 1
        _unplace(d, slot_e, slot_a, cand_b, cand_f, choice, N, occ2, used, fresh,
                 node_block, l_cnt, saved, head, arc_from, arc_next, arc_top, slot_grp, grp_cnt)


def _run_kernel(pb: Problem, st: KernelState, node_limit: int, python: bool = False):
    fn = search_kernel.py_func if (python and HAVE_NUMBA) else search_kernel
    return fn(pb.slot_e, pb.slot_a, pb.cand_b, pb.cand_f, pb.node_block, pb.node_bpos, pb.N,
              st.lo, st.hi, st.ctrl, st.ptr, st.choice, st.occ2, st.used, st.fresh, st.l_cnt,
              st.l_b, st.l_a, st.head, st.arc_to, st.arc_from, st.arc_next, st.arc_top,
              st.saved, st.stamp, st.stack, st.stamp_ctr, st.out, node_limit,
              pb.slot_grp, pb.cand_val, st.grp_val, st.grp_cnt)


# -- drivers -----------------------------------------------------------------------------

class Cancelled(Exception):
    pass


def _flags(mode):
    return mode == "outer-classes", mode != "all-endomorphisms"


def iter_choices(pb: Problem, mode: str, lo=None, hi=None, target=None, store=True,
                 node_budget=None, time_budget=None, chunk=1 << 22, progress=None,
                 cancel=None, python=False, stats=None):
    """Yield candidate-index tuples of solutions in canonical DFS order.

    ``stats`` (a dict) receives nodes, solutions and whether the run completed.
    """
    outer, sync = _flags(mode)
    st = KernelState(pb, outer, sync, lo, hi, target, store=store)
    t0 = time.monotonic()
    stats = {} if stats is None else stats
    stats.update(nodes=0, solutions=0, complete=False, reason="")
    while True:
        limit = chunk
        if node_budget is not None:
            limit = min(limit, node_budget - int(st.ctrl[7]))
            if limit <= 0:
                stats["reason"] = f"node budget {node_budget} exhausted"
                break
        status, nout = _run_kernel(pb, st, limit, python=python)
        stats["nodes"] = int(st.ctrl[7])
        stats["solutions"] = int(st.ctrl[6])
        for r in range(nout):
            yield tuple(int(x) for x in st.out[r, :st.ctrl[2]])
        if status == DONE:
            stats["complete"] = True
            break
        if progress is not None:
            progress(stats["nodes"], stats["solutions"], time.monotonic() - t0)
        if cancel is not None and cancel():
            stats["reason"] = "cancelled"
            break
        if time_budget is not None and time.monotonic() - t0 > time_budget:
            stats["reason"] = f"time budget {time_budget}s exhausted"
            break
    stats["elapsed"] = time.monotonic() - t0


def _prefixes(pb, mode, depth):
    return list(iter_choices(pb, mode, target=depth))


def _worker(args):
    graph_json, level, constraint, mode, prefixes, depth, store = args
    from .graph import parse_graph_json
    g = parse_graph_json(graph_json)
    pb = make_problem(g, level, constraint, mode)
    results = []
    for pre in prefixes:
        lo = pb.cand_ptr[:-1].copy()
        hi = pb.cand_ptr[1:].copy()
        for j, c in enumerate(pre):
            lo[j], hi[j] = c, c + 1
        stats = {}
        sols = list(iter_choices(pb, mode, lo=lo, hi=hi, store=store, stats=stats))
        results.append((sols, stats["solutions"], stats["nodes"]))
    return results


def default_split_depth(pb: Problem) -> int:
    """After all placements of the least edge."""
    return int(np.sum(pb.slot_e == 0))


def run_search(graph: Graph, config: SearchConfig, cancel=None, python=False) -> SearchResult:
    """Run a search to completion or budget; collect items unless counting only."""
    if config.mode == "all-endomorphisms":
        total = count_endpoint_fixing(graph, config.level)
        if total > config.endomorphism_cap:
            raise SearchCapExceeded(f"{total} endpoint-fixing permutations at level "
                                    f"{config.level} exceed the cap {config.endomorphism_cap}")
    pb = make_problem(graph, config.level, config.constraint, config.mode)
    store = config.emit != "count-only"
    res = SearchResult()
    t0 = time.monotonic()
    convert = _converter(pb, config.mode)
    if config.jobs <= 1:
        stats = {}
        for ch in iter_choices(pb, config.mode, store=store, node_budget=config.node_budget,
                               time_budget=config.time_budget, chunk=config.chunk_nodes,
                               progress=config.progress, cancel=cancel, python=python,
                               stats=stats):
            res.items.append(convert(ch))
        res.count = stats["solutions"]
        res.nodes = stats["nodes"]
        res.complete = stats["complete"]
        res.reason = stats["reason"]
    else:
        depth = config.split_depth if config.split_depth is not None else default_split_depth(pb)
        depth = min(depth, pb.S)
        prefixes = _prefixes(pb, config.mode, depth)
        chunks = [prefixes[i::config.jobs] for i in range(config.jobs)]
        payload = [(graph.to_json(), config.level, config.constraint, config.mode, ch, depth, store)
                   for ch in chunks]
        ctx = mp.get_context("spawn" if os.name == "nt" else "fork")
        with ctx.Pool(config.jobs) as pool:
            parts = pool.map(_worker, payload)
        # undo the round-robin split so results follow prefix order
        merged = [None] * len(prefixes)
        for i, part in enumerate(parts):
            for n, r in enumerate(part):
                merged[i + n * config.jobs] = r
        for sols, nsol, nodes in merged:
            res.count += nsol
            res.nodes += nodes
            res.items.extend(convert(ch) for ch in sols)
        res.complete = True
    res.elapsed = time.monotonic() - t0
    return res


def _converter(pb, mode):
    if mode == "outer-classes":
        return pb.ordered
    return lambda ch: PermutationGraph(pb.permutation(ch))


def _stream(graph, config, mode, cancel=None):
    if config.jobs > 1:
        cfg = SearchConfig(**{**config.__dict__, "mode": mode})
        yield from run_search(graph, cfg, cancel=cancel).items
        return
    pb = make_problem(graph, config.level, config.constraint, config.mode)
    convert = _converter(pb, mode)
    for ch in iter_choices(pb, mode, node_budget=config.node_budget,
                           time_budget=config.time_budget, chunk=config.chunk_nodes,
                           progress=config.progress, cancel=cancel):
        yield convert(ch)


def enumerate_automorphisms(graph: Graph, config: SearchConfig, cancel=None):
    """Stream of permutation graphs of all level-k permutative automorphisms."""
    return _stream(graph, config, "all-automorphisms", cancel)


def enumerate_outer_classes(graph: Graph, config: SearchConfig, cancel=None):
    """Stream of ordered permutation graphs, one per outer class."""
    return _stream(graph, config, "outer-classes", cancel)


def enumerate_endomorphisms(graph: Graph, config: SearchConfig, cancel=None):
    total = count_endpoint_fixing(graph, config.level)
    if total > config.endomorphism_cap:
        raise SearchCapExceeded(f"{total} endpoint-fixing permutations exceed the cap "
                                f"{config.endomorphism_cap}")
    return _stream(graph, config, "all-endomorphisms", cancel)


def enumerate_constrained(graph: Graph, config: SearchConfig, cancel=None):
    """Stream of the chosen mode with ``config.constraint`` pruning inside the search."""
    return _stream(graph, config, config.mode, cancel)


class IncompleteSearch(RuntimeError):
    def __init__(self, result: SearchResult):
        super().__init__(f"search stopped early ({result.reason}) after {result.nodes} nodes "
                         f"with {result.count} solutions so far")
        self.result = result


def count(graph: Graph, config: SearchConfig, cancel=None) -> int:
    cfg = SearchConfig(**{**config.__dict__, "emit": "count-only"})
    res = run_search(graph, cfg, cancel=cancel)
    if not res.complete:
        raise IncompleteSearch(res)
    return res.count


def derived_automorphism_count(graph: Graph, level: int, classes: int) -> int:
    """Classes times orbit size; every orbit of g_pi has |Perm_ef(E^{k-1})| members."""
    if level == 1:
        return classes
    return classes * count_endpoint_fixing(graph, level - 1)


def warm_up():
    """Compile the kernel on a tiny instance (numba caches it on disk)."""
    from .graph import cuntz
    pb = Problem(cuntz(2), 2)
    list(iter_choices(pb, "outer-classes"))
