"""Finite directed multigraphs, their paths, and the base orders used throughout.

Vertices and edges carry string names. Internally both are dense integers:
vertices in declaration order, edges in the base order (source rank, range
rank, declaration order). Paths are tuples of edge indices, so Python's
tuple ordering is exactly the lexicographic order on edge ranks.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GraphFormatError(ValueError):
    """Malformed graph description (duplicate names, dangling endpoints, bad syntax)."""


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return "invalid:\n" + "\n".join(f"  - {p}" for p in self.problems)


class Level:
    """The nodes of one path level, grouped into (source, range) blocks.

    For ``j >= 1`` the nodes are the paths of length ``j`` sorted by
    (source, range, word). For ``j == 0`` they are the base vertices, each
    standing for the empty path at that vertex.
    """

    def __init__(self, graph: Graph, j: int):
        self.graph = graph
        self.j = j
        if j == 0:
            self.words = [() for _ in graph.vertices]
            self.src = list(range(graph.num_vertices))
            self.rng = list(range(graph.num_vertices))
        else:
            ps = graph.paths(j)
            ps = sorted(ps, key=lambda p: (graph.src[p[0]], graph.rng[p[-1]], p))
            self.words = ps
            self.src = [graph.src[p[0]] for p in ps]
            self.rng = [graph.rng[p[-1]] for p in ps]
        self.index = {w: i for i, w in enumerate(self.words)} if j else {}
        self.blocks: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i in range(len(self.words)):
            self.blocks[self.src[i], self.rng[i]].append(i)
        self.blocks = dict(self.blocks)
        self.block_pos = [0] * len(self.words)
        for members in self.blocks.values():
            for pos, i in enumerate(members):
                self.block_pos[i] = pos

    def __len__(self) -> int:
        return len(self.words)

    def find(self, word: tuple[int, ...], vertex: int | None = None) -> int:
        """Node index of ``word``; level 0 needs the vertex the empty path sits at."""
        if self.j == 0:
            if vertex is None:
                raise ValueError("level-0 nodes are identified by a vertex")
            return vertex
        return self.index[tuple(word)]

    def from_vertex(self, u: int) -> list[int]:
        return [i for i in range(len(self.words)) if self.src[i] == u]

    def into_vertex(self, v: int) -> list[int]:
        return [i for i in range(len(self.words)) if self.rng[i] == v]

    def name(self, i: int) -> str:
        if self.j == 0:
            return self.graph.vertices[i]
        return self.graph.path_name(self.words[i])


class Graph:
    """Finite directed multigraph with named vertices and edges.

    ``edges`` is a sequence of ``(name, source, target)`` triples. Structural
    errors (duplicates, unknown endpoints) raise :class:`GraphFormatError`;
    dynamical conditions (sinks, sources, exitless cycles) are reported by
    :func:`validate` instead.
    """

    def __init__(self, vertices, edges):
        vertices = tuple(str(v) for v in vertices)
        seen = set()
        for v in vertices:
            if v in seen:
                raise GraphFormatError(f"duplicate vertex {v!r}")
            seen.add(v)
        vidx = {v: i for i, v in enumerate(vertices)}
        decl = []
        names = set()
        for n, (name, s, t) in enumerate(edges):
            name = str(name)
            if name in names:
                raise GraphFormatError(f"duplicate edge {name!r}")
            names.add(name)
            for end in (s, t):
                if end not in vidx:
                    raise GraphFormatError(f"edge {name!r} uses undeclared vertex {end!r}")
            decl.append((vidx[s], vidx[t], n, name))
        decl.sort()
        self.vertices = vertices
        self.vertex_index = vidx
        self.edges = tuple(d[3] for d in decl)
        self.declared_edges = tuple(str(e[0]) for e in edges)
        self.src = tuple(d[0] for d in decl)
        self.rng = tuple(d[1] for d in decl)
        self.edge_index = {name: i for i, name in enumerate(self.edges)}
        self._paths: dict[int, list[tuple[int, ...]]] = {}
        self._levels: dict[int, Level] = {}

    # -- basic structure ---------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_edges(self) -> list[list[int]]:
        out = [[] for _ in self.vertices]
        for e in range(self.num_edges):
            out[self.src[e]].append(e)
        return out

    @cached_property
    def in_edges(self) -> list[list[int]]:
        inc = [[] for _ in self.vertices]
        for e in range(self.num_edges):
            inc[self.rng[e]].append(e)
        return inc

    @cached_property
    def single_char_names(self) -> bool:
        return all(len(n) == 1 and n != "." for n in self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_vertices, self.num_vertices), dtype=object)
        a[:] = 0
        for e in range(self.num_edges):
            a[self.src[e], self.rng[e]] += 1
        return a

    # -- paths -------------------------------------------------------------

    def paths(self, k: int) -> list[tuple[int, ...]]:
        """All paths of length ``k`` in lexicographic order of edge ranks."""
        if k < 1:
            raise ValueError("paths have length >= 1; vertices are handled by level(0)")
        if k not in self._paths:
            if k == 1:
                ps = [(e,) for e in range(self.num_edges)]
            else:
                ps = [p + (e,) for p in self.paths(k - 1) for e in self.out_edges[self.rng[p[-1]]]]
            self._paths[k] = ps
        return self._paths[k]

    def level(self, j: int) -> Level:
        if j < 0:
            raise ValueError("negative level")
        if j not in self._levels:
            self._levels[j] = Level(self, j)
        return self._levels[j]

    def is_path(self, word) -> bool:
        return len(word) > 0 and all(self.rng[a] == self.src[b] for a, b in zip(word, word[1:]))

    def path_source(self, word) -> int:
        return self.src[word[0]]

    def path_range(self, word) -> int:
        return self.rng[word[-1]]

    def path_name(self, word) -> str:
        sep = "" if self.single_char_names else "."
        return sep.join(self.edges[e] for e in word)

    def parse_path(self, text: str) -> tuple[int, ...]:
        """Inverse of :meth:`path_name`; dots separate edge names when present."""
        text = text.strip()
        if not text:
            raise ValueError("empty path")
        if "." in text:
            parts = text.split(".")
        elif text in self.edge_index:
            parts = [text]
        else:
            parts = list(text)
        try:
            word = tuple(self.edge_index[p] for p in parts)
        except KeyError as exc:
            raise ValueError(f"unknown edge {exc.args[0]!r} in path {text!r}") from None
        if not self.is_path(word):
            raise ValueError(f"{text!r} is not a path: consecutive edges do not compose")
        return word

    def count_paths_by_endpoints(self, k: int) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = defaultdict(int)
        for p in self.paths(k):
            counts[self.src[p[0]], self.rng[p[-1]]] += 1
        return dict(counts)

    # -- identity ----------------------------------------------------------

    def to_json(self) -> dict:
        order = {n: i for i, n in enumerate(self.declared_edges)}
        edges = sorted(range(self.num_edges), key=lambda e: order[self.edges[e]])
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"name": self.edges[e], "source": self.vertices[self.src[e]],
                 "target": self.vertices[self.rng[e]]}
                for e in edges
            ],
        }

    def to_text(self) -> str:
        d = self.to_json()
        lines = [f"vertex {v}" for v in d["vertices"]]
        lines += [f"edge {e['name']} {e['source']} {e['target']}" for e in d["edges"]]
        return "\n".join(lines) + "\n"

    @cached_property
    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, Graph) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(self.digest)

    def __repr__(self):
        return f"Graph({self.num_vertices} vertices, {self.num_edges} edges)"


def validate(graph: Graph) -> ValidationReport:
    problems = []
    for v, name in enumerate(graph.vertices):
        if not graph.out_edges[v]:
            problems.append(f"vertex {name} is a sink (emits no edges)")
        if not graph.in_edges[v]:
            problems.append(f"vertex {name} is a source (receives no edges)")
    # A cycle without exit lives entirely among out-degree-1 vertices.
    succ = {v: graph.rng[graph.out_edges[v][0]] for v in range(graph.num_vertices)
            if len(graph.out_edges[v]) == 1}
    state = {}
    for start in succ:
        v = start
        trail = []
        while v in succ and v not in state:
            state[v] = start
            trail.append(v)
            v = succ[v]
        if v in succ and state.get(v) == start:
            cyc = trail[trail.index(v):]
            problems.append("cycle through " + ", ".join(graph.vertices[u] for u in cyc)
                            + " has no exit")
    if graph.num_vertices == 0:
        problems.append("graph has no vertices")
    return ValidationReport(tuple(problems))


def require_valid(graph: Graph) -> None:
    report = validate(graph)
    if not report.valid:
        raise GraphFormatError(str(report))


# -- file formats -------------------------------------------------------------

def parse_graph_text(text: str) -> Graph:
    vertices, edges = [], []
    vseen, eseen = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "vertex" and len(tok) == 2:
            if tok[1] in vseen:
                raise GraphFormatError(f"line {lineno}: duplicate vertex {tok[1]!r} "
                                       f"(first declared on line {vseen[tok[1]]})")
            vseen[tok[1]] = lineno
            vertices.append(tok[1])
        elif tok[0] == "edge" and len(tok) == 4:
            name, s, t = tok[1:]
            if name in eseen:
                raise GraphFormatError(f"line {lineno}: duplicate edge {name!r} "
                                       f"(first declared on line {eseen[name]})")
            for end in (s, t):
                if end not in vseen:
                    raise GraphFormatError(f"line {lineno}: edge {name!r} uses undeclared vertex {end!r}")
            eseen[name] = lineno
            edges.append((name, s, t))
        else:
            raise GraphFormatError(f"line {lineno}: cannot parse {raw.strip()!r}")
    return Graph(vertices, edges)


def parse_graph_json(text_or_obj) -> Graph:
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    try:
        vertices = obj["vertices"]
        raw_edges = obj["edges"]
    except (KeyError, TypeError):
        raise GraphFormatError("graph JSON needs 'vertices' and 'edges'") from None
    vseen = set()
    for i, v in enumerate(vertices):
        if v in vseen:
            raise GraphFormatError(f"vertices[{i}]: duplicate vertex {v!r}")
        vseen.add(v)
    edges, eseen = [], set()
    for i, e in enumerate(raw_edges):
        try:
            name, s, t = e["name"], e["source"], e["target"]
        except (KeyError, TypeError):
            raise GraphFormatError(f"edges[{i}]: needs name, source, target") from None
        if name in eseen:
            raise GraphFormatError(f"edges[{i}]: duplicate edge {name!r}")
        for end in (s, t):
            if end not in vseen:
                raise GraphFormatError(f"edges[{i}]: edge {name!r} uses undeclared vertex {end!r}")
        eseen.add(name)
        edges.append((name, s, t))
    return Graph(vertices, edges)


def load_graph(path) -> Graph:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        return parse_graph_json(text)
    return parse_graph_text(text)


def bowtie() -> Graph:
    return Graph("uvw", [("a", "u", "u"), ("b", "u", "v"), ("c", "v", "u"),
                         ("d", "v", "w"), ("e", "w", "v"), ("f", "w", "w")])


def golden_mean() -> Graph:
    return Graph("uv", [("1", "u", "u"), ("2", "v", "u"), ("3", "u", "v")])


def cuntz(n: int) -> Graph:
    """One vertex with ``n`` loops named a, b, c, ... (the graph of O_n)."""
    if n < 2:
        raise ValueError("O_n needs n >= 2 loops to have an exit")
    names = "abcdefghijklmnopqrstuvwxyz"
    return Graph(["o"], [(names[i], "o", "o") for i in range(n)])


def builtin_graph(name: str) -> Graph:
    if name == "bowtie":
        return bowtie()
    if name in ("golden", "golden-mean", "golden_mean"):
        return golden_mean()
    if name.startswith("o") and name[1:].isdigit():
        return cuntz(int(name[1:]))
    raise KeyError(f"no built-in graph named {name!r}")

