"""Command-line driver: ``permweyl <verb> GRAPH [options]``.

Exit status is 2 for usage errors, 1 for bad input data and 0 otherwise,
including negative answers such as "not an automorphism".
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from functools import reduce

from . import algebra
from .algebra import (ExceedsBound, Finite, compose_codes, code_of, edge_permutation, graph_symmetries,
                      quotient_by_graph_symmetries)
from .dynamics import (NotSynchronizingError, is_automorphism, is_synchronizing, ordered_permutation_graph,
                       shift_space_equivalent, synchronization_delay, synchronization_witness)
from .graph import Graph, GraphFormatError, builtin_graph, load_graph, validate
from .permgraph import build_permutation_graph, check_lemma_properties
from .permutations import CycleNotationError, count_endpoint_fixing, format_cycles, parse_cycles
from .search import SearchConfig, count, default_jobs, derived_automorphism_count, enumerate_constrained
from .search import AllOf, FixedPointConstraint, PatternConstraint

LONG_RUN = 10**9


class DataError(Exception):
    pass


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.1.0"


# -- shared helpers ------------------------------------------------------------------

def read_graph(source: str) -> tuple[Graph, str]:
    if os.path.exists(source):
        return load_graph(source), os.path.basename(source)
    try:
        return builtin_graph(source), source
    except KeyError:
        raise DataError(f"no graph file or built-in graph named {source!r}") from None


def read_perm(g: Graph, level: int, text: str, inverse: bool = False):
    perm = parse_cycles(g, level, text)
    return perm.inverse() if inverse else perm


def header(args, g: Graph, name: str) -> dict:
    skip = {"func", "json", "dot", "jobs", "verb"}
    config = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    return {"tool": f"permweyl {tool_version()}", "graph": name, "graph_sha256": g.digest,
            "verb": args.verb, "config": config}


def emit(args, head: dict, result: dict, lines: list[str]):
    if args.json:
        print(json.dumps({"header": head, "result": result}, indent=2, sort_keys=True))
        return
    print(f"# {head['tool']} | graph {head['graph']} sha256:{head['graph_sha256']} | "
          f"{head['verb']} {json.dumps(head['config'], sort_keys=True)}")
    for line in lines:
        print(line)


def _tf(b: bool) -> str:
    return "true" if b else "false"


def order_text(res) -> str:
    if isinstance(res, Finite):
        return str(res.n)
    return str(res)


# -- verbs ------------------------------------------------------------------------------

def cmd_validate(args, g, name):
    report = validate(g)
    result = {"valid": report.valid, "problems": list(report.problems),
              "vertices": g.num_vertices, "edges": g.num_edges}
    lines = [f"valid: {_tf(report.valid)}", f"vertices: {g.num_vertices}", f"edges: {g.num_edges}"]
    lines += [f"problem: {p}" for p in report.problems]
    emit(args, header(args, g, name), result, lines)
    return 0 if report.valid else 1


def cmd_paths(args, g, name):
    counts = g.count_paths_by_endpoints(args.level)
    result = {"level": args.level, "total": sum(counts.values()),
              "by_endpoints": {f"{g.vertices[u]}->{g.vertices[v]}": n for (u, v), n in sorted(counts.items())}}
    lines = [f"paths of length {args.level}: {result['total']}"]
    lines += [f"  {k}: {n}" for k, n in result["by_endpoints"].items()]
    if args.list:
        result["paths"] = [g.path_name(p) for p in g.paths(args.level)]
        lines += result["paths"]
    emit(args, header(args, g, name), result, lines)
    return 0


def cmd_count_perms(args, g, name):
    n = count_endpoint_fixing(g, args.level)
    emit(args, header(args, g, name), {"level": args.level, "count": n},
         [f"endpoint-fixing permutations at level {args.level}: {n}"])
    return 0


def cmd_permgraph(args, g, name):
    perm = read_perm(g, args.level, args.perm, args.inverse)
    pg = build_permutation_graph(perm)
    obj = pg
    if args.ordered:
        try:
            obj = ordered_permutation_graph(pg)
        except (ValueError, NotSynchronizingError) as exc:
            raise DataError(f"no ordered graph: {exc}") from None
    if args.dot:
        print(obj.to_dot())
        return 0
    result = obj.to_json()
    if isinstance(result.get("edges"), list) and result["edges"] and isinstance(result["edges"][0], dict):
        lines = [f"{d['source']} -[{d['first']},{d['second']}]-> {d['range']}" for d in result["edges"]]
    else:
        lines = [json.dumps(result, sort_keys=True)]
    emit(args, header(args, g, name), result, lines)
    return 0


def cmd_check(args, g, name):
    perm = read_perm(g, args.level, args.perm, args.inverse)
    pg = build_permutation_graph(perm)
    report = check_lemma_properties(pg)
    result = {"conditions_hold": report.ok}
    lines = [f"permutation graph conditions: {_tf(report.ok)}"]
    for which in ("first", "second"):
        sync = is_synchronizing(pg, which)
        entry = {"synchronizing": sync}
        line = f"{which}: {_tf(sync)}"
        if sync:
            entry["delay"] = synchronization_delay(pg, which)
            line += f" (delay {entry['delay']})"
        else:
            w = synchronization_witness(pg, which)
            entry["witness"] = w.to_json(pg)
            line += f"  witness: {w.describe(pg)}"
        result[which] = entry
        lines.append(line)
    auto = is_automorphism(pg)
    result["automorphism"] = auto
    lines.append(f"automorphism: {_tf(auto)}")
    emit(args, header(args, g, name), result, lines)
    return 0


def cmd_image(args, g, name):
    pg = build_permutation_graph(read_perm(g, args.level, args.perm, args.inverse))
    if (args.edge is None) == (args.path is None):
        raise DataError("give exactly one of --edge and --path")
    s = algebra.image_of_edge(pg, args.edge) if args.edge is not None else algebra.image_of_path(pg, args.path)
    target = args.edge if args.edge is not None else args.path
    emit(args, header(args, g, name), s.to_json(),
         [f"lambda(S_{target}) = {s.render()}", f"collapsed: {s.render_collapsed()}"])
    return 0


def _constraint(args, g):
    parts = []
    if args.fix_prefixes:
        parts.append(FixedPointConstraint(frozenset(x for x in args.fix_prefixes.split(",") if x)))
    if args.pattern:
        groups = [list(grp) if len(grp) == len(set(grp)) and all(c in g.edge_index for c in grp)
                  else grp.split(",") for grp in args.pattern.split("|")]
        targets = [int(t) for t in args.pattern_targets.split(",")] if args.pattern_targets else None
        parts.append(PatternConstraint(g, groups, targets))
    if not parts:
        return None
    return parts[0] if len(parts) == 1 else AllOf(*parts)


def cmd_enumerate(args, g, name):
    mode = "outer-classes" if args.outer else "all-automorphisms"
    constraint = _constraint(args, g)
    if (mode == "all-automorphisms" and constraint is None and not args.confirm_long
            and count_endpoint_fixing(g, args.level) > LONG_RUN):
        print(f"error: a direct automorphism search at level {args.level} is long-running; "
              f"pass --confirm-long or use --outer", file=sys.stderr)
        return 2
    cfg = SearchConfig(level=args.level, mode=mode, constraint=constraint, jobs=args.jobs,
                       time_budget=args.budget,
                       emit="count-only" if args.count_only else "collect")
    head = header(args, g, name)
    result = {"mode": mode}
    lines = []
    if args.count_only and not args.quotient:
        from .search import run_search
        res = run_search(g, cfg)
        result.update(count=res.count, complete=res.complete, nodes=res.nodes)
        lines.append(str(res.count))
        if not res.complete:
            lines.append(f"incomplete: {res.reason} after {res.nodes} nodes")
        if mode == "outer-classes" and constraint is None and res.complete:
            derived = derived_automorphism_count(g, args.level, res.count)
            result["derived_automorphisms"] = derived
            lines.append(f"derived automorphisms: {derived}")
        emit(args, head, result, lines)
        return 0
    items = list(enumerate_constrained(g, SearchConfig(**{**cfg.__dict__, "emit": "collect"})))
    if args.quotient:
        if mode != "outer-classes":
            raise DataError("--quotient needs --outer")
        q = quotient_by_graph_symmetries(items, graph_symmetries(g))
        result.update(classes=len(items), orbits=len(q.representatives),
                      representatives=[format_cycles(og.representative()) for og in q.representatives])
        lines.append(f"classes: {len(items)}")
        lines.append(f"orbits: {len(q.representatives)}")
        if not args.count_only:
            lines += result["representatives"]
        emit(args, head, result, lines)
        return 0
    if mode == "outer-classes":
        names = [format_cycles(og.representative()) for og in items]
    else:
        names = [format_cycles(pg.perm) for pg in items]
    result.update(count=len(items), items=names)
    emit(args, head, result, [str(len(items))] + names)
    return 0


def cmd_compose(args, g, name):
    outer = read_perm(g, args.outer_level, args.outer)
    inner = read_perm(g, args.inner_level, args.inner)
    pg = algebra.compose(outer, inner)
    text = format_cycles(pg.perm)
    ident = algebra.is_identity_graph(pg)
    result = {"level": pg.level, "permutation": text, "identity": ident}
    emit(args, header(args, g, name), result,
         [f"level {pg.level}: {text}", f"identity: {_tf(ident)}"])
    return 0


def cmd_order(args, g, name):
    pg = build_permutation_graph(read_perm(g, args.level, args.perm, args.inverse))
    if not is_automorphism(pg):
        emit(args, header(args, g, name), {"automorphism": False}, ["automorphism: false"])
        return 0
    code = code_of(pg)
    if args.left:
        code = compose_codes(code_of(parse_cycles(g, 1, args.left)), code)
    res = algebra.order(code, args.bound, args.state_budget)
    result = {"order": res.n if isinstance(res, Finite) else None, "result": str(res),
              "certificate": getattr(res, "certificate", "")}
    lines = [f"order: {order_text(res)}"]
    if isinstance(res, ExceedsBound):
        lines.append(f"certificate: {res.certificate}")
    emit(args, header(args, g, name), result, lines)
    return 0


def cmd_equiv(args, g, name):
    a = build_permutation_graph(read_perm(g, args.level, args.perm))
    b = build_permutation_graph(read_perm(g, args.level2 or args.level, args.perm2))
    try:
        verdict = shift_space_equivalent(a, b)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    emit(args, header(args, g, name), {"equivalent": verdict}, [f"equivalent: {_tf(verdict)}"])
    return 0


# -- tables --------------------------------------------------------------------------------

def factorial_form(g: Graph, k: int) -> str:
    sizes = sorted(g.count_paths_by_endpoints(k).values())
    if all(n == 1 for n in sizes):
        return ""
    mult = {}
    for n in sizes:
        mult[n] = mult.get(n, 0) + 1
    d = reduce(math.gcd, mult.values())
    base = [n for n in sorted(mult) for _ in range(mult[n] // d)]
    inner = "·".join(f"{n}!" for n in base)
    return f"({inner})^{d}" if d > 1 else inner


def approx(n: int) -> str:
    if n < 10**7:
        return f"= {n:,}"
    e = len(str(n)) - 1
    return f"≈ {n / 10**e:.1f}·10^{e}"


def bowtie_table(max_level: int = 4, jobs: int = 1) -> list[str]:
    g = builtin_graph("bowtie")
    rows = [("k", "Paths", "Endomorphisms", "", "Automorphisms", "Classes")]
    derived_note = False
    for k in range(1, 6):
        n_paths = len(g.paths(k)) if k <= 5 else 0
        endo = count_endpoint_fixing(g, k)
        if k <= max_level:
            classes = count(g, SearchConfig(level=k, mode="outer-classes", jobs=jobs))
            if k <= 3:
                autos = f"{count(g, SearchConfig(level=k, mode='all-automorphisms', jobs=jobs)):,}"
            else:
                autos = f"{derived_automorphism_count(g, k, classes):,} [d]"
                derived_note = True
            cls = f"{classes:,}"
        else:
            autos, cls = "?", "?"
        rows.append((str(k), str(n_paths), factorial_form(g, k), approx(endo), autos, cls))
    widths = [max(len(r[i]) for r in rows) for i in range(6)]
    out = []
    for r in rows:
        out.append("  ".join([r[0].rjust(widths[0]), r[1].rjust(widths[1]), r[2].ljust(widths[2]),
                              r[3].rjust(widths[3]), r[4].rjust(widths[4]), r[5].rjust(widths[5])]).rstrip())
    out.append("")
    out.append("Endomorphisms: product of |E^k_{u->v}|! over all vertex pairs.")
    out.append("Automorphisms and Classes: exhaustive search (direct for k <= 3, classes only for k = 4).")
    if derived_note:
        out.append("[d] derived: Classes times the endomorphism count at level k-1.")
    out.append("?: not computed; exhaustive enumeration at this level is out of reach.")
    return out


O3_COLUMNS = ["Id", "(a,b)", "(a,c)", "(b,c)", "(a,b,c)", "(a,c,b)"]


def o3_rows(bound: int = 100):
    """Orbit representatives of the level-2 classes of O_3 and their six orders."""
    g = builtin_graph("o3")
    classes = list(enumerate_constrained(g, SearchConfig(level=2, mode="outer-classes")))
    q = quotient_by_graph_symmetries(classes, graph_symmetries(g))
    lefts = [code_of(parse_cycles(g, 1, c)) for c in O3_COLUMNS]
    rows = []
    for orbit in q.orbits:
        reps = sorted((format_cycles(og.representative()), og) for og in orbit)
        text, og = min(reps, key=lambda t: (len(t[0]), t[0]))
        base = code_of(og)
        orders = [algebra.order(compose_codes(left, base), bound) for left in lefts]
        rows.append((text, orders))
    rows.sort(key=lambda r: (len(r[0]), r[0]))
    return len(classes), rows


def o3_table(bound: int = 100) -> list[str]:
    n_classes, rows = o3_rows(bound)
    head = ["Permutation tau", "phi"] + [f"{c}.phi" for c in O3_COLUMNS[1:]]
    body = [[text] + [order_text(o) for o in orders] for text, orders in rows]
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    out = ["  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(r)).rstrip()
           for r in [head] + body]
    out.append("")
    out.append(f"{n_classes} outer classes at level 2, {len(rows)} orbits under the 6 edge permutations.")
    out.append("Cycles (x,y,...) send each path to the next one in the cycle.")
    out.append(f">{bound}: no power up to {bound} is the identity (periodic-orbit certificate).")
    return out


def cmd_table(args, g, name):
    if args.bowtie == args.o3:
        raise DataError("give exactly one of --bowtie and --o3")
    lines = bowtie_table(args.max_level, args.jobs) if args.bowtie else o3_table(args.bound)
    g2 = builtin_graph("bowtie" if args.bowtie else "o3")
    emit(args, header(args, g2, "bowtie" if args.bowtie else "o3"), {"lines": lines}, lines)
    return 0


# -- parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--dot", action="store_true", help="Graphviz output where supported")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default $PERMWEYL_JOBS or 1)")
    common.add_argument("--budget", type=float, default=None, help="time budget in seconds")
    common.add_argument("--confirm-long", action="store_true", help="allow long-running searches")

    p = argparse.ArgumentParser(prog="permweyl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, func, graph=True, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        if graph:
            sp.add_argument("graph", help="graph file (.graph or .json) or built-in name")
        sp.set_defaults(func=func)
        return sp

    def perm_args(sp):
        sp.add_argument("--level", type=int, required=True)
        sp.add_argument("--perm", required=True, help='cycle notation, e.g. "(de,cb)" or Id')
        sp.add_argument("--inverse", action="store_true", help="use the inverse of --perm")

    verb("validate", cmd_validate)
    sp = verb("paths", cmd_paths)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--list", action="store_true")
    sp = verb("count-perms", cmd_count_perms)
    sp.add_argument("--level", type=int, required=True)
    sp = verb("permgraph", cmd_permgraph)
    perm_args(sp)
    sp.add_argument("--ordered", action="store_true", help="show the ordered permutation graph")
    perm_args(verb("check", cmd_check))
    sp = verb("image", cmd_image)
    perm_args(sp)
    sp.add_argument("--edge")
    sp.add_argument("--path")
    sp = verb("enumerate", cmd_enumerate)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--outer", action="store_true", help="one ordered graph per outer class")
    sp.add_argument("--fix-prefixes", help="comma-separated edges whose paths stay fixed")
    sp.add_argument("--pattern", help='generator groups such as "abd|cef"')
    sp.add_argument("--pattern-targets", help="indices of groups whose images must stay inside")
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--quotient", action="store_true", help="quotient classes by graph symmetries")
    sp = verb("compose", cmd_compose)
    sp.add_argument("--outer", required=True)
    sp.add_argument("--outer-level", type=int, required=True)
    sp.add_argument("--inner", required=True)
    sp.add_argument("--inner-level", type=int, required=True)
    sp = verb("order", cmd_order)
    perm_args(sp)
    sp.add_argument("--bound", type=int, default=100)
    sp.add_argument("--left", help="level-1 permutation composed on the left, e.g. (a,b)")
    sp.add_argument("--state-budget", type=int, default=10**7)
    sp = verb("equiv", cmd_equiv)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--perm", required=True)
    sp.add_argument("--perm2", required=True)
    sp.add_argument("--level2", type=int)
    sp = verb("table", cmd_table, graph=False)
    sp.add_argument("--bowtie", action="store_true")
    sp.add_argument("--o3", action="store_true")
    sp.add_argument("--max-level", type=int, default=4)
    sp.add_argument("--bound", type=int, default=100)
    return p


def _check_flags(parser, args):
    for flag in ("level", "level2", "outer_level", "inner_level", "max_level", "bound", "state_budget"):
        v = getattr(args, flag, None)
        if v is not None and v < 1:
            parser.error(f"--{flag.replace('_', '-')} must be >= 1")
    if args.jobs is None:
        try:
            args.jobs = default_jobs()
        except ValueError as exc:
            parser.error(str(exc))
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.budget is not None and args.budget <= 0:
        parser.error("--budget must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_flags(parser, args)
    try:
        if args.verb == "table":
            return args.func(args, None, None)
        g, name = read_graph(args.graph)
        return args.func(args, g, name)
    except (DataError, GraphFormatError, CycleNotationError, NotSynchronizingError,
            algebra.NotAnAutomorphism, algebra.CompositionError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
