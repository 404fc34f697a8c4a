"""Constrained bowtie search at level 5, then inverses and orders of the results.

Constraint: every path starting with c, e or f is fixed, and lambda sends the
generators a, b, d into the subalgebra generated by the groups {a,b,d}, {c,e,f}.

    python scripts/level5.py [--bound 120]
"""
import argparse
import time

from permweyl import algebra as A
from permweyl.graph import bowtie
from permweyl.permgraph import build_permutation_graph, recover_permutation
from permweyl.permutations import format_cycles
from permweyl.search import AllOf, FixedPointConstraint, PatternConstraint, SearchConfig, enumerate_constrained


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound", type=int, default=120)
    args = ap.parse_args()
    g = bowtie()
    groups = [["a", "b", "d"], ["c", "e", "f"]]
    both = AllOf(FixedPointConstraint(frozenset("cef")), PatternConstraint(g, groups, targets=[0]))
    t0 = time.perf_counter()
    found = [recover_permutation(pg) for pg in
             enumerate_constrained(g, SearchConfig(level=5, mode="all-automorphisms", constraint=both))]
    print(f"{len(found)} automorphisms ({sum(not t.is_identity for t in found)} non-identity) "
          f"in {time.perf_counter() - t0:.1f}s\n")
    for t in found:
        pg = build_permutation_graph(t)
        rep = A.image_in_subalgebra(pg, groups, targets=[0])
        t1 = time.perf_counter()
        inv = A.find_inverse(pg)
        res = A.order(pg, bound=args.bound)
        print(f"{format_cycles(t)}\n    lambda(T1) inside {rep.inside}, inverse at level {inv.level}, "
              f"order {res} ({time.perf_counter() - t1:.1f}s)")


if __name__ == "__main__":
    main()
