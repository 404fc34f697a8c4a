"""Bowtie counts per level: paths, endomorphisms, automorphisms, outer classes.

    python scripts/reproduce_table1.py [--max-level 4] [--jobs N]
"""
import argparse
import time

from permweyl.cli import bowtie_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-level", type=int, default=4)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    t0 = time.perf_counter()
    for line in bowtie_table(args.max_level, args.jobs):
        print(line)
    print(f"\n({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
