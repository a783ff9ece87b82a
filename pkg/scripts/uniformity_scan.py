#!/usr/bin/env python3
"""Full (a, b) grid scan for the uniformity question at ranks 2 and 3, with and
without companion curves, printing each grid row's classification."""
import argparse
from fractions import Fraction

from zetaforge import conjecture_lab as lab
from zetaforge.curve_zeta import TEST_CURVES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ranks", default="2,3")
    ap.add_argument("--a-grid", default="1/2,1,3/2,2,5/2,3")
    ap.add_argument("--show", choices=("hits", "all"), default="hits")
    args = ap.parse_args()
    a_grid = [Fraction(s) for s in args.a_grid.split(",")]
    base, *companions = [c for c in TEST_CURVES if c.genus == 1] + [c for c in TEST_CURVES if c.genus == 0]
    for r in map(int, args.ranks.split(",")):
        for label, comps in (("single curve", ()), ("with companions", companions)):
            rows, _ = lab.scan_uniformity(base, r, a_grid, companions=comps)
            counts = {}
            for row in rows:
                counts[row.status] = counts.get(row.status, 0) + 1
            print(f"r={r} {base.name} {label}: {len(rows)} rows, {counts}")
            for row in rows:
                if args.show == "all" or row.status in (lab.UNIFORM, lab.PROPORTIONAL_ACROSS):
                    print(f"    a={row.a} b={row.b} {row.status} {dict(row.constants)}")


if __name__ == "__main__":
    main()
