#!/usr/bin/env python3
"""Mass tables (total, semistable, alpha) per test curve, cross-checked against
a brute-force census of bundle classes where one is available."""
import argparse

from zetaforge import bundle_zeta as bz
from zetaforge.curve_zeta import TEST_CURVES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-rank", type=int, default=3)
    ap.add_argument("--degrees", default="0,1")
    ap.add_argument("--truncation", type=int, default=10)
    args = ap.parse_args()
    degrees = [int(s) for s in args.degrees.split(",")]
    for curve in TEST_CURVES:
        print(f"== {curve.name} (g={curve.genus}, q={curve.q}, h={curve.h})")
        for r in range(1, args.max_rank + 1):
            for d in degrees:
                tot, ss = bz.total_mass(curve, r, d), bz.ss_mass(curve, r, d)
                line = f"  r={r} d={d}  total={tot}  ss={ss}  alpha={bz.alpha(curve, r, d)}"
                try:
                    census = bz.census_masses(curve, r, d, args.truncation)
                except (bz.UnsupportedCensus, NotImplementedError) as exc:
                    print(line + f"  census: {exc}")
                    continue
                ss_ok = census.beta_ss == ss
                if census.tail_bound is None:
                    tail = "no tail bound"
                else:
                    tail = f"brackets={census.brackets(tot)} tail<={float(census.tail_bound):.2e}"
                print(line + f"  census: {census.classes} classes, ss match={ss_ok}, {tail}")


if __name__ == "__main__":
    main()
