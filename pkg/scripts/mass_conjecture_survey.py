#!/usr/bin/env python3
"""Period residue versus (G, P)-zeta residue for SL2 and SL3 on every test curve,
over all residue orders, both variable conventions and both lambda_P choices."""
import argparse
from collections import Counter

from zetaforge import conjecture_lab as lab
from zetaforge.curve_zeta import TEST_CURVES
from zetaforge.root_system import build_root_datum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ranks", default="1,2")
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args()
    for rank in map(int, args.ranks.split(",")):
        datum = build_root_datum("A", rank)
        for curve in TEST_CURVES:
            reports = lab.check_mass_conjecture(datum, curve)
            centered = Counter(r.verdict for r in reports)
            shifted = Counter(r.verdict_unshifted for r in reports)
            print(f"{datum.name} {curve.name:16} plans={len(reports)} centered={dict(centered)} "
                  f"unshifted={dict(shifted)} stable={lab.convention_stable(reports)}")
            if args.verbose:
                for r in reports:
                    print(f"    P{r.parabolic + 1} {r.convention} lhs={r.lhs} ratio0={r.ratio_unshifted}")


if __name__ == "__main__":
    main()
