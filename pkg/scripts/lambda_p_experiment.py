#!/usr/bin/env python3
"""Does I(G/P) depend on the normalization of lambda_P?

Each (G, P, curve) is computed under several affine normalizations
lambda_P = u * lambda_alpha + v and the clearing count and FE constant are
compared.  Normalizations that make some atom non-integral are reported as
inadmissible rather than skipped silently.
"""
import argparse
from fractions import Fraction

from zetaforge.curve_zeta import TEST_CURVES
from zetaforge.group_zeta import ResiduePlan, group_zeta
from zetaforge.root_system import build_root_datum

NORMALIZATIONS = [(1, 0), (Fraction(1, 2), 0), (1, 1), (1, -1), (Fraction(1, 2), Fraction(1, 2))]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--groups", default="A1,A2,B2,G2")
    args = ap.parse_args()
    for g in args.groups.split(","):
        d = build_root_datum(g[0], int(g[1:]))
        for p in range(d.rank):
            for curve in TEST_CURVES:
                counts = {}
                cells = []
                for u, v in NORMALIZATIONS:
                    try:
                        gz = group_zeta(d, curve, ResiduePlan.default(d.rank, p, lambda_p=(u, v)))
                    except ValueError:
                        cells.append(f"({u},{v}): n/a")
                        continue
                    counts[(u, v)] = gz.cert_norm.count
                    cells.append(f"({u},{v}): I={gz.cert_norm.count} c={gz.cert_fe.c}")
                verdict = "I constant" if len(set(counts.values())) <= 1 else "I VARIES"
                print(f"{d.name}/P{p + 1} {curve.name:16} {verdict:10} " + "; ".join(cells))


if __name__ == "__main__":
    main()
