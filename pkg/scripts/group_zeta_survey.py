#!/usr/bin/env python3
"""Survey of (G, P) zetas: clearing factors, FE constant and centered FE for every
supported group, maximal parabolic and test curve."""
import argparse
import json
import time

from zetaforge.curve_zeta import TEST_CURVES
from zetaforge.group_zeta import LAMBDA_CONV, X_CONV, NoFEFound, ResiduePlan, group_zeta
from zetaforge.root_system import build_root_datum

GROUPS = [("A", 1), ("A", 2), ("A", 3), ("B", 2), ("C", 2), ("G", 2)]


def survey(convention, lambda_p):
    rows = []
    for t, r in GROUPS:
        d = build_root_datum(t, r)
        for p in range(r):
            for curve in TEST_CURVES:
                t0 = time.perf_counter()
                plan = ResiduePlan.default(r, p, convention, lambda_p)
                try:
                    gz = group_zeta(d, curve, plan)
                except NoFEFound as exc:
                    rows.append({"group": d.name, "P": p + 1, "curve": curve.name, "finding": str(exc)})
                    continue
                rows.append({"group": d.name, "P": p + 1, "curve": curve.name, "I": gz.cert_norm.count,
                             "factors": [list(f) for f in gz.cert_norm.factors], "c": str(gz.cert_fe.c),
                             "centered_fe": gz.centered_fe, "seconds": round(time.perf_counter() - t0, 3)})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--convention", choices=("x", "lambda"), default="x")
    ap.add_argument("--lambda-p", default="1,0")
    ap.add_argument("--json", help="write rows to this file")
    args = ap.parse_args()
    u, v = (int(s) if s.lstrip("-").isdigit() else s for s in args.lambda_p.split(","))
    from fractions import Fraction
    rows = survey(LAMBDA_CONV if args.convention == "lambda" else X_CONV, (Fraction(u), Fraction(v)))
    print(f"{'group':6} {'P':>2} {'curve':16} {'I':>2} {'c':>5}  factors")
    for row in rows:
        if "finding" in row:
            print(f"{row['group']:6} {row['P']:>2} {row['curve']:16} {row['finding']}")
            continue
        print(f"{row['group']:6} {row['P']:>2} {row['curve']:16} {row['I']:>2} {row['c']:>5}  {row['factors']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
