"""Command-line front end: ``zetaforge <command> [options]``.

Exit status 0 means the computation finished (negative findings included),
2 means the job was misconfigured, 3 means an internal invariant tripped.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import bundle_zeta as bz
from . import conjecture_lab as lab
from . import group_zeta as gzm
from .curve_zeta import TEST_CURVES, CurveData, InvalidCounts, load_curve
from .exact_algebra import rational_to_str
from .period import build_period, expand, zeta_pair_counts
from .root_system import UnsupportedType, parse_group

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3

COMMANDS = ("period", "group-zeta", "bundle-zeta", "masses", "verify-fe", "verify-rh",
            "conjecture-mass", "conjecture-uniformity", "all")


class ConfigError(ValueError):
    pass


class ContractViolation(AssertionError):
    pass


# --- inputs -------------------------------------------------------------

_BUILTIN = {c.name.lower(): c for c in TEST_CURVES}


def resolve_curve(spec: str) -> CurveData:
    """A JSON file path, or the stem of a shipped test curve (``p1_q2``, ``elliptic_q2_N3``)."""
    path = Path(spec)
    if path.exists():
        try:
            return load_curve(path)
        except (InvalidCounts, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad curve file {spec}: {exc}") from exc
    stem = path.name.removesuffix(".json").lower()
    if stem in _BUILTIN:
        return _BUILTIN[stem]
    raise ConfigError(f"curve {spec!r} is neither a file nor one of {sorted(_BUILTIN)}")


def resolve_group(spec: str | None, parabolic: int | None = None):
    if spec is None:
        raise ConfigError("--group is required for this command")
    try:
        obj = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--group is not JSON: {exc}") from exc
    if parabolic is not None:
        obj = {**obj, "parabolic_index": parabolic}
    try:
        return parse_group(obj)
    except UnsupportedType as exc:
        raise ConfigError(str(exc)) from exc


def _fraction_pair(text: str) -> tuple[Fraction, Fraction]:
    try:
        u, v = (Fraction(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--lambda-p expects 'u,v', got {text!r}") from exc
    return u, v


def build_plan(args, rank: int, parabolic: int) -> gzm.ResiduePlan:
    conv = gzm.LAMBDA_CONV if args.convention == "lambda" else gzm.X_CONV
    lp = _fraction_pair(args.lambda_p)
    try:
        if args.order:
            order = tuple(int(i) - 1 for i in args.order.split(","))
            plan = gzm.ResiduePlan(parabolic, order, conv, lp)
            plan.validate(rank)
        else:
            plan = gzm.ResiduePlan.default(rank, parabolic, conv, lp)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return plan


def threads() -> int:
    raw = os.environ.get("ZETAFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"ZETAFORGE_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("ZETAFORGE_THREADS must be >= 1")
    return n


# --- jobs ---------------------------------------------------------------


def job_period(args) -> tuple[dict, str]:
    datum, _ = resolve_group(args.group)
    curve = resolve_curve(args.curve)
    expr = build_period(datum, curve)
    pairs = zeta_pair_counts(expr)
    lengths = [t.weyl.length for t in expr.terms]
    if pairs != lengths:
        raise ContractViolation("zeta-pair counts differ from Weyl lengths")
    result = {"group": datum.to_json(), "curve": curve.to_json(), "terms": len(expr.terms),
              "zeta_pairs": pairs, "words": [str(t.weyl) for t in expr.terms]}
    lines = [f"{datum.name} over {curve.label()}: {len(expr.terms)} terms", expr.dump()]
    if args.expand:
        f = expand(expr)
        result["expanded"] = f.to_json()
        lines.append(f"expanded: {f}")
    return result, "\n".join(lines)


def _group_zeta(args, datum, parabolic, curve):
    plan = build_plan(args, datum.rank, parabolic)
    try:
        return gzm.group_zeta(datum, curve, plan)
    except gzm.NoFEFound as exc:
        return exc


def job_group_zeta(args) -> tuple[dict, str]:
    datum, p = resolve_group(args.group, args.parabolic)
    curve = resolve_curve(args.curve)
    gz = _group_zeta(args, datum, p, curve)
    if isinstance(gz, gzm.NoFEFound):
        return ({"group": datum.to_json(), "parabolic": p, "curve": curve.to_json(), "fe_exact": False,
                 "finding": str(gz), "poles": gz.poles},
                f"{datum.name}/P{p + 1} over {curve.label()}: no functional equation found")
    if not gz.centered_fe:
        raise ContractViolation("central shift broke the functional equation")
    text = (f"{datum.name}/P{p + 1} over {curve.label()} [{gz.plan.convention}]\n"
            f"  I = {gz.cert_norm.count}, factors {list(gz.cert_norm.factors)}, minimal {gz.cert_norm.minimal}\n"
            f"  c = {gz.cert_fe.c}, FE exact {gz.cert_fe.checked_identity}, centered FE exact {gz.centered_fe}\n"
            f"  zeta_o = {gz.zeta_o}")
    return gz.to_json(), text


def _bundle(curve, r) -> bz.BundleZeta:
    try:
        z = bz.assemble_zeta(curve, r)
    except (bz.MissingTable, bz.UnsupportedRank, bz.UnsupportedCensus) as exc:
        raise ConfigError(str(exc)) from exc
    if not bz.series_consistent(z):
        raise ContractViolation("closed form disagrees with the direct series")
    return bz.with_rh(z)


def job_bundle_zeta(args) -> tuple[dict, str]:
    curve = resolve_curve(args.curve)
    z = _bundle(curve, args.rank)
    fe = bz.check_bundle_fe(z)
    out = z.to_json()
    out["fe_exact"] = fe
    text = (f"rank {args.rank} zeta of {curve.label()}\n  closed form: {z.closed_form}\n"
            f"  FE {'pass' if fe else 'fail'}; RH {z.rh_report.summary()}")
    return out, text


def job_masses(args) -> tuple[dict, str]:
    curve = resolve_curve(args.curve)
    degrees = range(0, args.max_rank)
    try:
        table = bz.build_tables(curve, args.max_rank, degrees)
    except (bz.UnsupportedRank, bz.UnsupportedCensus) as exc:
        raise ConfigError(str(exc)) from exc
    out = table.to_json()
    lines = [f"masses for {curve.label()}", "r  d  beta_all  beta_ss  alpha  census_ss"]
    if curve.genus <= 1:
        for row in out["entries"]:
            r, d = row["r"], row["d"]
            census = bz.census_masses(curve, r, d, args.truncation)
            row["census_beta_ss"] = rational_to_str(census.beta_ss)
            if census.beta_ss != table.entries[(r, d)]["beta_ss"]:
                raise ContractViolation(f"census and recursion disagree at (r, d) = ({r}, {d})")
    for row in out["entries"]:
        lines.append(f"{row['r']}  {row['d']}  {row['beta_all']}  {row['beta_ss']}  "
                     f"{row.get('alpha', '-')}  {row.get('census_beta_ss', '-')}")
    return out, "\n".join(lines)


def job_verify_fe(args) -> tuple[dict, str]:
    curve = resolve_curve(args.curve)
    if args.group:
        result, text = job_group_zeta(args)
        return {"kind": "group", **result}, text
    if args.rank is None:
        raise ConfigError("verify-fe needs --rank or --group")
    z = _bundle(curve, args.rank)
    ok = bz.check_bundle_fe(z)
    return ({"kind": "bundle", "curve": curve.to_json(), "rank": args.rank, "fe_exact": ok},
            f"FE for rank {args.rank} over {curve.label()}: {'pass' if ok else 'fail'} (exact)")


def job_verify_rh(args) -> tuple[dict, str]:
    curve = resolve_curve(args.curve)
    if args.rank is None:
        raise ConfigError("verify-rh needs --rank")
    z = _bundle(curve, args.rank)
    rep = z.rh_report
    return ({"curve": curve.to_json(), "rank": args.rank, "rh": rep.to_json()},
            f"RH for rank {args.rank} over {curve.label()}: {rep.summary()}")


def job_conjecture_mass(args) -> tuple[dict, str]:
    datum, _ = resolve_group(args.group)
    curve = resolve_curve(args.curve)
    reports = lab.check_mass_conjecture(datum, curve)
    stable = lab.convention_stable(reports)
    lines = [f"mass comparison for {datum.name} over {curve.label()} (convention stable: {stable})"]
    for r in reports:
        c = r.convention
        lines.append(f"  P{r.parabolic + 1} order {c['residue_order']} {c['convention']} "
                     f"lambda_P {c['lambda_P']}: {r.verdict} ({r.ratio_kind})")
    return ({"group": datum.to_json(), "curve": curve.to_json(), "convention_stable": stable,
             "reports": [r.to_json() for r in reports]}, "\n".join(lines))


def job_conjecture_uniformity(args) -> tuple[dict, str]:
    curve = resolve_curve(args.curve)
    if args.rank is None:
        raise ConfigError("conjecture-uniformity needs --rank")
    companions = [resolve_curve(c) for c in args.companion]
    b_grid = lab.default_b_grid(args.b_max, args.b_den)
    try:
        a_grid = tuple(Fraction(a) for a in args.a_grid.split(","))
    except ValueError as exc:
        raise ConfigError(f"--a-grid expects comma-separated rationals, got {args.a_grid!r}") from exc
    try:
        cert = lab.check_uniformity(curve, args.rank, a_grid, b_grid, companions=companions,
                                    accept_proportional=args.accept_proportional)
    except lab.SearchExhausted as exc:
        return ({"curve": curve.to_json(), "r": args.rank, "outcome": "search_exhausted",
                 "companions": [c.label() for c in companions], "grid": exc.grid},
                f"uniformity, rank {args.rank} over {curve.label()}: search exhausted "
                f"({len(exc.grid)} grid rows)")
    if not cert.verified or max(cert.numeric_checks) > 1e-9:
        raise ContractViolation("uniformity certificate failed its re-verification")
    return ({"outcome": "certificate", **cert.to_json()},
            f"uniformity, rank {args.rank} over {curve.label()}: a = {cert.a}, b = {cert.b}, "
            f"curve independent: {cert.curve_independent}")


JOBS = {
    "period": job_period,
    "group-zeta": job_group_zeta,
    "bundle-zeta": job_bundle_zeta,
    "masses": job_masses,
    "verify-fe": job_verify_fe,
    "verify-rh": job_verify_rh,
    "conjecture-mass": job_conjecture_mass,
    "conjecture-uniformity": job_conjecture_uniformity,
}


def suite_jobs() -> list[tuple[str, list[str]]]:
    """The standard batch run by ``all``: (file stem, argv)."""
    jobs = []
    curves = ["p1_q2", "elliptic_q2_N3", "elliptic_q2_N5"]
    groups = [("A", 1), ("A", 2), ("B", 2), ("C", 2), ("G", 2), ("A", 3)]
    for c in curves:
        for t, r in groups:
            for p in range(r):
                g = json.dumps({"type": t, "rank": r})
                jobs.append((f"group_{t}{r}_P{p + 1}_{c}", ["group-zeta", "--curve", c, "--group", g,
                                                            "--parabolic", str(p + 1)]))
        ranks = (1, 2, 3) if c == "p1_q2" else (1, 2)
        for r in ranks:
            jobs.append((f"bundle_r{r}_{c}", ["bundle-zeta", "--curve", c, "--rank", str(r)]))
        jobs.append((f"masses_{c}", ["masses", "--curve", c, "--max-rank", "3"]))
        for r in (1, 2):
            g = json.dumps({"type": "A", "rank": r})
            jobs.append((f"mass_SL{r + 1}_{c}", ["conjecture-mass", "--curve", c, "--group", g]))
    companions = ["--companion", "p1_q2", "--companion", "elliptic_q2_N5"]
    jobs.append(("uniformity_r2_elliptic_q2_N3",
                 ["conjecture-uniformity", "--curve", "elliptic_q2_N3", "--rank", "2"] + companions))
    jobs.append(("uniformity_r2_elliptic_q2_N3_proportional",
                 ["conjecture-uniformity", "--curve", "elliptic_q2_N3", "--rank", "2", "--accept-proportional"]
                 + companions))
    jobs.append(("uniformity_r3_elliptic_q2_N3_proportional",
                 ["conjecture-uniformity", "--curve", "elliptic_q2_N3", "--rank", "3", "--accept-proportional",
                  "--a-grid", "1/2,1,3/2,2,5/2,3"] + companions))
    return jobs


def job_all(args) -> tuple[dict, str]:
    if not args.output:
        raise ConfigError("all needs --output DIR")
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = suite_jobs()
    parser = build_parser()

    def run_one(item):
        stem, argv = item
        sub = _normalize_args(parser.parse_args(argv + ["--output", str(outdir / f"{stem}.json")]))
        return stem, execute(sub, quiet=True)

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(run_one, jobs))
    summary = {stem: code for stem, code in results}
    text = "\n".join(f"{code}  {stem}" for stem, code in results)
    return {"jobs": summary}, text


JOBS["all"] = job_all


# --- output -------------------------------------------------------------


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def execute(args, quiet: bool = False) -> int:
    try:
        threads()
        result, text = JOBS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractViolation, AssertionError, gzm.ClearingFailed, gzm.NonIsolatedPole) as exc:
        print(f"contract violation: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    if args.output and args.command != "all":
        out = Path(args.output)
        write_atomic(out, canonical_json(result))
        write_atomic(out.with_suffix(".txt"), text + "\n")
    elif args.command == "all":
        write_atomic(Path(args.output) / "summary.json", canonical_json(result))
        if not quiet:
            print(text)
        return max(result["jobs"].values(), default=EXIT_OK)
    if not quiet:
        print(text)
        if args.json:
            print(canonical_json(result), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zetaforge", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--curve", default="p1_q2", help="curve JSON file or shipped curve name")
    parser.add_argument("--group", help='root datum as JSON, e.g. \'{"type": "A", "rank": 2}\'')
    parser.add_argument("--parabolic", type=int, help="1-based index of the simple root alpha_P")
    parser.add_argument("--rank", type=int, help="bundle rank r")
    parser.add_argument("--output", help="certificate JSON path (a directory for 'all')")
    parser.add_argument("--json", action="store_true", help="also print the certificate JSON")
    parser.add_argument("--convention", choices=("x", "lambda"), default="x")
    parser.add_argument("--order", help="residue order as 1-based indices, e.g. 3,2")
    parser.add_argument("--lambda-p", default="1,0", help="lambda_P = u*lambda_alpha + v, given as u,v")
    parser.add_argument("--expand", action="store_true", help="period: also expand to one rational function")
    parser.add_argument("--max-rank", type=int, default=2)
    parser.add_argument("--truncation", type=int, default=10, help="census degree bound")
    parser.add_argument("--companion", action="append", default=[], help="uniformity: another curve with the same q")
    parser.add_argument("--accept-proportional", action="store_true",
                        help="uniformity: accept R agreeing across curves up to a constant")
    parser.add_argument("--a-grid", default="1/2,1,3/2,2", help="uniformity: candidate a values")
    parser.add_argument("--b-max", type=int, default=3)
    parser.add_argument("--b-den", type=int, default=2)
    return parser


def _normalize_args(args):
    if args.parabolic is not None:
        args.parabolic -= 1
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return execute(_normalize_args(args))


if __name__ == "__main__":
    sys.exit(main())
