"""Iterated residues of periods, zeta-factor clearing, functional equations and
central shifts for (G, P) zetas.

Residues are taken termwise on the factored representation.  Atoms that are
singular along lambda_beta = 1 depend on lambda_beta alone; they are multiplied
into the prefactor and expanded in a Laurent series, while the remaining atoms
are differentiated through their logarithmic derivatives.  This keeps the
zeta atoms visible after every step, which the clearing step relies on.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .curve_zeta import CurveData, form_monomial, zeta_numerator_poly
from .exact_algebra import (
    LOGQ,
    Q,
    DenominatorVanishes,
    RatFunc,
    X,
    laurent_coefficients,
    pole_order,
    residue,
    substitute,
)
from .period import GEOM, ZETA, Atom, PeriodExpression, PeriodTerm, build_period, expand
from .root_system import LinearForm, RootDatum

X_CONV, LAMBDA_CONV = "x-residue", "lambda-residue"
ZVAR = X(1)


class NonIsolatedPole(ArithmeticError):
    pass


class ClearingFailed(ArithmeticError):
    pass


class NoFEFound(ArithmeticError):
    def __init__(self, message, poles=()):
        super().__init__(message)
        self.poles = list(poles)


@dataclass(frozen=True)
class ResiduePlan:
    parabolic_index: int
    residue_order: tuple[int, ...]
    convention: str = X_CONV
    lambda_p: tuple[Fraction, Fraction] = (Fraction(1), Fraction(0))

    def __post_init__(self):
        if self.convention not in (X_CONV, LAMBDA_CONV):
            raise ValueError(f"unknown residue convention {self.convention!r}")
        if Fraction(self.lambda_p[0]) == 0:
            raise ValueError("lambda_P normalization needs u != 0")

    @classmethod
    def default(cls, rank: int, parabolic_index: int, convention: str = X_CONV, lambda_p=(1, 0)):
        order = tuple(i for i in range(rank) if i != parabolic_index)
        return cls(parabolic_index, order, convention, (Fraction(lambda_p[0]), Fraction(lambda_p[1])))

    def validate(self, rank: int):
        if sorted(self.residue_order) != [i for i in range(rank) if i != self.parabolic_index]:
            raise ValueError(f"residue order {self.residue_order} is not a permutation of the "
                             f"simple roots other than {self.parabolic_index}")

    def to_json(self) -> dict:
        u, v = self.lambda_p
        return {"parabolic_index": self.parabolic_index, "residue_order": list(self.residue_order),
                "convention": self.convention, "lambda_P": [f"{Fraction(u)}", f"{Fraction(v)}"]}


def ladder() -> RatFunc:
    """d(lambda) / d(x) scaling at x = 1/q, as used by the lambda convention."""
    return -RatFunc.var(Q) / RatFunc.var(LOGQ)


# --- term canonicalization ----------------------------------------------


def _orient_zeta(arg: LinearForm) -> LinearForm:
    """zeta_hat(z) = zeta_hat(1 - z): pick the side whose first coefficient is positive."""
    lead = next((c for c in arg.coeffs if c), 0)
    if lead < 0:
        return LinearForm(tuple(-c for c in arg.coeffs), 1 - arg.constant)
    return arg


def canonical_term(term: PeriodTerm, curve: CurveData) -> PeriodTerm:
    """Fold constant atoms into the prefactor, orient and merge the rest."""
    pref = term.prefactor
    geo: Counter = Counter()
    zet: Counter = Counter()
    for a in term.atoms:
        if a.kind == GEOM:
            f = a.form + a.shift
            if f.is_constant():
                if f.constant == 0:
                    raise NonIsolatedPole(f"geometric atom {a} vanishes identically")
                pref = pref * a.value(curve)
                continue
            lead = next(c for c in f.coeffs if c)
            if lead < 0:
                # 1 - q^{-f} = -q^{-f} (1 - q^{f})
                pref = pref * (-form_monomial(f)) ** a.exponent
                f = -f
            geo[f] += a.exponent
        else:
            z = _orient_zeta(a.argument)
            if z.is_constant():
                if z.constant in (0, 1):
                    raise NonIsolatedPole(f"zeta atom {a} sits on a pole")
                pref = pref * a.value(curve)
                continue
            zet[z] += a.exponent
    atoms = [Atom(GEOM, f, 0, e) for f, e in geo.items() if e]
    atoms += [Atom(ZETA, z, 0, e) for z, e in zet.items() if e]
    atoms.sort(key=lambda a: (a.kind, a.form.coeffs, a.form.constant, a.exponent))
    return PeriodTerm(term.weyl, tuple(atoms), pref)


def _singular(a: Atom) -> bool:
    z = a.form + a.shift
    if not z.is_constant():
        return False
    return z.constant == 0 if a.kind == GEOM else z.constant in (0, 1)


def _atom_base(a: Atom, curve: CurveData) -> RatFunc:
    return replace(a, exponent=1).value(curve)


def residue_term(term: PeriodTerm, curve: CurveData, index: int) -> PeriodTerm | None:
    """Res_{x_index = 1/q} of one term, or None when the term is regular there."""
    var = X(index + 1)
    point = 1 / RatFunc.var(Q)
    restricted = [replace(a, form=a.form.restrict(index, 1)) for a in term.atoms]
    u = term.prefactor
    regular: list[tuple[Atom, Atom]] = []
    for orig, res in zip(term.atoms, restricted):
        if _singular(res):
            u = u * orig.value(curve)
        else:
            regular.append((orig, res))
    k = pole_order(u, var, point)
    if k == 0:
        return None
    coeffs = laurent_coefficients(u, var, point, -1)
    total = coeffs[-1]
    if k > 1:
        # derivatives of the regular atoms: N^(j) = N * B_j, B_{j+1} = B_j' + D B_j
        dlog = RatFunc.const(0)
        for orig, _ in regular:
            if orig.form.coeffs[index]:
                base = _atom_base(orig, curve)
                dlog = dlog + base.derivative(var) / base * orig.exponent
        b = RatFunc.const(1)
        for j in range(1, k):
            b = b.derivative(var) + dlog * b
            try:
                bj = substitute(b, var, point)
            except DenominatorVanishes as exc:
                raise NonIsolatedPole(f"regular atoms of {term.weyl} are singular on x{index + 1} = 1/q") from exc
            total = total + coeffs[-1 - j] * bj * Fraction(1, math.factorial(j))
    if total.is_zero():
        return None
    return canonical_term(PeriodTerm(term.weyl, tuple(r for _, r in regular), total), curve)


def residue_step(expr: PeriodExpression, index: int, convention: str = X_CONV) -> PeriodExpression:
    if index not in expr.live:
        raise ValueError(f"lambda_{index + 1} is not a live variable")
    scale = ladder() if convention == LAMBDA_CONV else None
    terms = []
    for t in expr.terms:
        r = residue_term(t, expr.curve, index)
        if r is None:
            continue
        if scale is not None:
            r = replace(r, prefactor=r.prefactor * scale)
        terms.append(r)
    live = tuple(i for i in expr.live if i != index)
    return PeriodExpression(expr.datum, expr.curve, tuple(terms), live)


# --- lambda_P -----------------------------------------------------------


def renormalize(expr: PeriodExpression, u=1, v=0) -> PeriodExpression:
    """Re-express a one-variable expression in lambda_P = u * lambda_{alpha_P} + v."""
    (p,) = expr.live
    u, v = Fraction(u), Fraction(v)
    if (u, v) == (1, 0):
        return expr
    inv = 1 / u
    if inv.denominator != 1:
        raise ValueError(f"lambda_P normalization needs 1/u integral, got u = {u}")
    var = X(p + 1)
    image = RatFunc.monomial(1, {var: int(inv)}) * RatFunc.q_power(v / u)
    terms = []
    for t in expr.terms:
        atoms = []
        for a in t.atoms:
            arg = a.form + a.shift
            a_new = arg.coeffs[p] * inv
            b_new = arg.constant - arg.coeffs[p] * v / u
            if a_new.denominator != 1 or Fraction(b_new).denominator != 1:
                raise ValueError(f"atom {a} is not integral in lambda_P for (u, v) = ({u}, {v})")
            coeffs = list(arg.coeffs)
            coeffs[p] = int(a_new)
            atoms.append(Atom(a.kind, LinearForm(tuple(coeffs), int(b_new)), 0, a.exponent))
        terms.append(canonical_term(PeriodTerm(t.weyl, tuple(atoms), substitute(t.prefactor, var, image)), expr.curve))
    return replace(expr, terms=tuple(terms))


def parabolic_residues(expr: PeriodExpression, plan: ResiduePlan) -> PeriodExpression:
    plan.validate(expr.datum.rank)
    for beta in plan.residue_order:
        expr = residue_step(expr, beta, plan.convention)
    return renormalize(expr, *plan.lambda_p)


def single_var(f: RatFunc, expr: PeriodExpression) -> RatFunc:
    """Rename the one live coordinate to x1."""
    (p,) = expr.live
    if p == 0:
        return f
    return substitute(f, X(p + 1), RatFunc.var(ZVAR))


# --- clearing -----------------------------------------------------------


Signature = tuple[int, int]


def _signature(a: Atom, p: int) -> Signature:
    z = _orient_zeta(a.form + a.shift)
    return (z.coeffs[p], z.constant)


def zeta_denominator_poly(curve: CurveData, sig: Signature, var: str = ZVAR):
    """P(q**-b x**a) as an integer polynomial, primitive with respect to ``var``."""
    a, b = sig
    m = RatFunc.monomial(1, {var: a}) * RatFunc.q_power(-b)
    p = zeta_numerator_poly(curve, m).num
    content = None
    for c in RatFunc(p).univariate_coeffs(var):
        if not c.is_zero():
            content = c.num if content is None else content.gcd(c.num)
    return p / content if content is not None else p


def _depends(poly, var: str) -> bool:
    return RatFunc(poly).depends_on(var)


def _coprime_in(den, poly, var: str) -> bool:
    """gcd(den, poly) free of ``var``, i.e. coprime in Q(others)[var]."""
    return not _depends(den.gcd(poly), var)


def _multiplicity(den, poly) -> int:
    k = 0
    while True:
        try:
            den = den / poly
        except Exception:
            return k
        k += 1


@dataclass(frozen=True)
class NormalizationCertificate:
    factors: tuple[Signature, ...]
    evidence: tuple[dict, ...]
    minimal: bool

    @property
    def count(self) -> int:
        return len(self.factors)

    def to_json(self) -> dict:
        return {"I": self.count, "factors": [[a, b] for a, b in self.factors],
                "minimal": self.minimal, "evidence": list(self.evidence)}


class _Clearing:
    """Bookkeeping for one one-variable expression."""

    def __init__(self, expr: PeriodExpression):
        if len(expr.live) != 1:
            raise ValueError("clearing needs a one-variable expression")
        self.expr = expr
        (self.p,) = expr.live
        self.var = X(self.p + 1)
        self.curve = expr.curve
        sigs = {_signature(a, self.p) for t in expr.terms for a in t.atoms
                if a.kind == ZETA and a.form.coeffs[self.p]}
        self.sigs = sorted(sigs)
        polys = {s: zeta_denominator_poly(self.curve, s, self.var) for s in self.sigs}
        # for genus 0 P = 1 and only the atomic bookkeeping is informative
        self.polys = {s: f for s, f in polys.items() if _depends(f, self.var)}

    def hidden(self, term: PeriodTerm) -> Counter:
        return Counter({s: m for s, f in self.polys.items() if (m := _multiplicity(term.prefactor.den, f))})

    def needs(self, term: PeriodTerm) -> Counter:
        need = Counter()
        for a in term.atoms:
            if a.kind == ZETA and a.exponent < 0:
                need[_signature(a, self.p)] += -a.exponent
        need.update(self.hidden(term))
        return need

    def multiply(self, term: PeriodTerm, factors: Counter) -> PeriodTerm:
        rank = self.expr.datum.rank
        atoms = list(term.atoms)
        for (a, b), m in factors.items():
            if m:
                coeffs = [0] * rank
                coeffs[self.p] = a
                atoms.append(Atom(ZETA, LinearForm(tuple(coeffs), b), 0, m))
        return canonical_term(PeriodTerm(term.weyl, tuple(atoms), term.prefactor), self.curve)

    def check(self, factors: Counter) -> tuple[bool, list[dict]]:
        ok, witnesses = True, []
        for t in self.expr.terms:
            c = self.multiply(t, factors)
            left = self.needs(c)
            if left:
                ok = False
                witnesses.append({"term": str(t.weyl), "uncleared": [[a, b, m] for (a, b), m in sorted(left.items())]})
        return ok, witnesses


def clear_denominators(expr: PeriodExpression) -> tuple[NormalizationCertificate, RatFunc]:
    """Minimal product of zeta_hat(a s + b) clearing all zeta denominators."""
    cl = _Clearing(expr)
    need: Counter = Counter()
    for t in expr.terms:
        for sig, m in cl.needs(t).items():
            need[sig] = max(need[sig], m)
    ok, bad = cl.check(need)
    if not ok:
        raise ClearingFailed(f"factors {dict(need)} leave zeta denominators: {bad}")
    cleared = [cl.multiply(t, need) for t in expr.terms]
    values = [t.value(cl.curve) for t in cleared]
    zeta_o = RatFunc.const(0)
    for v in values:
        zeta_o = zeta_o + v
    evidence = []
    for sig in cl.sigs:
        poly = cl.polys.get(sig)
        row = {"signature": list(sig), "atomic": True}
        if poly is not None:
            row["coprime_with_zeta_o"] = _coprime_in(zeta_o.den, poly, cl.var)
            row["coprime_all_terms"] = all(_coprime_in(v.den, poly, cl.var) for v in values)
            if not (row["coprime_with_zeta_o"] and row["coprime_all_terms"]):
                raise ClearingFailed(f"denominator still divisible by P at {sig}")
        evidence.append(row)
    minimal = True
    for sig in sorted(need):
        fewer = need.copy()
        fewer[sig] -= 1
        still, witness = cl.check(+fewer)
        minimal &= not still
        evidence.append({"drop": list(sig), "still_clears": still, "witness": witness[:1]})
    return NormalizationCertificate(tuple(sorted(need.elements())), tuple(evidence), minimal), single_var(zeta_o, expr)


# --- functional equation ------------------------------------------------


@dataclass(frozen=True)
class FECertificate:
    c: Fraction
    checked_identity: bool
    pole_multiset: tuple[tuple[str, int], ...]
    candidates_tried: int = 0

    def to_json(self) -> dict:
        return {"c": f"{self.c.numerator}/{self.c.denominator}", "fe_exact": self.checked_identity,
                "poles": [[loc, k] for loc, k in self.pole_multiset], "candidates_tried": self.candidates_tried}


def fe_image(f: RatFunc, c) -> RatFunc:
    """f(-s + c) in x = q**-s, i.e. x -> q**-c / x."""
    x = RatFunc.var(ZVAR)
    return substitute(f, ZVAR, RatFunc.q_power(-Fraction(c)) / x)


def _monomial_root(factor) -> tuple[Fraction, Fraction] | None:
    """For a factor alpha*q^i*x - beta*q^j return (beta/alpha, j - i): root (beta/alpha) q^(j-i)."""
    f = RatFunc(factor)
    coeffs = f.univariate_coeffs(ZVAR)
    if len(coeffs) != 2:
        return None
    out = []
    for c in coeffs:
        terms = list(c.num.terms())
        if len(terms) != 1:
            return None
        (mon, k), = terms
        if any(e for i, e in enumerate(mon) if i > 1) or not c.den.is_one():
            return None
        out.append((Fraction(int(k)), Fraction(int(mon[0])) + Fraction(int(mon[1]), 4)))
    (b0, j0), (a1, i1) = out
    return (-b0 / a1, j0 - i1)


def pole_multiset(f: RatFunc) -> list[tuple[tuple[Fraction, Fraction] | str, int]]:
    """Factored denominator in x1: monomial poles (c, e) meaning x = c q^e, else the factor text."""
    out = []
    if not f.depends_on(ZVAR):
        return out
    _, factors = f.den.factor()
    for fac, mult in factors:
        if not RatFunc(fac).depends_on(ZVAR):
            continue
        root = _monomial_root(fac)
        out.append((root if root is not None else str(fac), int(mult)))
    return out


def _pole_label(p) -> str:
    if isinstance(p, tuple):
        c, e = p
        return f"{c}*q^({e})"
    return p


def fe_candidates(f: RatFunc, max_abs: Fraction | None = None) -> list[Fraction]:
    poles = [p for p, _ in pole_multiset(f) if isinstance(p, tuple)]
    cands: set[Fraction] = set()
    for (c1, e1), (c2, e2) in itertools.combinations_with_replacement(poles, 2):
        if c1 * c2 == 1:
            cands.add(-(e1 + e2))
    deg = 0
    if f.depends_on(ZVAR):
        deg = max(len(f.univariate_coeffs(ZVAR, "num")), len(f.univariate_coeffs(ZVAR, "den"))) - 1
    bound = max_abs if max_abs is not None else Fraction(max(2 * deg, 2))
    k = int(2 * bound)
    cands.update(Fraction(j, 2) for j in range(-k, k + 1))
    return sorted(cands, key=lambda c: (abs(c), c))


def find_fe_constant(zeta_o: RatFunc) -> FECertificate:
    """Smallest |c| with zeta_o(-s + c) = zeta_o(s), verified exactly."""
    poles = pole_multiset(zeta_o)
    labels = tuple((_pole_label(p), k) for p, k in poles)
    tried = 0
    for c in fe_candidates(zeta_o):
        tried += 1
        if fe_image(zeta_o, c) == zeta_o:
            return FECertificate(c, True, labels, tried)
    raise NoFEFound(f"no functional equation among {tried} candidates", labels)


def central_shift(zeta_o: RatFunc, c) -> RatFunc:
    """s -> s + (c - 1)/2, i.e. x -> q**-((c-1)/2) x."""
    shift = (Fraction(c) - 1) / 2
    if shift == 0:
        return zeta_o
    return substitute(zeta_o, ZVAR, RatFunc.q_power(-shift) * RatFunc.var(ZVAR))


def centered_fe_holds(f: RatFunc) -> bool:
    return fe_image(f, 1) == f


# --- residues at rho and at s = 1 ----------------------------------------


def residue_at_rho(expr: PeriodExpression, convention: str = X_CONV, order: Sequence[int] | None = None) -> RatFunc:
    """Iterated residue of the full period at lambda = rho."""
    order = tuple(range(expr.datum.rank)) if order is None else tuple(order)
    for i in order:
        expr = residue_step(expr, i, convention)
    total = RatFunc.const(0)
    for t in expr.terms:
        total = total + t.value(expr.curve)
    return total


def residue_at_one(f: RatFunc, convention: str = X_CONV) -> RatFunc:
    """Res_{s=1} in x = q**-s at x = 1/q."""
    r = residue(f, ZVAR, 1 / RatFunc.var(Q))
    return r * ladder() if convention == LAMBDA_CONV and not r.is_zero() else r


# --- orchestration ------------------------------------------------------


@dataclass(frozen=True)
class GroupZeta:
    curve: CurveData
    datum: RootDatum
    plan: ResiduePlan
    omega: PeriodExpression
    omega_GP: RatFunc
    zeta_o: RatFunc
    cert_norm: NormalizationCertificate
    cert_fe: FECertificate
    zeta_centered: RatFunc
    centered_fe: bool

    def to_json(self) -> dict:
        return {
            "group": {**self.datum.to_json(), "parabolic_index": self.plan.parabolic_index},
            "curve": self.curve.to_json(),
            "convention": self.plan.to_json(),
            **self.cert_norm.to_json(),
            **self.cert_fe.to_json(),
            "centered_fe_exact": self.centered_fe,
            "zeta_o": self.zeta_o.to_json(),
            "zeta_centered": self.zeta_centered.to_json(),
        }


def group_zeta(datum: RootDatum, curve: CurveData, plan: ResiduePlan | None = None) -> GroupZeta:
    plan = plan or ResiduePlan.default(datum.rank, datum.rank - 1)
    omega = parabolic_residues(build_period(datum, curve), plan)
    omega_gp = single_var(expand(omega), omega)
    cert_norm, zeta_o = clear_denominators(omega)
    cert_fe = find_fe_constant(zeta_o)
    centered = central_shift(zeta_o, cert_fe.c)
    return GroupZeta(curve, datum, plan, omega, omega_gp, zeta_o, cert_norm, cert_fe, centered,
                     centered_fe_holds(centered))
