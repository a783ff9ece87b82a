"""Rank-r non-abelian zetas of curves over F_q.

Masses come from two independent routes: a classification census (split
bundles on P^1, Atiyah's classification on an elliptic curve) and closed forms
(Siegel-type total mass plus the Harder-Narasimhan recursion summed exactly
over its degree cones).  The zeta itself is assembled from alpha and beta.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm, prod
from typing import Iterator

import sympy

from .curve_zeta import CurveData, point_counts_from_numerator
from .exact_algebra import T, CircleVerdict, RatFunc, _as_fraction_coeffs, circle_test, rational_to_str, substitute

MAX_RANK = 3


class UnsupportedCensus(ValueError):
    pass


class UnsupportedRank(ValueError):
    pass


class UnsupportedAlpha(ValueError):
    pass


class MissingTable(KeyError):
    pass


def gl_order(n: int, q: int) -> int:
    return prod(q**n - q**i for i in range(n))


# --- census -------------------------------------------------------------


@dataclass(frozen=True)
class BundleClass:
    genus: int
    description: tuple
    rank: int
    degree: int
    h0: int
    aut_order: int
    semistable: bool

    @property
    def mass(self) -> Fraction:
        return Fraction(1, self.aut_order)

    def alpha_weight(self, q: int) -> Fraction:
        return Fraction(q**self.h0 - 1, self.aut_order)

    def to_json(self) -> dict:
        return {"genus": self.genus, "description": repr(self.description), "rank": self.rank,
                "degree": self.degree, "h0": self.h0, "aut_order": self.aut_order,
                "semistable": self.semistable}


def _partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def torsion_aut_order(part: tuple[int, ...], size: int) -> int:
    """|Aut| of the module sum O/pi^{part_i} over a DVR with residue field of ``size``."""
    conj = [sum(1 for p in part if p > i) for i in range(max(part, default=0))]
    mult = [part.count(k) for k in set(part)]
    out = Fraction(size) ** sum(c * c for c in conj)
    for m in mult:
        for j in range(1, m + 1):
            out *= 1 - Fraction(1, size**j)
    assert out.denominator == 1
    return int(out)


def closed_point_counts(curve: CurveData, n: int) -> list[int]:
    """Number of closed points of each degree 1..n."""
    counts = point_counts_from_numerator(curve.q, curve.numerator_coeffs, n)
    out = []
    for k in range(1, n + 1):
        total = sum(_mobius(k // j) * counts[j - 1] for j in range(1, k + 1) if k % j == 0)
        out.append(total // k)
    return out


def _mobius(n: int) -> int:
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


def _torsion_classes(curve: CurveData, length: int) -> list[tuple[tuple, int, int]]:
    """Torsion sheaves of the given length: (description, |Aut|, parts at the origin).

    Each entry is a set of distinct closed points, each with a partition; the
    origin is point (1, 0).
    """
    npts = closed_point_counts(curve, max(length, 1))
    blocks = []
    for deg in range(1, length + 1):
        for idx in range(npts[deg - 1]):
            blocks.append((deg, idx))
    out = []

    def rec(start: int, remaining: int, chosen: list):
        if remaining == 0:
            aut = prod(torsion_aut_order(part, curve.q**deg) for (deg, _), part in chosen)
            origin = sum(len(part) for (deg, idx), part in chosen if (deg, idx) == (1, 0))
            desc = tuple((deg, idx, part) for (deg, idx), part in chosen)
            out.append((desc, aut, origin))
            return
        for b in range(start, len(blocks)):
            deg, _ = blocks[b]
            for m in range(1, remaining // deg + 1):
                for part in _partitions(m):
                    rec(b + 1, remaining - deg * m, chosen + [(blocks[b], part)])

    rec(0, length, [])
    return out


def semistable_classes(curve: CurveData, r: int, d: int) -> list[BundleClass]:
    """All semistable classes of rank r and degree d (genus 0 or 1)."""
    g, q = curve.genus, curve.q
    if g == 0:
        if d % r:
            return []
        m = d // r
        return [BundleClass(0, ((m, r),), r, d, r * max(0, m + 1), gl_order(r, q), True)]
    if g == 1:
        # Atiyah: semistable (r, d) <-> torsion sheaves of length gcd(r, d)
        out = []
        for desc, aut, origin in _torsion_classes(curve, gcd(r, d)):
            h0 = d if d > 0 else (origin if d == 0 else 0)
            out.append(BundleClass(1, desc, r, d, h0, aut, True))
        return out
    raise UnsupportedCensus(f"no census for genus {g}")


def _slope_key(rd):
    r, d = rd
    return Fraction(d, r)


def _hn_types(r: int, d: int, bound: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """HN types with at least two pieces, every |d_i| <= bound."""
    for k in range(2, r + 1):
        for ranks in _compositions(r, k):
            for degs in itertools.product(range(-bound, bound + 1), repeat=k - 1):
                last = d - sum(degs)
                if abs(last) > bound:
                    continue
                pieces = tuple(zip(ranks, degs + (last,)))
                slopes = [_slope_key(p) for p in pieces]
                if all(a > b for a, b in zip(slopes, slopes[1:])):
                    yield pieces


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 1:
        yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _hom_dim(curve: CurveData, a: BundleClass, b: BundleClass) -> int:
    """dim Hom(a, b) for semistable classes with slope(b) > slope(a)."""
    g = curve.genus
    if g == 0:
        (ma, na), = a.description
        (mb, nb), = b.description
        return na * nb * max(0, mb - ma + 1)
    # g = 1, slope(b) > slope(a): Hom = H^0 of a positive-slope semistable bundle = its degree
    return a.rank * b.degree - b.rank * a.degree


def brute_force_census(curve: CurveData, r: int, d: int, degree_bound: int = 10) -> list[BundleClass]:
    """Every isomorphism class of rank r, degree d with HN pieces of |degree| <= degree_bound."""
    if curve.genus > 1 or not 1 <= r <= MAX_RANK:
        raise UnsupportedCensus(f"census covers genus <= 1 and rank <= {MAX_RANK}")
    out = list(semistable_classes(curve, r, d))
    for pieces in _hn_types(r, d, degree_bound):
        # above genus 0 HN filtrations split (Ext^1 from lower to higher slope vanishes)
        per_piece = [semistable_classes(curve, ri, di) for ri, di in pieces]
        for combo in itertools.product(*per_piece):
            aut = prod(c.aut_order for c in combo)
            for i, j in itertools.combinations(range(len(combo)), 2):
                aut *= curve.q ** _hom_dim(curve, combo[j], combo[i])
            h0 = sum(c.h0 for c in combo)
            desc = tuple(c.description for c in combo)
            out.append(BundleClass(curve.genus, desc, r, d, h0, aut, False))
    return out


@dataclass(frozen=True)
class CensusSum:
    beta_ss: Fraction
    beta_all_truncated: Fraction
    tail_bound: Fraction | None
    classes: int

    def brackets(self, value: Fraction) -> bool:
        if self.tail_bound is None:
            return False
        return self.beta_all_truncated <= value <= self.beta_all_truncated + self.tail_bound


def census_masses(curve: CurveData, r: int, d: int, degree_bound: int = 10) -> CensusSum:
    classes = brute_force_census(curve, r, d, degree_bound)
    ss = sum((c.mass for c in classes if c.semistable), Fraction(0))
    total = sum((c.mass for c in classes), Fraction(0))
    return CensusSum(ss, total, _tail_bound(curve, r, d, degree_bound), len(classes))


def _tail_bound(curve: CurveData, r: int, d: int, bound: int) -> Fraction | None:
    """Mass of the omitted rank-2 HN strata (a geometric series); None above rank 2."""
    if r == 1:
        return Fraction(0)
    if r != 2:
        return None
    q, g = curve.q, curve.genus
    line = Fraction(curve.h, q - 1)
    # pieces (1, k), (1, d - k), k > d - k; omitted once k > bound or d - k < -bound
    k0 = min(bound + 1, d + bound + 1)
    k0 = max(k0, d // 2 + 1)
    first = line**2 * Fraction(q) ** (d - 2 * k0 + (g - 1))
    return first / (1 - Fraction(1, q**2))


# --- closed forms -------------------------------------------------------


def total_mass(curve: CurveData, r: int, d: int = 0) -> Fraction:
    """h q^{(r^2-1)(g-1)} / (q-1) * prod_{i=2}^r zeta_X(i)."""
    if r < 1:
        raise ValueError("rank must be positive")
    q, g = curve.q, curve.genus
    out = Fraction(curve.h, q - 1) * Fraction(q) ** ((r * r - 1) * (g - 1))
    for i in range(2, r + 1):
        out *= curve.zeta_value(i)
    return out


def hn_exponent(pieces, genus: int) -> int:
    return sum(ri * dj - rj * di + ri * rj * (genus - 1)
               for (ri, di), (rj, dj) in itertools.combinations(pieces, 2))


def _cone_sum(curve: CurveData, ranks: tuple[int, ...], d: int) -> Fraction:
    """Sum over HN types with the given ranks and total degree d of prod beta_ss * q^exponent.

    Gap variables g_i = r_{i+1} d_i - r_i d_{i+1} >= 1 turn the slope cone into an
    orthant; splitting g by residues mod N makes each piece a product of geometric series.
    """
    k, q = len(ranks), curve.q
    # linear map (g_1..g_{k-1}, d) -> (d_1..d_k)
    rows = []
    for i in range(k - 1):
        row = [0] * k
        row[i], row[i + 1] = ranks[i + 1], -ranks[i]
        rows.append(row)
    rows.append([1] * k)
    m = sympy.Matrix(rows)
    inv = m.inv()
    det = abs(int(m.det()))
    modulus = det * lcm(*ranks)
    coef = [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(k)] for i in range(k)]
    # exponent as a linear function of the degrees, then of the gaps
    exp_lin = [0] * k
    exp_const = 0
    for i, j in itertools.combinations(range(k), 2):
        exp_lin[j] += ranks[i]
        exp_lin[i] -= ranks[j]
        exp_const += ranks[i] * ranks[j] * (curve.genus - 1)
    gap_rate = [sum(exp_lin[i] * coef[i][j] for i in range(k)) for j in range(k - 1)]
    if any(rate * modulus >= 0 for rate in gap_rate):
        raise AssertionError("HN cone sum does not converge")
    total = Fraction(0)
    for resid in itertools.product(range(1, modulus + 1), repeat=k - 1):
        vec = list(resid) + [d]
        degs = [sum(coef[i][j] * vec[j] for j in range(k)) for i in range(k)]
        if any(x.denominator != 1 for x in degs):
            continue
        pieces = [(ri, int(di)) for ri, di in zip(ranks, degs)]
        weight = prod(ss_mass(curve, ri, di) for ri, di in pieces)
        if weight == 0:
            continue
        e0 = hn_exponent(pieces, curve.genus)
        term = weight * Fraction(q) ** e0
        for rate in gap_rate:
            step = rate * modulus
            assert step.denominator == 1
            term /= 1 - Fraction(q) ** int(step)
        total += term
    return total


@lru_cache(maxsize=None)
def _ss_mass_cached(curve: CurveData, r: int, d: int) -> Fraction:
    if r == 1:
        return total_mass(curve, 1)
    out = total_mass(curve, r, d)
    for k in range(2, r + 1):
        for ranks in _compositions(r, k):
            out -= _cone_sum(curve, ranks, d)
    return out


def ss_mass(curve: CurveData, r: int, d: int = 0) -> Fraction:
    """beta_ss(r, d) by inverting the HN stratification of the total mass."""
    if not 1 <= r <= MAX_RANK:
        raise UnsupportedRank(f"exact cone summation implemented for rank <= {MAX_RANK}")
    return _ss_mass_cached(curve, r, d % r)


def alpha(curve: CurveData, r: int, d: int) -> Fraction:
    """sum over semistable V of rank r, degree d of (q^{h0(V)} - 1)/#Aut(V)."""
    if d < 0:
        return Fraction(0)
    if r == 1:
        return curve.zeta_series(d)[d]
    if curve.genus > 1 or r > MAX_RANK:
        raise UnsupportedAlpha(f"alpha needs rank 1 or genus <= 1 with rank <= {MAX_RANK}")
    return sum((c.alpha_weight(curve.q) for c in semistable_classes(curve, r, d)), Fraction(0))


# --- tables -------------------------------------------------------------


@dataclass
class MassTable:
    curve: CurveData
    entries: dict[tuple[int, int], dict[str, Fraction]] = field(default_factory=dict)

    def to_json(self) -> dict:
        rows = []
        for (r, d), e in sorted(self.entries.items()):
            row = {"r": r, "d": d}
            row.update({k: rational_to_str(v) for k, v in sorted(e.items())})
            rows.append(row)
        return {"curve": self.curve.to_json(), "entries": rows}


@dataclass
class AlphaTable:
    curve: CurveData
    entries: dict[tuple[int, int], Fraction] = field(default_factory=dict)


def build_tables(curve: CurveData, max_rank: int, degrees=range(0, 1)) -> MassTable:
    table = MassTable(curve)
    for r in range(1, max_rank + 1):
        for d in degrees:
            e = {"beta_all": total_mass(curve, r, d), "beta_ss": ss_mass(curve, r, d)}
            try:
                e["alpha"] = alpha(curve, r, d)
            except UnsupportedAlpha:
                pass
            table.entries[(r, d)] = e
    return table


# --- assembly -----------------------------------------------------------


@dataclass(frozen=True)
class RHReport:
    passed: bool
    exact: bool
    degree: int
    radius2: Fraction
    verdict: CircleVerdict | None
    note: str = ""

    def summary(self) -> str:
        if self.degree == 0:
            return f"pass (vacuous), no zeros{': ' + self.note if self.note else ''}"
        word = "pass" if self.passed else "fail"
        how = "exact" if self.exact else "numeric"
        if self.radius2.numerator == 1:
            radius = f"|t| = {self.radius2.denominator}^(-1/2)"
        else:
            radius = f"|t|^2 = {self.radius2}"
        return f"{word} ({how}), {self.degree} roots, {radius}"

    def to_json(self) -> dict:
        out = {"pass": self.passed, "exact": self.exact, "degree": self.degree,
               "radius2": rational_to_str(self.radius2), "summary": self.summary()}
        if self.verdict is not None:
            out.update({k: v for k, v in self.verdict.to_json().items() if k != "pass"})
        return out


@dataclass(frozen=True)
class BundleZeta:
    curve: CurveData
    rank: int
    closed_form: RatFunc
    series_prefix: tuple[Fraction, ...]
    completed: RatFunc
    alpha_values: tuple[tuple[int, Fraction], ...]
    beta_ss: Fraction
    rh_report: RHReport | None = None

    def to_json(self) -> dict:
        num = _as_fraction_coeffs(RatFunc(self.closed_form.num).univariate_coeffs(T))
        den = _as_fraction_coeffs(RatFunc(self.closed_form.den).univariate_coeffs(T))
        out = {"curve": self.curve.to_json(), "rank": self.rank,
               "closed_form": {"num": [rational_to_str(c) for c in num],
                               "den": [rational_to_str(c) for c in den]},
               "closed_form_text": str(self.closed_form),
               "completed_text": str(self.completed),
               "series_prefix": [rational_to_str(c) for c in self.series_prefix],
               "alpha": {str(d): rational_to_str(a) for d, a in self.alpha_values},
               "beta_ss": rational_to_str(self.beta_ss)}
        if self.rh_report is not None:
            out["rh"] = self.rh_report.to_json()
        return out


def rationality_form(curve: CurveData, r: int, alphas: dict[int, Fraction], beta: Fraction) -> RatFunc:
    q, g = curve.q, curve.genus
    t = RatFunc.var(T)
    a = lambda d: alphas[d] if d >= 0 else Fraction(0)
    out = RatFunc.const(0)
    for m in range(0, g - 1):
        out += a(m * r) * (t ** (r * m) + RatFunc.const(Fraction(q) ** (r * (g - 1 - m))) * t ** (r * (2 * (g - 1) - m)))
    if g >= 1:
        out += a(r * (g - 1)) * t ** (r * (g - 1))
    tr = t**r
    out += beta * (q**r - 1) * t ** (r * g) / ((1 - q**r * tr) * (1 - tr))
    return out


def laurent_t(f: RatFunc, n: int) -> list[Fraction]:
    """Power-series coefficients of f in t through t**n (f regular at 0)."""
    num = _as_fraction_coeffs(RatFunc(f.num).univariate_coeffs(T))
    den = _as_fraction_coeffs(RatFunc(f.den).univariate_coeffs(T))
    if not den or den[0] == 0:
        raise ValueError("series needs a denominator nonzero at t = 0")
    out = []
    for k in range(n + 1):
        c = num[k] if k < len(num) else Fraction(0)
        c -= sum(den[j] * out[k - j] for j in range(1, min(k, len(den) - 1) + 1))
        out.append(c / den[0])
    return out


def assemble_zeta(curve: CurveData, r: int, alphas: dict[int, Fraction] | None = None,
                  beta: Fraction | None = None) -> BundleZeta:
    g = curve.genus
    need = [m * r for m in range(0, g)]
    if alphas is None:
        try:
            alphas = {d: alpha(curve, r, d) for d in need}
        except UnsupportedAlpha as exc:
            raise MissingTable(str(exc)) from exc
    missing = [d for d in need if d not in alphas]
    if missing:
        raise MissingTable(f"alpha missing at degrees {missing}")
    if beta is None:
        beta = ss_mass(curve, r, 0) if r > 1 else total_mass(curve, 1)
    closed = rationality_form(curve, r, alphas, beta)
    prefix = _direct_series(curve, r, alphas)
    t = RatFunc.var(T)
    completed = closed * t ** (r * (1 - g)) if r * (1 - g) >= 0 else closed / t ** (r * (g - 1))
    return BundleZeta(curve, r, closed, tuple(prefix), completed, tuple(sorted(alphas.items())), beta)


def _direct_series(curve: CurveData, r: int, given: dict[int, Fraction]) -> list[Fraction]:
    """Coefficients through t^{r(2g+2)} straight from the definition (sum over d = rm)."""
    n = r * (2 * curve.genus + 2)
    out = [Fraction(0)] * (n + 1)
    for m in range(0, n // r + 1):
        d = r * m
        try:
            out[d] = alpha(curve, r, d)
        except UnsupportedAlpha:
            if d not in given:
                return out[:d]
            out[d] = given[d]
    return out


def series_consistent(z: BundleZeta) -> bool:
    n = len(z.series_prefix) - 1
    return laurent_t(z.closed_form, n) == list(z.series_prefix)


def check_bundle_fe(z: BundleZeta) -> bool:
    """Z_hat(1/(q t)) == Z_hat(t) as an exact identity."""
    image = substitute(z.completed, T, 1 / (RatFunc.const(z.curve.q) * RatFunc.var(T)))
    return image == z.completed


def check_bundle_rh(z: BundleZeta) -> RHReport:
    coeffs = _as_fraction_coeffs(RatFunc(z.completed.num).univariate_coeffs(T))
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    radius2 = Fraction(1, z.curve.q)
    if len(coeffs) <= 1:
        return RHReport(True, True, 0, radius2, None, "numerator is a monomial")
    verdict = circle_test(coeffs, radius2)
    return RHReport(verdict.passed, verdict.exact, len(coeffs) - 1, radius2, verdict)


def with_rh(z: BundleZeta) -> BundleZeta:
    return replace(z, rh_report=check_bundle_rh(z))
