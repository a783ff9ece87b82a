"""Curves over F_q through their zeta numerators, and the complete zeta as a
rational function of q**(-form) for affine forms in the lambda coordinates.

The complete zeta is fixed as zeta_hat(s) = q**((g-1)s) Z(q**-s), i.e. with
M = q**-s,

    zeta_hat = M**(1-g) P(M) / ((1 - M)(1 - q M)),

which satisfies zeta_hat(1 - s) = zeta_hat(s).  Inside symbolic expressions q
stays formal: the upper half of P is written as q**(g-i) a_i so the functional
equation holds identically in q.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .exact_algebra import Q, T, RatFunc, X, rational_from_str, rational_to_str
from .root_system import LinearForm


class InvalidCounts(ValueError):
    pass


def _is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = next(d for d in range(2, n + 1) if n % d == 0)
    while n % p == 0:
        n //= p
    return n == 1


@dataclass(frozen=True)
class CurveData:
    q: int
    genus: int
    numerator_coeffs: tuple[int, ...]
    point_counts: tuple[int, ...] | None = None
    name: str = ""

    def __post_init__(self):
        a, g, q = self.numerator_coeffs, self.genus, self.q
        if not _is_prime_power(q):
            raise InvalidCounts(f"q = {q} is not a prime power")
        if len(a) != 2 * g + 1 or a[0] != 1:
            raise InvalidCounts(f"numerator must have 2g+1 = {2 * g + 1} coefficients with a_0 = 1")
        for i in range(g + 1):
            if a[2 * g - i] != q ** (g - i) * a[i]:
                raise InvalidCounts(f"functional equation fails at a_{2 * g - i}")
        if self.class_number < 1:
            raise InvalidCounts("class number P(1) must be positive")
        if self.point_counts is not None:
            if tuple(point_counts_from_numerator(q, a, len(self.point_counts))) != tuple(self.point_counts):
                raise InvalidCounts("point counts do not regenerate the numerator")

    @property
    def class_number(self) -> int:
        return sum(self.numerator_coeffs)

    h = class_number

    def numerator_at(self, m) -> Fraction:
        return sum(Fraction(c) * Fraction(m) ** i for i, c in enumerate(self.numerator_coeffs))

    @cached_property
    def formal_numerator(self) -> tuple[RatFunc, ...]:
        """P's coefficients with the upper half written through formal q."""
        g, a = self.genus, self.numerator_coeffs
        q = RatFunc.var(Q)
        out = [RatFunc.const(a[i]) for i in range(g + 1)]
        out += [q ** (g - i) * a[i] for i in range(g - 1, -1, -1)]
        return tuple(out)

    def zeta_series(self, n: int) -> list[Fraction]:
        """Coefficients of Z(t) = P(t)/((1-t)(1-qt)) through t**n."""
        a = self.numerator_coeffs
        geo = [Fraction(self.q**(k + 1) - 1, self.q - 1) for k in range(n + 1)]
        return [sum(Fraction(a[i]) * geo[k - i] for i in range(min(k, len(a) - 1) + 1)) for k in range(n + 1)]

    def zeta_value(self, s: int) -> Fraction:
        """Z(q**-s) as an exact rational."""
        m = Fraction(1, self.q**s) if s >= 0 else Fraction(self.q ** (-s))
        return self.numerator_at(m) / ((1 - m) * (1 - self.q * m))

    def label(self) -> str:
        return self.name or f"q{self.q}_g{self.genus}_" + "_".join(map(str, self.numerator_coeffs))

    def to_json(self) -> dict:
        out = {"q": self.q, "genus": self.genus,
               "numerator": [rational_to_str(c) for c in self.numerator_coeffs]}
        if self.point_counts is not None:
            out["point_counts"] = list(self.point_counts)
        if self.name:
            out["name"] = self.name
        return out


def _exp_series(s: Sequence[Fraction], n: int) -> list[Fraction]:
    """exp of a power series with s[0] = 0, through degree n."""
    z = [Fraction(1)] + [Fraction(0)] * n
    for k in range(1, n + 1):
        z[k] = sum(j * s[j] * z[k - j] for j in range(1, k + 1) if j < len(s)) / k
    return z


def point_counts_from_numerator(q: int, coeffs: Sequence[int], n: int) -> list[int]:
    """N_1..N_n, using N_m = q^m + 1 - sum_j alpha_j^m for P(t) = prod (1 - alpha_j t)."""
    a = [Fraction(c) for c in coeffs] + [Fraction(0)] * n
    log = [Fraction(0)] * (n + 1)  # log P = sum log[k] t^k
    for k in range(1, n + 1):
        log[k] = (k * a[k] - sum(j * log[j] * a[k - j] for j in range(1, k))) / k
    return [int(q**m + 1 + m * log[m]) for m in range(1, n + 1)]


def curve_from_point_counts(q: int, genus: int, counts: Sequence[int], name: str = "") -> CurveData:
    if len(counts) != genus:
        raise InvalidCounts(f"need exactly g = {genus} point counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise InvalidCounts("point counts must be nonnegative")
    s = [Fraction(0)] + [Fraction(c, m) for m, c in enumerate(counts, start=1)]
    z = _exp_series(s, genus)
    # P = Z (1 - t)(1 - q t) mod t^(g+1)
    fac = [Fraction(1), Fraction(-1 - q), Fraction(q)]
    low = [sum(z[k - j] * fac[j] for j in range(3) if k - j >= 0) for k in range(genus + 1)]
    if any(c.denominator != 1 for c in low):
        raise InvalidCounts(f"non-integral numerator coefficients {low}")
    a = [int(c) for c in low] + [q ** (genus - i) * int(low[i]) for i in range(genus - 1, -1, -1)]
    try:
        return CurveData(q, genus, tuple(a), tuple(counts), name)
    except InvalidCounts as exc:
        raise InvalidCounts(f"counts {list(counts)} are inconsistent: {exc}") from exc


def curve_from_numerator(q: int, genus: int, coeffs: Sequence, name: str = "") -> CurveData:
    a = [Fraction(c) for c in coeffs]
    if any(c.denominator != 1 for c in a):
        raise InvalidCounts("numerator coefficients must be integers")
    return CurveData(q, genus, tuple(int(c) for c in a), None, name)


def parse_curve(spec: dict) -> CurveData:
    """{"q": 2, "genus": 1, "point_counts": [3]} or {..., "numerator": ["1/1", "0/1", "2/1"]}."""
    try:
        q, g = int(spec["q"]), int(spec["genus"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCounts(f"malformed curve spec {spec!r}") from exc
    name = spec.get("name", "")
    if "numerator" in spec:
        curve = curve_from_numerator(q, g, [rational_from_str(c) for c in spec["numerator"]], name)
        if "point_counts" in spec:
            expected = curve_from_point_counts(q, g, spec["point_counts"], name)
            if expected.numerator_coeffs != curve.numerator_coeffs:
                raise InvalidCounts("numerator and point counts disagree")
            curve = expected
        return curve
    if "point_counts" in spec:
        return curve_from_point_counts(q, g, spec["point_counts"], name)
    if g == 0:
        return curve_from_point_counts(q, 0, [], name)
    raise InvalidCounts("curve spec needs 'point_counts' or 'numerator'")


def load_curve(path) -> CurveData:
    return parse_curve(json.loads(Path(path).read_text()))


def form_monomial(form: LinearForm, shift=0) -> RatFunc:
    """q**-(form + shift) as a monomial in q and the x_i = q**-lambda_i."""
    exps = {X(i + 1): c for i, c in enumerate(form.coeffs) if c}
    return RatFunc.monomial(1, exps) * RatFunc.q_power(-(form.constant + shift))


def complete_zeta_of(curve: CurveData, m: RatFunc) -> RatFunc:
    """M**(1-g) P(M) / ((1-M)(1-qM)) for a given M."""
    q = RatFunc.var(Q)
    p = RatFunc.const(0)
    for c in reversed(curve.formal_numerator):
        p = p * m + c
    return m ** (1 - curve.genus) * p / ((1 - m) * (1 - q * m))


def affine_zeta(curve: CurveData, form: LinearForm, shift: int = 0) -> RatFunc:
    return complete_zeta_of(curve, form_monomial(form, shift))


def complete_zeta_t(curve: CurveData) -> RatFunc:
    """zeta_hat(s) in the curve variable t = q**-s."""
    return complete_zeta_of(curve, RatFunc.var(T))


def zeta_numerator_poly(curve: CurveData, m: RatFunc) -> RatFunc:
    """P(M) with formal q."""
    p = RatFunc.const(0)
    for c in reversed(curve.formal_numerator):
        p = p * m + c
    return p


def numeric_complete_zeta(curve: CurveData, z: complex, q_value: float | None = None) -> complex:
    import cmath
    qv = complex(curve.q if q_value is None else q_value)
    m = cmath.exp(-z * cmath.log(qv))
    p = sum(c * m**i for i, c in enumerate(curve.numerator_coeffs))
    return m ** (1 - curve.genus) * p / ((1 - m) * (1 - qv * m))


P1_Q2 = curve_from_point_counts(2, 0, [], "P1_q2")
ELLIPTIC_Q2_N3 = curve_from_point_counts(2, 1, [3], "elliptic_q2_N3")
ELLIPTIC_Q2_N5 = curve_from_point_counts(2, 1, [5], "elliptic_q2_N5")
TEST_CURVES = (P1_Q2, ELLIPTIC_Q2_N3, ELLIPTIC_Q2_N5)
