"""Weyl-sum periods kept in factored form.

Each term is ``prefactor * prod(atoms)``; an atom is either a geometric factor
(1 - q**-form)**e or a complete-zeta power zeta_hat(form + shift)**e.  Forms are
integer affine forms in the lambda coordinates, x_i = q**-lambda_i.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from functools import reduce
from operator import mul
from typing import Sequence

from .curve_zeta import CurveData, affine_zeta, form_monomial, numeric_complete_zeta
from .exact_algebra import Q, RatFunc, X, eval_complex
from .root_system import LinearForm, RootDatum, WeylElement, inversion_set, pairing_form, weyl_enumerate

GEOM, ZETA = "geom", "zeta"


class NearPole(ArithmeticError):
    pass


@dataclass(frozen=True)
class Atom:
    kind: str
    form: LinearForm
    shift: int = 0
    exponent: int = 1

    @property
    def argument(self) -> LinearForm:
        return self.form + self.shift

    def value(self, curve: CurveData) -> RatFunc:
        if self.kind == GEOM:
            base = 1 - form_monomial(self.form)
        else:
            base = affine_zeta(curve, self.form, self.shift)
        return base**self.exponent

    def numeric(self, curve: CurveData, lam: Sequence[complex], q_value: float) -> complex:
        z = self.argument.evaluate(lam)
        if self.kind == GEOM:
            base = 1 - cmath.exp(-z * cmath.log(q_value))
        else:
            base = numeric_complete_zeta(curve, z, q_value)
        if base == 0:
            raise NearPole(f"atom {self} vanishes")
        return base**self.exponent

    def __str__(self):
        if self.kind == GEOM:
            return f"(1-q^-({self.form}))^{self.exponent}"
        arg = self.argument
        return f"Z({arg})^{self.exponent}"


@dataclass(frozen=True)
class PeriodTerm:
    weyl: WeylElement | None
    atoms: tuple[Atom, ...]
    prefactor: RatFunc = field(default_factory=lambda: RatFunc.const(1))

    def zeta_pairs(self) -> int:
        return sum(1 for a in self.atoms if a.kind == ZETA and a.exponent > 0)

    def value(self, curve: CurveData) -> RatFunc:
        return reduce(mul, (a.value(curve) for a in self.atoms), self.prefactor)


@dataclass(frozen=True)
class PeriodExpression:
    datum: RootDatum
    curve: CurveData
    terms: tuple[PeriodTerm, ...]
    live: tuple[int, ...]

    @property
    def live_vars(self) -> tuple[str, ...]:
        return tuple(X(i + 1) for i in self.live)

    def scaled(self, k) -> "PeriodExpression":
        return replace(self, terms=tuple(replace(t, prefactor=t.prefactor * k) for t in self.terms))

    def dump(self) -> str:
        lines = [f"# {self.datum.name} over {self.curve.label()}, live {list(self.live_vars)}"]
        for t in self.terms:
            word = str(t.weyl) if t.weyl is not None else "-"
            atoms = " ".join(str(a) for a in t.atoms)
            lines.append(f"{word}\t[{t.prefactor}]\t{atoms}")
        return "\n".join(lines)


def build_period(datum: RootDatum, curve: CurveData) -> PeriodExpression:
    terms = []
    for w in weyl_enumerate(datum):
        atoms = [Atom(GEOM, pairing_form(datum, w, datum.simple_coroot(i), True), 0, -1)
                 for i in range(datum.rank)]
        for k in inversion_set(datum, w):
            form = pairing_form(datum, None, datum.positive_coroots[k], False)
            atoms.append(Atom(ZETA, form, 0, 1))
            atoms.append(Atom(ZETA, form, 1, -1))
        terms.append(PeriodTerm(w, tuple(atoms)))
    return PeriodExpression(datum, curve, tuple(terms), tuple(range(datum.rank)))


def expand(expr: PeriodExpression) -> RatFunc:
    """The literal sum of all terms as one reduced rational function."""
    total = RatFunc.const(0)
    for t in expr.terms:
        total = total + t.value(expr.curve)
    return total


def numeric_period(expr: PeriodExpression, lam: Sequence[complex], q_value: float | None = None) -> complex:
    """Sum of atom products evaluated directly (never expanded)."""
    qv = float(expr.curve.q if q_value is None else q_value)
    lam = list(lam)
    full = [0j] * expr.datum.rank
    for i, l in zip(expr.live, lam):
        full[i] = complex(l)
    assign = {Q: qv}
    for i in expr.live:
        assign[X(i + 1)] = cmath.exp(-full[i] * cmath.log(qv))
    total = 0j
    for t in expr.terms:
        val = eval_complex(t.prefactor, assign) if not t.prefactor.is_constant() else complex(t.prefactor.to_fraction())
        for a in t.atoms:
            v = a.numeric(expr.curve, full, qv)
            if abs(v) > 1e12:
                raise NearPole(f"atom {a} has magnitude {abs(v):.3g} at lambda = {lam}")
            val *= v
        total += val
    return total


def zeta_pair_counts(expr: PeriodExpression) -> list[int]:
    return [t.zeta_pairs() for t in expr.terms]
