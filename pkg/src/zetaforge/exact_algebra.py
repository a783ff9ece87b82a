"""Exact rational functions over Q in a fixed set of symbols.

Polynomials live in a single ``fmpz_mpoly`` context (graded lex order over
``VARS``), so every ``RatFunc`` has one canonical form: integer numerator and
denominator with trivial gcd and positive leading denominator coefficient.

The symbol ``qr`` stands for a fourth root of ``q``.  A function mentioning
``qr`` never mentions ``q``; if every ``qr`` exponent is divisible by four the
function is folded back to ``q``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import flint
import mpmath
import sympy

VARS = ("q", "qr", "L", "x1", "x2", "x3", "x4", "t")
Q, QROOT, LOGQ, T = "q", "qr", "L", "t"
QROOT_DEGREE = 4
MAX_RANK = 4

_CTX = flint.fmpz_mpoly_ctx.get(VARS, "deglex")
_IDX = {name: i for i, name in enumerate(VARS)}
_NV = len(VARS)


class DivisionByZero(ZeroDivisionError):
    pass


class DenominatorVanishes(ValueError):
    pass


class EvalPole(ArithmeticError):
    pass


class DegenerateInput(ValueError):
    pass


def X(i: int) -> str:
    """Name of the coordinate variable x_i (1-based)."""
    if not 1 <= i <= MAX_RANK:
        raise ValueError(f"coordinate index {i} outside 1..{MAX_RANK}")
    return f"x{i}"


def _const_poly(n) -> flint.fmpz_mpoly:
    return _CTX.constant(int(n))


def _gen(name: str) -> flint.fmpz_mpoly:
    return _CTX.gen(_IDX[name])


def _uses(p: flint.fmpz_mpoly, idx: int) -> bool:
    return p.degrees()[idx] > 0


def _lift_qroot(p: flint.fmpz_mpoly) -> flint.fmpz_mpoly:
    """Rewrite q as qr**4."""
    iq, ir = _IDX[Q], _IDX[QROOT]
    if p.degrees()[iq] == 0:
        return p
    out = {}
    for mon, c in p.to_dict().items():
        mon = list(mon)
        mon[ir] += QROOT_DEGREE * mon[iq]
        mon[iq] = 0
        out[tuple(mon)] = c
    return _CTX.from_dict(out)


def _fold_qroot(p: flint.fmpz_mpoly) -> flint.fmpz_mpoly:
    iq, ir = _IDX[Q], _IDX[QROOT]
    out = {}
    for mon, c in p.to_dict().items():
        mon = list(mon)
        mon[iq] += mon[ir] // QROOT_DEGREE
        mon[ir] = 0
        out[tuple(mon)] = c
    return _CTX.from_dict(out)


def _foldable(p: flint.fmpz_mpoly) -> bool:
    ir = _IDX[QROOT]
    return all(mon[ir] % QROOT_DEGREE == 0 for mon in p.monoms())


def _coeffs_in(p: flint.fmpz_mpoly, idx: int) -> dict[int, flint.fmpz_mpoly]:
    """Split ``p`` as sum_k c_k * v**k with c_k free of v."""
    groups: dict[int, dict] = {}
    for mon, c in p.to_dict().items():
        k = mon[idx]
        mon = list(mon)
        mon[idx] = 0
        groups.setdefault(k, {})[tuple(mon)] = c
    return {k: _CTX.from_dict(d) for k, d in groups.items()}


class RatFunc:
    """Reduced quotient of two integer polynomials in ``VARS``."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = _const_poly(1)
        if isinstance(num, (int, Fraction)):
            num = Fraction(num)
            num, den = _const_poly(num.numerator), den * num.denominator
        self.num, self.den = _normalize(num, den)

    # -- constructors -------------------------------------------------
    @classmethod
    def _raw(cls, num, den) -> "RatFunc":
        obj = object.__new__(cls)
        obj.num, obj.den = num, den
        return obj

    @classmethod
    def const(cls, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value
        value = Fraction(value)
        return cls._raw(_const_poly(value.numerator), _const_poly(value.denominator))

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls._raw(_gen(name), _const_poly(1))

    @classmethod
    def monomial(cls, coeff=1, exps: Mapping[str, int] | None = None) -> "RatFunc":
        """coeff * prod v**e, negative exponents allowed."""
        coeff = Fraction(coeff)
        up, down = [0] * _NV, [0] * _NV
        for name, e in (exps or {}).items():
            if e >= 0:
                up[_IDX[name]] += e
            else:
                down[_IDX[name]] -= e
        num = _CTX.from_dict({tuple(up): coeff.numerator}) if coeff else _const_poly(0)
        den = _CTX.from_dict({tuple(down): coeff.denominator})
        return cls(num, den)

    @classmethod
    def q_power(cls, e) -> "RatFunc":
        """q**e for e in (1/4)Z."""
        e = Fraction(e)
        if e.denominator == 1:
            return cls.monomial(1, {Q: int(e)})
        k = e * QROOT_DEGREE
        if k.denominator != 1:
            raise ValueError(f"q**{e} needs a root of q beyond q^(1/{QROOT_DEGREE})")
        return cls.monomial(1, {QROOT: int(k)})

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, var: str = T) -> "RatFunc":
        """Univariate polynomial sum coeffs[k] * var**k (coefficients may be RatFunc)."""
        v = cls.var(var)
        out = cls.const(0)
        for c in reversed(list(coeffs)):
            out = out * v + (c if isinstance(c, RatFunc) else cls.const(c))
        return out

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def variables(self) -> set[str]:
        dn, dd = self.num.degrees(), self.den.degrees()
        return {name for i, name in enumerate(VARS) if dn[i] > 0 or dd[i] > 0}

    def depends_on(self, name: str) -> bool:
        i = _IDX[name]
        return self.num.degrees()[i] > 0 or self.den.degrees()[i] > 0

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        n = int(self.num.coefficient(0)) if not self.num.is_zero() else 0
        return Fraction(n, int(self.den.coefficient(0)))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(-self.num, self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise DivisionByZero("division by the zero function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RatFunc(self.num**n, self.den**n)
        if self.is_zero():
            raise DivisionByZero("zero to a negative power")
        return RatFunc(self.den ** (-n), self.num ** (-n))

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        if self.den.is_one():
            return str(self.num)
        return f"({self.num})/({self.den})"

    # -- calculus and substitution -----------------------------------
    def derivative(self, name: str) -> "RatFunc":
        i = _IDX[name]
        if not self.depends_on(name):
            return RatFunc.const(0)
        return RatFunc(
            self.num.derivative(i) * self.den - self.num * self.den.derivative(i),
            self.den * self.den,
        )

    def substitute(self, name: str, g) -> "RatFunc":
        return substitute(self, name, g)

    def reduce(self) -> "RatFunc":
        return RatFunc(self.num, self.den)

    # -- serialization -----------------------------------------------
    def to_json(self) -> dict:
        return {"vars": list(VARS), "num": _poly_json(self.num), "den": _poly_json(self.den)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "RatFunc":
        names = obj.get("vars", VARS)
        num, dn = _poly_from_json(obj["num"], names)
        den, dd = _poly_from_json(obj["den"], names)
        return cls(num * dd, den * dn)

    def univariate_coeffs(self, name: str, part: str = "num") -> list["RatFunc"]:
        """Coefficient list (low to high) of the numerator or denominator in ``name``."""
        p = self.num if part == "num" else self.den
        groups = _coeffs_in(p, _IDX[name])
        top = max(groups) if groups else 0
        return [RatFunc(groups[k]) if k in groups else RatFunc.const(0) for k in range(top + 1)]


def _coerce(x):
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, (int, Fraction)):
        return RatFunc.const(x)
    return NotImplemented


def _normalize(num, den):
    if den.is_zero():
        raise DivisionByZero("zero denominator")
    if num.is_zero():
        return _const_poly(0), _const_poly(1)
    ir = _IDX[QROOT]
    if _uses(num, ir) or _uses(den, ir):
        num, den = _lift_qroot(num), _lift_qroot(den)
    g = num.gcd(den)
    if not g.is_one():
        num, den = num / g, den / g
    if den.leading_coefficient() < 0:
        num, den = -num, -den
    if (_uses(num, ir) or _uses(den, ir)) and _foldable(num) and _foldable(den):
        num, den = _fold_qroot(num), _fold_qroot(den)
        if den.leading_coefficient() < 0:
            num, den = -num, -den
    return num, den


def _poly_json(p) -> list:
    out = []
    for mon, c in p.terms():
        out.append([f"{int(c)}/1", [int(e) for e in mon]])
    return out


def _poly_from_json(items, names) -> tuple:
    """Integer polynomial and the common denominator cleared from its coefficients."""
    num_terms: dict = {}
    denom = 1
    parsed = []
    for coeff, exps in items:
        c = Fraction(coeff)
        denom = denom * c.denominator // math.gcd(denom, c.denominator)
        parsed.append((c, exps))
    for c, exps in parsed:
        mon = [0] * _NV
        for name, e in zip(names, exps):
            mon[_IDX[name]] += int(e)
        num_terms[tuple(mon)] = num_terms.get(tuple(mon), 0) + int(c * denom)
    p = _CTX.from_dict(num_terms) if num_terms else _const_poly(0)
    return p, denom


def rational_to_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def rational_from_str(s) -> Fraction:
    return Fraction(str(s))


# --- operations ---------------------------------------------------------


def arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def _poly_at(p, idx: int, gnum, gden) -> tuple:
    """p(v = gnum/gden) as (numerator poly, degree used for gden)."""
    groups = _coeffs_in(p, idx)
    if not groups:
        return _const_poly(0), 0
    n = max(groups)
    acc = _const_poly(0)
    for k, c in groups.items():
        acc += c * gnum**k * gden ** (n - k)
    return acc, n


def substitute(f: RatFunc, name: str, g) -> RatFunc:
    """Compose f with ``name -> g``; ``g`` may itself mention ``name``."""
    g = _coerce(g)
    if not f.depends_on(name):
        return f
    ir = _IDX[QROOT]
    fnum, fden, gnum, gden = f.num, f.den, g.num, g.den
    if _uses(gnum, ir) or _uses(gden, ir) or _uses(fnum, ir) or _uses(fden, ir):
        fnum, fden = _lift_qroot(fnum), _lift_qroot(fden)
        gnum, gden = _lift_qroot(gnum), _lift_qroot(gden)
    idx = _IDX[name]
    dval, dn = _poly_at(fden, idx, gnum, gden)
    if dval.is_zero():
        raise DenominatorVanishes(f"denominator of {f} vanishes at {name} = {g}")
    nval, nn = _poly_at(fnum, idx, gnum, gden)
    # f(g) = (nval / gden**nn) / (dval / gden**dn)
    if dn >= nn:
        return RatFunc(nval * gden ** (dn - nn), dval)
    return RatFunc(nval, dval * gden ** (nn - dn))


def substitute_many(f: RatFunc, mapping: Mapping[str, RatFunc]) -> RatFunc:
    """Simultaneous substitution via fresh placeholders is unnecessary when the
    images do not mention each other's variables; this is checked."""
    images = {k: _coerce(v) for k, v in mapping.items()}
    for k, v in images.items():
        clash = v.variables() & (set(images) - {k})
        if clash:
            raise ValueError(f"simultaneous substitution with overlapping variables {clash}")
    for k, v in images.items():
        f = substitute(f, k, v)
    return f


def _vanishing_order(p, idx: int, point: RatFunc) -> int:
    if p.is_zero():
        raise ValueError("order of the zero polynomial")
    k = 0
    cur = RatFunc(p)
    name = VARS[idx]
    while True:
        if not substitute(cur, name, point).is_zero():
            return k
        cur = cur.derivative(name)
        k += 1


def pole_order(f: RatFunc, name: str, point) -> int:
    point = _coerce(point)
    if point.depends_on(name):
        raise ValueError("the point must be free of the residue variable")
    if not f.den.degrees()[_IDX[name]]:
        return 0
    idx = _IDX[name]
    k = _vanishing_order(f.den, idx, point) - (
        _vanishing_order(f.num, idx, point) if not f.num.is_zero() else 0
    )
    return max(k, 0)


def _linear_factor(name: str, point: RatFunc):
    """Primitive integer polynomial b*v - a vanishing exactly at v = a/b."""
    ir = _IDX[QROOT]
    a, b = point.num, point.den
    return b * _gen(name) - a, b, (_uses(a, ir) or _uses(b, ir))


def residue(f: RatFunc, name: str, point) -> RatFunc:
    """Res_{name = point} f for f viewed as univariate over the other symbols."""
    point = _coerce(point)
    k = pole_order(f, name, point)
    if k == 0:
        return RatFunc.const(0)
    ell, b, lifted = _linear_factor(name, point)
    num, den = f.num, f.den
    if lifted or _uses(num, _IDX[QROOT]) or _uses(den, _IDX[QROOT]):
        num, den, ell, b = map(_lift_qroot, (num, den, ell, b))
    den1 = den / ell**k
    # (v - point)^k = ell^k / b^k, so (v - point)^k f = num / (b^k den1)
    h = RatFunc(num, den1 * b**k)
    for _ in range(k - 1):
        h = h.derivative(name)
    return substitute(h, name, point) * Fraction(1, math.factorial(k - 1))


def laurent_coefficients(f: RatFunc, name: str, point, upto: int) -> dict[int, RatFunc]:
    """Coefficients c_j of (v - point)**j for j from -pole_order to ``upto``."""
    point = _coerce(point)
    k = pole_order(f, name, point)
    v = RatFunc.var(name)
    h = f * (v - point) ** k if k else f
    out = {}
    cur = h
    for j in range(upto + k + 1):
        out[j - k] = substitute(cur, name, point) * Fraction(1, math.factorial(j))
        cur = cur.derivative(name)
    return out


# --- numerics -----------------------------------------------------------


def _complete_assignment(assignment: Mapping[str, complex]) -> dict[str, complex]:
    vals = {k: complex(v) for k, v in assignment.items()}
    if Q in vals:
        vals.setdefault(LOGQ, cmath.log(vals[Q]))
        vals.setdefault(QROOT, cmath.exp(vals[LOGQ] / QROOT_DEGREE))
    return vals


def _eval_poly(p, vals: Mapping[str, complex]) -> complex:
    total = 0j
    for mon, c in p.terms():
        term = complex(int(c))
        for i, e in enumerate(mon):
            if e:
                term *= vals[VARS[i]] ** int(e)
        total += term
    return total


def eval_complex(f: RatFunc, assignment: Mapping[str, complex]) -> complex:
    vals = _complete_assignment(assignment)
    missing = f.variables() - set(vals)
    if missing:
        raise ValueError(f"no value for {sorted(missing)}")
    d = _eval_poly(f.den, vals)
    if abs(d) < 1e-300:
        raise EvalPole(f"denominator vanishes numerically for {f}")
    return _eval_poly(f.num, vals) / d


def specialize(f: RatFunc, values: Mapping[str, Fraction]) -> RatFunc:
    for name, val in values.items():
        f = substitute(f, name, RatFunc.const(val))
    return f


@dataclass(frozen=True)
class RootInfo:
    root: complex
    radius: float
    multiplicity: int


def _as_fraction_coeffs(coeffs, q=None) -> list[Fraction]:
    out = []
    for c in coeffs:
        if isinstance(c, RatFunc):
            if q is not None:
                c = specialize(c, {Q: Fraction(q)})
            c = c.to_fraction()
        out.append(Fraction(c))
    while out and out[-1] == 0:
        out.pop()
    return out


def univariate_roots(coeffs: Sequence, q=None, dps: int = 60) -> list[RootInfo]:
    """Roots of sum coeffs[k] t**k with a posteriori error radii.

    The radius is min(n|p/p'|, (|p|/|a_n|)^(1/n)) at the computed root; both
    are guaranteed inclusion radii for some true root.
    """
    a = _as_fraction_coeffs(coeffs, q)
    n = len(a) - 1
    if n < 1:
        raise DegenerateInput("constant polynomial has no roots")
    with mpmath.workdps(dps):
        mp_coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(a)]
        roots = mpmath.polyroots(mp_coeffs, maxsteps=400, extraprec=4 * dps)
        if not isinstance(roots, list):
            roots = [roots]
        lead = abs(mp_coeffs[0])
        dcoeffs = [c * (n - i) for i, c in enumerate(mp_coeffs[:-1])]
        raw = []
        for r in roots:
            pv = abs(mpmath.polyval(mp_coeffs, r))
            dv = abs(mpmath.polyval(dcoeffs, r))
            bound = (pv / lead) ** (mpmath.mpf(1) / n)
            if dv > 0:
                bound = min(bound, n * pv / dv)
            raw.append((complex(r), float(bound)))
    out: list[RootInfo] = []
    used = [False] * len(raw)
    for i, (r, rad) in enumerate(raw):
        if used[i]:
            continue
        mult, worst = 1, rad
        for j in range(i + 1, len(raw)):
            if not used[j] and abs(raw[j][0] - r) <= max(1e-6, 2 * (rad + raw[j][1])):
                used[j] = True
                mult += 1
                worst = max(worst, raw[j][1])
        out.append(RootInfo(r, worst, mult))
    out.sort(key=lambda ri: (round(ri.root.real, 12), round(ri.root.imag, 12)))
    return out


@dataclass(frozen=True)
class CircleVerdict:
    passed: bool
    exact: bool
    witness: complex | None
    roots: tuple[RootInfo, ...]

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "exact": self.exact,
            "witness": None if self.witness is None else [_fmt(self.witness.real), _fmt(self.witness.imag)],
            "roots": [
                {"re": _fmt(r.root.real), "im": _fmt(r.root.imag), "abs": _fmt(abs(r.root)),
                 "radius": f"{r.radius:.3e}", "multiplicity": r.multiplicity}
                for r in self.roots
            ],
        }


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _poly_divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    num = list(num)
    quot = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    while len(num) >= len(den) and any(num):
        shift = len(num) - len(den)
        c = num[-1] / den[-1]
        quot[shift] = c
        for i, d in enumerate(den):
            num[i + shift] -= c * d
        num.pop()
    return quot, num


def _exact_on_circle(a: list[Fraction], c: Fraction) -> bool | None:
    """Exact all-roots-on-|t|^2=c test; None when the fast path does not apply."""
    n = len(a) - 1
    if a[0] == 0 or n % 2:
        return None
    m = n // 2
    eps = a[n] * c**m / a[0]
    if eps not in (1, -1):
        return None
    if any(a[n - k] * c ** (m - k) != eps * a[k] for k in range(n + 1)):
        return None
    if eps == -1:
        quot, rem = _poly_divmod(a, [-c, Fraction(0), Fraction(1)])
        if any(rem):
            return None
        if len(quot) == 1:
            return True
        return _exact_on_circle(quot, c)
    y = sympy.Symbol("y")
    dick = [sympy.Integer(2), y]
    for k in range(2, m + 1):
        dick.append(sympy.expand(y * dick[k - 1] - sympy.Rational(c.numerator, c.denominator) * dick[k - 2]))
    expr = sympy.Rational(a[m].numerator, a[m].denominator)
    for k in range(1, m + 1):
        expr += sympy.Rational(a[m + k].numerator, a[m + k].denominator) * dick[k]
    poly = sympy.Poly(expr, y, domain=sympy.QQ).sqf_part()
    if poly.degree() < 1:
        return True
    if poly.count_roots() != poly.degree():
        return False
    # all real; check y**2 <= 4c via the polynomial in z = y**2
    z = sympy.Symbol("z")
    even = sum(cf * z ** (e // 2) for (e,), cf in poly.terms() if e % 2 == 0)
    odd = sum(cf * z ** (e // 2) for (e,), cf in poly.terms() if e % 2 == 1)
    sq = sympy.Poly(sympy.expand(even**2 - z * odd**2), z, domain=sympy.QQ).sqf_part()
    bound = 4 * sympy.Rational(c.numerator, c.denominator)
    beyond = sq.count_roots(bound, sympy.oo)
    if sq.eval(bound) == 0:
        beyond -= 1
    return beyond == 0


def circle_test(coeffs: Sequence, radius2, q=None) -> CircleVerdict:
    """Do all roots of the polynomial lie on |t|**2 = radius2?"""
    c = Fraction(radius2)
    if c <= 0:
        raise ValueError("radius2 must be positive")
    a = _as_fraction_coeffs(coeffs, q)
    roots = tuple(univariate_roots(a))
    exact = _exact_on_circle(a, c)
    if exact:
        return CircleVerdict(True, True, None, roots)
    worst = None
    rho = math.sqrt(c)
    for r in roots:
        mod = abs(r.root)
        tol = max(1e-9, 2 * mod * r.radius + r.radius**2)
        if abs(mod**2 - float(c)) > tol:
            if worst is None or abs(mod - rho) > abs(abs(worst) - rho):
                worst = r.root
    return CircleVerdict(worst is None, False, worst, roots)
