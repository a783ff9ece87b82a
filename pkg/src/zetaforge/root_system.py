"""Root data of small split groups, Weyl groups, and coroot pairings.

Weights are written in fundamental-weight coordinates, lambda = sum lambda_i w_i,
so <lambda, beta^v> = sum_i c_i lambda_i for beta^v = sum_i c_i alpha_i^v.
``cartan_matrix[i][j]`` is <alpha_i, alpha_j^v>.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

_CARTAN = {
    ("A", 1): [[2]],
    ("A", 2): [[2, -1], [-1, 2]],
    ("A", 3): [[2, -1, 0], [-1, 2, -1], [0, -1, 2]],
    # B2: alpha_1 long, alpha_2 short
    ("B", 2): [[2, -2], [-1, 2]],
    # C2: alpha_1 short, alpha_2 long
    ("C", 2): [[2, -1], [-2, 2]],
    ("D", 4): [[2, -1, 0, 0], [-1, 2, -1, -1], [0, -1, 2, 0], [0, -1, 0, 2]],
    # G2: alpha_1 short, alpha_2 long
    ("G", 2): [[2, -1], [-3, 2]],
}

_N_POSITIVE = {("A", 1): 1, ("A", 2): 3, ("A", 3): 6, ("B", 2): 4, ("C", 2): 4, ("D", 4): 12, ("G", 2): 6}
WEYL_ORDER = {("A", 1): 2, ("A", 2): 6, ("A", 3): 24, ("B", 2): 8, ("C", 2): 8, ("D", 4): 192, ("G", 2): 12}

SUPPORTED = tuple(_CARTAN)


class UnsupportedType(ValueError):
    pass


@dataclass(frozen=True)
class LinearForm:
    """sum coeffs[i] * lambda_{i+1} + constant."""

    coeffs: tuple[int, ...]
    constant: int = 0

    def __add__(self, shift: int) -> "LinearForm":
        return LinearForm(self.coeffs, self.constant + shift)

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple(-c for c in self.coeffs), -self.constant)

    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def restrict(self, index: int, value: int = 1) -> "LinearForm":
        """Set lambda_{index+1} = value."""
        coeffs = list(self.coeffs)
        c = coeffs[index]
        coeffs[index] = 0
        return LinearForm(tuple(coeffs), self.constant + c * value)

    def evaluate(self, lam) -> complex:
        return sum(c * l for c, l in zip(self.coeffs, lam)) + self.constant

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c:+d}*l{i + 1}")
        if self.constant or not parts:
            parts.append(f"{self.constant:+d}")
        return "".join(parts).lstrip("+")


@dataclass(frozen=True)
class WeylElement:
    word: tuple[int, ...]
    coroot_action: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.word)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.coroot_action, dtype=np.int64)

    def act(self, coroot) -> tuple[int, ...]:
        return tuple(int(v) for v in self.matrix @ np.asarray(coroot, dtype=np.int64))

    @cached_property
    def inverse_matrix(self) -> np.ndarray:
        # integral inverse: the matrix has finite order, so M^{-1} = M^(order-1)
        m = self.matrix
        power = np.eye(len(m), dtype=np.int64)
        while True:
            nxt = power @ m
            if np.array_equal(nxt, np.eye(len(m), dtype=np.int64)):
                return power
            power = nxt

    def act_inverse(self, coroot) -> tuple[int, ...]:
        return tuple(int(v) for v in self.inverse_matrix @ np.asarray(coroot, dtype=np.int64))

    def __str__(self) -> str:
        return "e" if not self.word else "s" + ".s".join(str(i + 1) for i in self.word)


@dataclass(frozen=True)
class RootDatum:
    cartan_type: str
    rank: int
    cartan_matrix: tuple[tuple[int, ...], ...]
    positive_coroots: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def simple_roots(self) -> tuple[int, ...]:
        return tuple(range(self.rank))

    @property
    def rho_coords(self) -> tuple[int, ...]:
        return (1,) * self.rank

    @property
    def name(self) -> str:
        return f"{self.cartan_type}{self.rank}"

    def simple_coroot(self, i: int) -> tuple[int, ...]:
        return tuple(int(j == i) for j in range(self.rank))

    def reflection(self, i: int) -> np.ndarray:
        """Matrix of s_i on coroot coordinates: b -> b - <alpha_i, b> alpha_i^v."""
        m = np.eye(self.rank, dtype=np.int64)
        m[i, :] -= np.array(self.cartan_matrix[i], dtype=np.int64)
        return m

    def is_positive(self, coroot) -> bool:
        return any(coroot) and all(c >= 0 for c in coroot)

    def coroot_index(self, coroot) -> int:
        return self.positive_coroots.index(tuple(coroot))

    def to_json(self) -> dict:
        return {"type": self.cartan_type, "rank": self.rank}


def _closure(cartan: list[list[int]]) -> list[tuple[int, ...]]:
    """All positive coroots, by reflecting the simple ones until nothing new appears."""
    r = len(cartan)
    refl = []
    for i in range(r):
        m = np.eye(r, dtype=np.int64)
        m[i, :] -= np.array(cartan[i], dtype=np.int64)
        refl.append(m)
    found = {tuple(int(i == j) for j in range(r)) for i in range(r)}
    frontier = list(found)
    while frontier:
        nxt = []
        for b in frontier:
            for m in refl:
                c = tuple(int(v) for v in m @ np.array(b))
                if all(v >= 0 for v in c) and any(c) and c not in found:
                    found.add(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(found, key=lambda c: (sum(c), tuple(-v for v in c)))


def build_root_datum(cartan_type: str, rank: int) -> RootDatum:
    key = (str(cartan_type).upper(), int(rank))
    if key not in _CARTAN:
        raise UnsupportedType(f"unsupported root datum {cartan_type}{rank}; choose from "
                              + ", ".join(f"{t}{n}" for t, n in SUPPORTED))
    cartan = _CARTAN[key]
    pos = _closure(cartan)
    if len(pos) != _N_POSITIVE[key]:
        raise AssertionError(f"{key}: found {len(pos)} positive coroots")
    return RootDatum(key[0], key[1], tuple(map(tuple, cartan)), tuple(pos))


def weyl_enumerate(datum: RootDatum) -> list[WeylElement]:
    """Breadth-first by length; within a length, lexicographic in the reduced word."""
    r = datum.rank
    refl = [datum.reflection(i) for i in range(r)]
    ident = np.eye(r, dtype=np.int64)
    seen = {ident.tobytes()}
    layer = [((), ident)]
    out = [WeylElement((), tuple(map(tuple, ident.tolist())))]
    while layer:
        nxt = []
        for word, mat in layer:
            for i in range(r):
                m = mat @ refl[i]
                key = m.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append((word + (i,), m))
        nxt.sort(key=lambda wm: wm[0])
        out.extend(WeylElement(w, tuple(map(tuple, m.tolist()))) for w, m in nxt)
        layer = nxt
    return out


def inversion_set(datum: RootDatum, w: WeylElement) -> list[int]:
    """Indices of positive coroots sent to negative ones by w."""
    return [k for k, b in enumerate(datum.positive_coroots) if not datum.is_positive(w.act(b))]


def longest_element(datum: RootDatum) -> WeylElement:
    return weyl_enumerate(datum)[-1]


def pairing_form(datum: RootDatum, w: WeylElement | None, coroot, subtract_rho: bool) -> LinearForm:
    """<w lambda - rho, coroot> (or <w lambda, coroot>) as a form in lambda."""
    coroot = tuple(coroot)
    coeffs = coroot if w is None else w.act_inverse(coroot)
    constant = -sum(coroot) if subtract_rho else 0
    return LinearForm(tuple(int(c) for c in coeffs), constant)


def parse_group(spec) -> tuple[RootDatum, int]:
    """{"type": "A", "rank": 2, "parabolic_index": 1} -> (datum, parabolic index)."""
    try:
        datum = build_root_datum(spec["type"], spec["rank"])
    except (KeyError, TypeError) as exc:
        raise UnsupportedType(f"malformed group spec {spec!r}") from exc
    p = int(spec.get("parabolic_index", datum.rank - 1))
    if not 0 <= p < datum.rank:
        raise UnsupportedType(f"parabolic_index {p} outside 0..{datum.rank - 1}")
    return datum, p
