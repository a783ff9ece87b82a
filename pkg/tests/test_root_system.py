
import numpy as np
import pytest
from hypothesis import given, strategies as st

from zetaforge.root_system import (
    SUPPORTED,
    UnsupportedType,
    build_root_datum,
    inversion_set,
    longest_element,
    pairing_form,
    parse_group,
    weyl_enumerate,
)

ORDERS = {("A", 1): 2, ("A", 2): 6, ("A", 3): 24, ("B", 2): 8, ("C", 2): 8, ("G", 2): 12, ("D", 4): 192}
N_POS = {("A", 1): 1, ("A", 2): 3, ("A", 3): 6, ("B", 2): 4, ("C", 2): 4, ("G", 2): 6, ("D", 4): 12}


def matrix_group(datum):
    """Closure of the simple reflections as a set of matrices (independent of word bookkeeping)."""
    gens = [datum.reflection(i) for i in range(datum.rank)]
    seen = {np.eye(datum.rank, dtype=np.int64).tobytes()}
    frontier = [np.eye(datum.rank, dtype=np.int64)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                p = g @ m
                if p.tobytes() not in seen:
                    seen.add(p.tobytes())
                    nxt.append(p)
        frontier = nxt
    return seen


def test_a1():
    d = build_root_datum("A", 1)
    assert d.cartan_matrix == ((2,),)
    assert len(d.positive_coroots) == 1


def test_a2_coroots():
    d = build_root_datum("A", 2)
    assert set(d.positive_coroots) == {(1, 0), (0, 1), (1, 1)}


def test_g2():
    d = build_root_datum("G", 2)
    assert d.cartan_matrix == ((2, -1), (-3, 2))
    assert len(d.positive_coroots) == 6


@pytest.mark.parametrize("key", sorted(SUPPORTED))
def test_datum_invariants(key):
    d = build_root_datum(*key)
    assert all(d.cartan_matrix[i][i] == 2 for i in range(d.rank))
    assert len(d.positive_coroots) == N_POS[key]
    assert d.rho_coords == (1,) * d.rank


@pytest.mark.parametrize("key", sorted(SUPPORTED))
def test_weyl_order(key):
    d = build_root_datum(*key)
    ws = weyl_enumerate(d)
    assert len(ws) == ORDERS[key] == len(matrix_group(d))
    assert len({w.coroot_action for w in ws}) == len(ws)
    assert sum((-1) ** w.length for w in ws) == 0


@pytest.mark.parametrize("key", sorted(SUPPORTED))
def test_elements_permute_roots(key):
    d = build_root_datum(*key)
    roots = set(d.positive_coroots) | {tuple(-c for c in b) for b in d.positive_coroots}
    for w in weyl_enumerate(d):
        assert round(abs(np.linalg.det(w.matrix))) == 1
        assert {w.act(b) for b in roots} == roots
        # matrix is the product of the word's reflections
        m = np.eye(d.rank, dtype=np.int64)
        for i in w.word:
            m = m @ d.reflection(i)
        assert np.array_equal(m, w.matrix)
        assert len(inversion_set(d, w)) == w.length


def test_a2_lengths_bfs_order():
    ws = weyl_enumerate(build_root_datum("A", 2))
    assert [w.length for w in ws] == [0, 1, 1, 2, 2, 3]


def test_inversion_sets_a2():
    d = build_root_datum("A", 2)
    ws = weyl_enumerate(d)
    assert inversion_set(d, ws[0]) == []
    s1 = next(w for w in ws if w.word == (0,))
    assert [d.positive_coroots[k] for k in inversion_set(d, s1)] == [(1, 0)]
    assert len(inversion_set(d, longest_element(d))) == 3


def test_pairing_forms():
    a1 = build_root_datum("A", 1)
    f = pairing_form(a1, None, (1,), True)
    assert (f.coeffs, f.constant) == ((1,), -1)
    s = weyl_enumerate(a1)[1]
    f = pairing_form(a1, s, (1,), True)
    assert (f.coeffs, f.constant) == ((-1,), -1)
    a2 = build_root_datum("A", 2)
    f = pairing_form(a2, None, (1, 1), False)
    assert (f.coeffs, f.constant) == ((1, 1), 0)


@pytest.mark.parametrize("key", sorted(SUPPORTED))
def test_rho_constant_is_minus_height(key):
    d = build_root_datum(*key)
    for b in d.positive_coroots:
        assert pairing_form(d, None, b, True).constant == -sum(b)


@given(st.sampled_from(sorted(SUPPORTED)), st.data())
def test_pairing_is_adjoint(key, data):
    # <w lam, b> = <lam, w^-1 b>: evaluating the form at lam equals pairing the moved weight
    d = build_root_datum(*key)
    ws = weyl_enumerate(d)
    w = ws[data.draw(st.integers(0, len(ws) - 1))]
    b = d.positive_coroots[data.draw(st.integers(0, len(d.positive_coroots) - 1))]
    lam = data.draw(st.lists(st.integers(-5, 5), min_size=d.rank, max_size=d.rank))
    f = pairing_form(d, w, b, False)
    assert f.evaluate(lam) == int(np.dot(lam, w.inverse_matrix @ np.array(b)))


@pytest.mark.parametrize("spec", [
    {"type": "Z", "rank": 9},
    {"type": "A", "rank": 7},
    {"type": "E", "rank": 6},
    {"type": "A", "rank": 2, "parabolic_index": 2},
    {"rank": 2},
])
def test_unsupported(spec):
    with pytest.raises(UnsupportedType):
        parse_group(spec)


def test_parse_group_default_parabolic():
    d, p = parse_group({"type": "B", "rank": 2})
    assert d.name == "B2" and p == 1
