import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quatoric.autgroup import SignedPermAut, enumerate_aut, group_order
from quatoric.quatcore import InputError, ResourceLimitError, TorusElement, exp_su2, qmul


@st.composite
def auts(draw, n=None):
    n = draw(st.integers(1, 4)) if n is None else n
    perm = draw(st.permutations(range(n)))
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n))
    return SignedPermAut(tuple(perm), tuple(signs))


@st.composite
def aut_pairs(draw):
    n = draw(st.integers(1, 4))
    return draw(auts(n)), draw(auts(n))


def _torus(rng_seed: int, n: int) -> TorusElement:
    return TorusElement.random(n, np.random.default_rng(rng_seed))


def test_construction_validates():
    with pytest.raises(InputError):
        SignedPermAut((0, 0), (1, 1))
    with pytest.raises(InputError):
        SignedPermAut((0, 1), (1, 2))


def test_enumeration_counts_and_order():
    assert [len(enumerate_aut(n)) for n in (1, 2, 3)] == [2, 8, 48]
    assert all(len(enumerate_aut(n)) == group_order(n) for n in range(5))
    g = enumerate_aut(2)
    assert g[0].is_identity()
    assert g[1] == SignedPermAut((0, 1), (1, -1))
    assert g[4].perm == (1, 0)
    assert len(set(g)) == 8
    with pytest.raises(ResourceLimitError):
        enumerate_aut(7)


def test_compose_matches_matrix_product():
    a = SignedPermAut((1, 0), (1, -1))
    assert (a @ a).matrix().tolist() == (a.matrix() @ a.matrix()).tolist()
    # frozen: the square of swap(1,2) with signs (+,-) is -identity
    assert a @ a == SignedPermAut((0, 1), (-1, -1))
    assert SignedPermAut.identity(2) @ a == a


@given(aut_pairs())
def test_compose_is_matrix_product(pair):
    a, b = pair
    assert np.array_equal((a @ b).matrix(), a.matrix() @ b.matrix())


@given(auts())
def test_inverse_and_inv_transpose(a):
    assert (a @ a.inverse()).is_identity()
    assert np.array_equal(a.inverse().matrix(), np.round(np.linalg.inv(a.matrix())))
    assert a.inv_transpose() == a
    assert np.array_equal(a.inv_transpose().matrix(), np.linalg.inv(a.matrix()).T)


def test_inverse_of_swap():
    s = SignedPermAut((1, 0), (1, 1))
    assert s.inverse() == s


def test_act_lattice_examples():
    a = SignedPermAut((1, 0), (1, -1))
    assert SignedPermAut.identity(2).act_lattice((1, 2)) == (1, 2)
    assert a.act_lattice((1, 2)) == (2, -1)
    assert tuple(a.matrix().astype(int) @ np.array([1, 2])) == (2, -1)


@given(auts(), st.data())
def test_act_lattice_is_an_action(a, data):
    v = tuple(data.draw(st.lists(st.integers(-9, 9), min_size=a.n, max_size=a.n)))
    assert a.act_lattice(a.inverse().act_lattice(v)) == v
    assert a.act_lattice(v) == tuple(int(x) for x in a.matrix() @ np.array(v))


def test_sign_flip_inverts_the_circle():
    flip = SignedPermAut((0,), (-1,))
    for theta in (0.3, 1.7, -2.2):
        assert flip.act_torus(exp_su2([[0, 0, theta]])).allclose(exp_su2([[0, 0, -theta]]), 1e-12)
        assert flip.act_torus_reflect(exp_su2([[0, 0, theta]])).allclose(exp_su2([[0, 0, -theta]]), 1e-12)


@given(aut_pairs(), st.integers(0, 2 ** 32 - 1))
def test_act_torus_is_multiplicative_and_an_action(pair, seed):
    a, b = pair
    u, v = _torus(seed, a.n), _torus(seed + 1, a.n)
    assert a.act_torus(u * v).allclose(a.act_torus(u) * a.act_torus(v), 1e-12)
    assert a.act_torus(b.act_torus(u)).allclose((a @ b).act_torus(u), 1e-12)
    assert SignedPermAut.identity(a.n).act_torus(u) == u


@given(auts(), st.integers(0, 2 ** 32 - 1))
def test_act_lie_is_the_differential(a, seed):
    alpha = np.random.default_rng(seed).normal(size=(a.n, 3))
    assert a.act_torus(exp_su2(alpha)).allclose(exp_su2(a.act_lie(alpha)), 1e-12)
    assert a.act_torus_reflect(exp_su2(alpha)).allclose(exp_su2(a.act_lie_reflect(alpha)), 1e-12)


def test_reflect_action_conjugates_flipped_factors(rng):
    u = TorusElement.random(2, rng)
    a = SignedPermAut((0, 1), (1, -1))
    out = a.act_torus_reflect(u).coords
    assert np.allclose(out[0], u.coords[0])
    assert np.allclose(out[1], u.coords[1] * [1, -1, -1, -1])
    # conjugation reverses products: it is an anti-automorphism of the factor
    v = TorusElement.random(2, rng)
    lhs = a.act_torus_reflect(u * v).coords[1]
    assert np.allclose(lhs, qmul(a.act_torus_reflect(v).coords[1], a.act_torus_reflect(u).coords[1]))


@given(auts())
def test_json_round_trip(a):
    assert SignedPermAut.from_json(a.to_json()) == a
    assert SignedPermAut.from_matrix(a.matrix()) == a


def test_from_matrix_rejects_non_signed_permutations():
    with pytest.raises(InputError):
        SignedPermAut.from_matrix([[1, 1], [0, 1]])
