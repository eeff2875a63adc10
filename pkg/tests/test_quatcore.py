import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quatoric.quatcore import (FOUR_PI, InputError, TorusElement, exp_su2, is_primitive, lattice_embedding,
                               lie_matrix, log_su2, normalize_sign, orbit_map, orbit_section, qconj, qinv, qmul,
                               qnorm, regular_action, su2_matrix)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
quats = arrays(np.float64, (4,), elements=finite)

ONE = np.array([1.0, 0, 0, 0])
I = np.array([0, 1.0, 0, 0])
J = np.array([0, 0, 1.0, 0])
K = np.array([0, 0, 0, 1.0])


def test_multiplication_table():
    assert np.allclose(qmul(I, J), K)
    assert np.allclose(qmul(J, K), I)
    assert np.allclose(qmul(K, I), J)
    assert np.allclose(qmul(J, I), -K)
    for u in (I, J, K):
        assert np.allclose(qmul(u, u), -ONE)


@given(quats, quats, quats)
def test_associative_and_distributive(a, b, c):
    scale = 1 + np.abs(a).max() * np.abs(b).max() * np.abs(c).max()
    assert np.allclose(qmul(qmul(a, b), c), qmul(a, qmul(b, c)), atol=1e-9 * scale)
    assert np.allclose(qmul(a, b + c), qmul(a, b) + qmul(a, c), atol=1e-9 * scale)


@given(quats, quats)
def test_norm_is_multiplicative(a, b):
    assert abs(qnorm(qmul(a, b)) - qnorm(a) * qnorm(b)) <= 1e-12 * max(1.0, qnorm(a) * qnorm(b))


@given(quats)
def test_conjugate_times_q_is_norm_squared(q):
    out = qmul(qconj(q), q)
    assert np.allclose(out, [qnorm(q) ** 2, 0, 0, 0], atol=1e-12 * max(1.0, qnorm(q) ** 2))


def test_qinv():
    q = np.array([1.0, 2.0, -1.0, 0.5])
    assert np.allclose(qmul(q, qinv(q)), ONE)


def test_torus_element_rejects_non_units():
    with pytest.raises(InputError):
        TorusElement([[1.0, 1.0, 0, 0]])
    with pytest.raises(InputError):
        TorusElement([1.0, 0, 0, 0])


def test_torus_group_laws(rng):
    u, v = TorusElement.random(3, rng), TorusElement.random(3, rng)
    assert (u * u.inverse()).is_identity()
    assert (u * TorusElement.identity(3)).allclose(u)
    assert (u * v).inverse().allclose(v.inverse() * u.inverse())


def test_exp_examples():
    assert exp_su2([[0, 0, 4 * np.pi]]).allclose(TorusElement.identity(1), 1e-12)
    assert exp_su2([[0, 0, 0]]).allclose(TorusElement.identity(1), 0)
    # frozen from the power-series matrix exponential: exp(2 pi T_3) = -1
    assert np.allclose(exp_su2([[0, 0, 2 * np.pi]]).coords, [[-1, 0, 0, 0]], atol=1e-12)


def test_exp_matches_matrix_exponential(rng):
    for _ in range(20):
        alpha = rng.normal(size=3) * 3
        ref = scipy.linalg.expm(lie_matrix(alpha))
        assert np.allclose(su2_matrix(exp_su2([alpha]).coords[0]), ref, atol=1e-12)


def test_exp_is_homomorphism_on_commuting_elements(rng):
    a = rng.normal(size=(2, 3))
    t, s = 0.7, -1.3
    assert (exp_su2(t * a) * exp_su2(s * a)).allclose(exp_su2((t + s) * a), 1e-12)


def test_exp_rejects_bad_shape():
    with pytest.raises(InputError):
        exp_su2([[1.0, 2.0]])


@given(arrays(np.float64, (2, 3), elements=st.floats(-3, 3)))
def test_log_inverts_exp(alpha):
    u = exp_su2(alpha)
    assert exp_su2(log_su2(u)).allclose(u, 1e-9)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4))
def test_lattice_is_exponential_kernel(k):
    alpha = lattice_embedding(k)
    assert np.allclose(alpha[:, 2], FOUR_PI * np.array(k))
    assert exp_su2(alpha).allclose(TorusElement.identity(len(k)), 1e-10)


def test_primitive_and_sign():
    assert is_primitive((1, 2))
    assert not is_primitive((2, 4))
    assert not is_primitive((0, 0))
    assert normalize_sign((0, -1, 2)) == (0, 1, -2)
    assert normalize_sign((3, -1)) == (3, -1)


def test_regular_action_examples():
    one = TorusElement.identity(1)
    assert np.allclose(regular_action(one, [J]), [J])
    assert np.allclose(regular_action(TorusElement([I]), [J]), [K])
    s = TorusElement([I, J])
    assert np.allclose(regular_action(s, [ONE, ONE]), [I, J])
    with pytest.raises(InputError):
        regular_action(s, [ONE])


def test_orbit_map_examples(rng):
    assert np.allclose(orbit_map(np.zeros((2, 4))), 0)
    assert np.allclose(orbit_map([I]), [1])
    assert np.allclose(orbit_map(orbit_section([2.0, 3.0])), [2, 3])
    h = rng.normal(size=(3, 4))
    g = TorusElement.random(3, rng)
    assert np.allclose(orbit_map(regular_action(g, h)), orbit_map(h))
    with pytest.raises(InputError):
        orbit_section([-1.0])


@settings(max_examples=30)
@given(arrays(np.float64, (3, 4), elements=st.floats(-2, 2)))
def test_torus_json_round_trip(c):
    norms = np.linalg.norm(c, axis=1)
    if np.any(norms < 1e-3):
        return
    u = TorusElement(c / norms[:, None], tol=1e-6)
    assert TorusElement.from_json(u.to_json()) == u
