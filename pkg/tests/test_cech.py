import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatoric import builders as B
from quatoric.autgroup import SignedPermAut, enumerate_aut
from quatoric.cech import (AutCocycle, BaseIsomorphism, Cochain0, TorusCocycle, check_cocycle, coboundary_aut,
                           coboundary_aut_bruteforce, coboundary_torus, cohomologous, delta_aut, delta_torus,
                           gauge_act, gauge_residual, loop_holonomy_aut, loop_holonomy_torus, pullback_cocycle)
from quatoric.quatcore import InputError, ResourceLimitError, TorusElement, qmul

J = np.array([0.0, 0.0, 1.0, 0.0])
TRIANGLE = B.interior_graph(2, ["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")], [("a", "b", "c")])


def _aut(perm, signs):
    return SignedPermAut(tuple(perm), tuple(signs))


def _triangle_cocycle(g, h, gh):
    vals = {("a", "b"): g, ("b", "c"): h, ("a", "c"): gh}
    vals.update({(s, a): v.inverse() for (a, s), v in list(vals.items())})
    return AutCocycle(vals)


def test_aut_cocycle_examples():
    g, h = _aut((1, 0), (1, -1)), _aut((0, 1), (-1, 1))
    assert check_cocycle(AutCocycle.trivial(TRIANGLE), TRIANGLE).ok
    assert check_cocycle(_triangle_cocycle(g, h, g @ h), TRIANGLE).ok
    rep = check_cocycle(_triangle_cocycle(g, h, g), TRIANGLE)
    assert not rep.ok and rep.failing_triples == [["a", "b", "c"]]


def test_asymmetric_aut_values_reported():
    g = _aut((1, 0), (1, -1))
    c = AutCocycle({("a", "b"): g, ("b", "a"): g, ("b", "c"): g, ("c", "b"): g.inverse(),
                    ("a", "c"): g, ("c", "a"): g.inverse()})
    assert any("reverse value" in v for v in check_cocycle(c, TRIANGLE).violations)


def test_missing_edge_is_an_input_error():
    with pytest.raises(InputError):
        check_cocycle(AutCocycle({}), TRIANGLE)


def test_trivial_aut_cocycle_is_a_coboundary_of_identities():
    g = coboundary_aut(AutCocycle.trivial(B.square()), B.square())
    assert all(v.is_identity() for v in g.values.values())


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=40)
def test_delta_of_random_cochain_is_recovered(seed):
    rng = np.random.default_rng(seed)
    b = B.square()
    g = B.random_aut_cochain(b, rng)
    c = delta_aut(g, b)
    found = coboundary_aut(c, b)
    assert found is not None
    assert delta_aut(found, b).values == c.values
    # agreement up to one global right multiplication on the connected nerve
    shift = found[b.chart_ids[0]].inverse() @ g[b.chart_ids[0]]
    assert all(found[cid] @ shift == g[cid] for cid in b.chart_ids)


def test_cycle_with_holonomy_is_not_a_coboundary():
    b = B.cycle3(2)
    g = _aut((1, 0), (1, 1))
    vals = dict(AutCocycle.trivial(b).values)
    vals[("b", "a")], vals[("a", "b")] = g, g.inverse()
    c = AutCocycle(vals)
    assert check_cocycle(c, b).ok
    assert coboundary_aut(c, b) is None
    assert coboundary_aut_bruteforce(c, b) is None
    # independent exhaustive search over all |Aut(Q^2)|^3 cochains
    group = enumerate_aut(2)
    assert not any(all(dict(zip("abc", combo))[x] @ dict(zip("abc", combo))[y].inverse() == c[(x, y)]
                       for x, y in b.edges()) for combo in itertools.product(group, repeat=3))
    hol = loop_holonomy_aut(c, b)
    assert sum(not v.is_identity() for v in hol.values()) == 2


def test_obstructed_base_fixture_holonomy():
    b = B.cycle3_flipped(2)
    c = AutCocycle.from_base(b)
    assert coboundary_aut(c, b) is None
    assert coboundary_aut_bruteforce(c, b) is None


def test_bruteforce_respects_cap():
    b = B.cycle3(2)
    with pytest.raises(ResourceLimitError):
        coboundary_aut_bruteforce(AutCocycle.trivial(b), b, max_search=100)


def test_aut_cohomologous():
    b = B.cycle3(2)
    rng = np.random.default_rng(7)
    c = B.random_aut_cocycle(b, rng, perturb=1.0)
    g = B.random_aut_cochain(b, rng)
    conj = AutCocycle({(a, s): g[a] @ v @ g[s].inverse() for (a, s), v in c.values.items()})
    assert cohomologous(c, conj, b)
    assert cohomologous(c, c, b)


def test_trivial_torus_cocycle_gauge_is_identity():
    b = B.square()
    theta = coboundary_torus(TorusCocycle.trivial(b), b, AutCocycle.from_base(b))
    assert all(v.is_identity() for v in theta.values.values())


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_twisted_coboundaries_recovered(seed):
    rng = np.random.default_rng(seed)
    b = B.square()
    twist = AutCocycle.from_base(b)
    theta = Cochain0({cid: TorusElement.random(2, rng) for cid in b.chart_ids})
    c = delta_torus(theta, b, twist)
    assert check_cocycle(c, b, twist).ok
    found = coboundary_torus(c, b, twist)
    assert found is not None
    assert gauge_residual(c, TorusCocycle.trivial(b), b, twist, found) < 1e-9


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10, deadline=None)
def test_twisted_cycle_coboundaries_recovered(seed):
    rng = np.random.default_rng(seed)
    b = B.cycle3_flipped(2)
    twist = AutCocycle.from_base(b)
    theta = Cochain0({cid: TorusElement.random(2, rng) for cid in b.chart_ids})
    assert coboundary_torus(delta_torus(theta, b, twist), b, twist) is not None


def _twisted_loop_invariant(c: TorusCocycle, twist: AutCocycle) -> float:
    """Re(h j) in the flipped factor, where h is the twisted loop product a <- b <- c <- a.

    Under a gauge change h -> x h R(x)^-1 with R the Weyl flip q -> j q j^-1, so
    h j -> x (h j) x^-1 and the real part of h j is invariant.  Coboundaries have it 0.
    """
    h = c[("a", "b")] * twist[("a", "b")].act_torus(c[("b", "c")]) * \
        (twist[("a", "b")] @ twist[("b", "c")]).act_torus(c[("c", "a")])
    return float(qmul(h.coords[0], J)[0])


def test_twisted_holonomy_invariant_matches_decision():
    b = B.cycle3_flipped(2)
    twist = AutCocycle.from_base(b)
    rng = np.random.default_rng(11)
    theta = Cochain0({cid: TorusElement.random(2, rng) for cid in b.chart_ids})
    assert abs(_twisted_loop_invariant(delta_torus(theta, b, twist), twist)) < 1e-12
    obstructed = 0
    for _ in range(5):
        c = B.random_torus_cocycle(b, twist, rng, perturb=1.0)
        inv = _twisted_loop_invariant(c, twist)
        assert abs(inv) > 1e-6
        assert coboundary_torus(c, b, twist) is None
        obstructed += 1
    assert obstructed == 5


def test_minus_one_holonomy_is_obstructed():
    b = B.cycle3(2)
    c = B.holonomy_cocycle(b, ("b", "a"), B.minus_one(2))
    assert check_cocycle(c, b).ok
    assert coboundary_torus(c, b) is None
    hol = loop_holonomy_torus(c, b)
    assert any(not v.is_identity() for v in hol.values())
    assert not cohomologous(TorusCocycle.trivial(b), c, b)


def test_torus_cohomologous_under_gauge(rng):
    b = B.cycle3(2)
    c = B.random_torus_cocycle(b, None, rng, perturb=1.0)
    eta = Cochain0({cid: TorusElement.random(2, rng) for cid in b.chart_ids})
    moved = gauge_act(eta, c, b)
    assert cohomologous(c, c, b)
    assert cohomologous(c, moved, b)
    assert cohomologous(moved, c, b)


def test_nonabelian_holonomy_conjugates_are_matched(rng):
    b = B.cycle3(2)
    h = TorusElement.random(2, rng)
    x = TorusElement.random(2, rng)
    c1 = B.holonomy_cocycle(b, ("b", "a"), h)
    c2 = B.holonomy_cocycle(b, ("c", "b"), x * h * x.inverse())
    assert cohomologous(c1, c2, b)
    assert not cohomologous(c1, B.holonomy_cocycle(b, ("b", "a"), h * h), b)


def test_torus_symmetry_completion_from_json():
    b = B.square()
    twist = AutCocycle.from_base(b)
    rng = np.random.default_rng(5)
    c = B.random_torus_cocycle(b, twist, rng)
    data = c.to_json()
    half = {"edges": [e for e in data["edges"] if e["from"] < e["to"]]}
    again = TorusCocycle.from_json(half, twist=twist)
    assert all(again[e].allclose(c[e], 1e-12) for e in b.edges())


def test_pullback_identity_and_relabel():
    b = B.cycle3(2)
    rng = np.random.default_rng(3)
    c = B.random_torus_cocycle(b, None, rng, perturb=1.0)
    ident = BaseIsomorphism({x: x for x in "abc"}, {x: SignedPermAut.identity(2) for x in "abc"})
    pulled = pullback_cocycle(c, ident, b, b)
    assert all(pulled[e] == c[e] for e in b.edges())
    names = {"a": "b", "b": "c", "c": "a"}
    renamed = TorusCocycle({(names[x], names[y]): v for (x, y), v in c.values.items()})
    f = BaseIsomorphism(names, {x: SignedPermAut.identity(2) for x in "abc"})
    back = pullback_cocycle(renamed, f, b, b)
    assert all(back[e] == c[e] for e in b.edges())


def test_pullback_by_constant_conjugator_intertwines_rho():
    b = B.square()
    rho2 = AutCocycle.from_base(b)
    g = _aut((1, 0), (-1, 1))
    f = BaseIsomorphism({x: x for x in b.chart_ids}, {x: g for x in b.chart_ids})
    rho1 = pullback_cocycle(rho2, f, b, b)
    assert check_cocycle(rho1, b).ok
    # rho^f o rho^{M1} = rho^{M2} o rho^f on every edge
    assert all(rho1[e] == g @ rho2[e] @ g.inverse() for e in b.edges())
    assert all(g.inverse() @ rho1[e] == rho2[e] @ g.inverse() for e in b.edges())
    # torus cocycles transform compatibly: the pullback is a twisted cocycle for rho1
    c = B.random_torus_cocycle(b, rho2, np.random.default_rng(1))
    assert check_cocycle(pullback_cocycle(c, f, b, b), b, rho1).ok


def test_pullback_rejects_non_bijections():
    b = B.cycle3(2)
    f = BaseIsomorphism({"a": "a", "b": "a", "c": "c"}, {x: SignedPermAut.identity(2) for x in "abc"})
    with pytest.raises(InputError):
        pullback_cocycle(TorusCocycle.trivial(b), f, b)


def test_base_isomorphism_inverse():
    g = _aut((1, 0), (-1, 1))
    f = BaseIsomorphism({"a": "b", "b": "a"}, {"a": g, "b": SignedPermAut.identity(2)})
    inv = f.inverse()
    assert inv.chart_map == {"b": "a", "a": "b"}
    assert inv.conjugators["b"] == g.inverse()
