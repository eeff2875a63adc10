import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quatoric import builders as B
from quatoric.autgroup import SignedPermAut, enumerate_aut
from quatoric.cech import Cochain0, TorusCocycle, delta_torus, gauge_act, gauge_residual, pullback_cocycle
from quatoric.charpair import CharacteristicPair
from quatoric.euler import (ActionData, canonical_action, classify, euler_vanishes, extract, realize,
                            validate_action)
from quatoric.quatcore import InputError, TorusElement

from conftest import FIXTURES


def _fixture(name) -> ActionData:
    return ActionData.from_json(json.loads((FIXTURES / name).read_text()))


def _random_gauge(b, rng):
    return Cochain0({cid: TorusElement.random(b.n, rng) for cid in b.chart_ids})


def test_fixtures_are_valid_actions():
    for name in ("cycle3_euler_trivial.json", "cycle3_euler_minus.json", "cycle3_euler_coboundary.json",
                 "square_euler_coboundary.json", "cycle3_flipped_euler_random.json"):
        assert validate_action(_fixture(name)).ok, name


def test_invalid_euler_reported():
    a = _fixture("square_euler_coboundary.json")
    vals = dict(a.euler.values)
    vals[("c10", "c00")] = TorusElement.random(2, np.random.default_rng(0))
    rep = validate_action(ActionData(a.pair, TorusCocycle(vals)))
    assert not rep.ok


def test_euler_vanishes_examples(rng):
    ok, theta = euler_vanishes(canonical_action(B.square_pair()))
    assert ok and all(v.is_identity() for v in theta.values.values())
    p = B.square_pair()
    e = delta_torus(_random_gauge(p.base, rng), p.base, p.rho)
    ok, theta = euler_vanishes(ActionData(p, e))
    assert ok
    assert gauge_residual(e, TorusCocycle.trivial(p.base), p.base, p.rho, theta) < 1e-9
    ok, theta = euler_vanishes(_fixture("cycle3_euler_minus.json"))
    assert not ok and theta is None


def test_classify_self_gives_identity_witness():
    a = _fixture("square_euler_coboundary.json")
    w = classify(a, a)
    assert w is not None
    assert w.iso.chart_map == {c: c for c in a.base.chart_ids}
    assert all(g.is_identity() for g in w.iso.conjugators.values())


def test_classify_coboundary_related(rng):
    a = _fixture("cycle3_flipped_euler_random.json")
    moved = gauge_act(_random_gauge(a.base, rng), a.euler, a.base, a.pair.rho)
    w = classify(a, ActionData(a.pair, moved))
    assert w is not None
    pulled = pullback_cocycle(moved, w.iso, a.base, a.base)
    assert gauge_residual(a.euler, pulled, a.base, a.pair.rho, w.gauge) < 1e-8


def test_classify_distinguishes_holonomy():
    assert classify(_fixture("cycle3_euler_trivial.json"), _fixture("cycle3_euler_minus.json")) is None
    assert classify(_fixture("cycle3_euler_minus.json"), _fixture("cycle3_euler_trivial.json")) is None


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=10, deadline=None)
def test_classify_finds_relabelled_actions(seed):
    rng = np.random.default_rng(seed)
    p = B.square_pair(skew=bool(seed % 2))
    a = ActionData(p, B.random_torus_cocycle(p.base, p.rho, rng))
    ids = list(p.base.chart_ids)
    names = dict(zip(ids, [f"x{i}" for i in rng.permutation(len(ids))]))
    group = enumerate_aut(2)
    g = {c: group[int(rng.integers(8))] for c in ids}
    b = B.relabel_action(a, names, g)
    assert validate_action(b).ok
    w = classify(a, b)
    assert w is not None
    assert classify(b, a) is not None


def test_realize_single_chart_is_the_canonical_model():
    p = CharacteristicPair.standard(B.single_chart(2))
    model = realize(p, TorusCocycle.trivial(p.base))
    assert len(model["charts"]) == 1 and model["gluings"] == []
    assert model["charts"][0]["isotropy"] == [{"face": 1, "vector": [1, 0]}, {"face": 2, "vector": [0, 1]}]
    assert model["globalizable"] and model["section"]


def test_realize_extract_is_exact(rng):
    for p in (B.simplex2_pair(), B.square_pair(skew=True), CharacteristicPair.standard(B.cycle3_flipped(2))):
        e = B.random_torus_cocycle(p.base, p.rho, rng)
        model = json.loads(json.dumps(realize(p, e)))
        back = extract(model)
        assert back.to_json() == ActionData(p, e).to_json()
        assert all(back.euler[k] == e[k] for k in p.base.edges())


def test_simplex_globalizes():
    p = B.simplex2_pair()
    model = realize(p, TorusCocycle.trivial(p.base))
    assert model["globalizable"] is True and model["section"] is True
    flipped = CharacteristicPair.standard(B.cycle3_flipped(2))
    assert realize(flipped, TorusCocycle.trivial(flipped.base))["globalizable"] is False


def test_realize_rejects_invalid_input():
    sq = B.square_pair()
    ell = dict(sq.ell)
    ell[("c00", 0)], ell[("c00", 1)] = (1, 1), (1, -1)
    ell[("c01", 0)], ell[("c10", 1)] = (1, -1), (1, 1)
    with pytest.raises(InputError):
        realize(CharacteristicPair(sq.base, ell), TorusCocycle.trivial(sq.base))
    vals = dict(TorusCocycle.trivial(sq.base).values)
    vals[("c10", "c00")] = B.minus_one(2)
    with pytest.raises(InputError):
        realize(sq, TorusCocycle(vals))


def test_extract_rejects_malformed_model():
    with pytest.raises(InputError):
        extract({"n": 2, "charts": [{"id": "U"}], "gluings": []})
