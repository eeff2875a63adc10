import json

import numpy as np
import pytest

from quatoric import builders as B
from quatoric.autgroup import SignedPermAut, enumerate_aut
from quatoric.basecomplex import (BaseComplex, Chart, Overlap, affine_compatibility, signed_perm_candidates,
                                  strata, validate_base)
from quatoric.quatcore import FOUR_PI, InputError


def _round_trip(b: BaseComplex) -> BaseComplex:
    return BaseComplex.from_json(json.loads(json.dumps(b.to_json())))


def test_single_chart_and_identity_gluing_are_valid():
    assert validate_base(B.single_chart(2)).ok
    assert validate_base(B.two_charts(3)).ok


def test_json_round_trip_preserves_everything():
    for b in (B.simplex2(), B.square(), B.cycle3_flipped()):
        again = _round_trip(b)
        assert again.to_json() == b.to_json()
        assert validate_base(again).ok


def test_reverse_edges_are_completed_on_load():
    data = B.shear_pair_base().to_json()
    data["overlaps"] = [o for o in data["overlaps"] if o["from"] == "U"]
    b = BaseComplex.from_json(data)
    assert b.overlap("U", "V").A == ((1, -1), (0, 1))
    assert validate_base(b).ok


def test_inconsistent_triangle_names_the_triple():
    b = B.simplex2()
    ovs = [o for o in b.overlaps if {o.src, o.dst} != {"v0", "v2"}]
    bad = Overlap("v0", "v2", ((1, 0), (0, 1)), (0.0, 0.0), SignedPermAut.identity(2))
    b2 = BaseComplex(2, b.charts, tuple(ovs) + (bad, bad.inverse()), b.triples)
    rep = validate_base(b2)
    assert not rep.ok
    assert any("triple ['v0', 'v1', 'v2']" in v for v in rep.violations)


def test_determinant_and_reverse_checks():
    n = 2
    charts = (Chart("U", ((1.0, 2.0),) * 2, ()), Chart("V", ((1.0, 2.0),) * 2, ()))
    A = ((2, 0), (0, 1))
    ov = Overlap("U", "V", A, (0.0, 0.0), SignedPermAut.identity(n))
    back = Overlap("V", "U", ((1, 0), (0, 1)), (0.0, 0.0), SignedPermAut.identity(n))
    rep = validate_base(BaseComplex(n, charts, (ov, back)))
    assert any("determinant 2" in v for v in rep.violations)
    assert any("reverse linear part" in v for v in rep.violations)


def test_strict_mode_requires_lattice_translations():
    b = B.two_charts(2)
    assert validate_base(b, strict=True).ok
    assert not validate_base(B.square(), strict=True).ok
    ov = Overlap("U", "V", ((1, 0), (0, 1)), (FOUR_PI, 0.0), SignedPermAut.identity(2))
    shifted = BaseComplex(2, b.charts, (ov, ov.inverse()))
    assert validate_base(shifted, strict=True).ok


def test_box_face_checks():
    wrong = Chart.from_json({"id": "U", "box": [[0, 1], [0.5, 1]], "vanishing": [2]})
    assert not validate_base(BaseComplex(2, (wrong,), ())).ok
    ch = Chart.from_json({"id": "U", "box": [[0, 1], [0.5, 1]]})
    assert ch.vanishing == (0,)
    b = BaseComplex(2, (Chart("U", ((0.0, 1.0), (0.0, 1.0)), (0,)),), ())
    assert not validate_base(b).ok


def test_strata_of_a_square_chart():
    b = B.single_chart(2)
    assert strata(b, 1) == [[("U", (0,))], [("U", (1,))]]
    assert strata(b, 2) == [[("U", (0, 1))]]
    assert len(strata(b, 0)) == 1
    partial = BaseComplex(2, (Chart("U", ((0.0, 1.0), (0.5, 1.0)), (0,)),), ())
    assert strata(partial, 1) == [[("U", (0,))]]
    with pytest.raises(InputError):
        strata(b, 3)


def test_simplex_strata():
    b = B.simplex2()
    s1, s2 = strata(b, 1), strata(b, 2)
    assert len(s1) == 3 and len(s2) == 3
    assert all(len(c) == 2 for c in s1)
    assert len(strata(b, 0)) == 1
    # frozen from the union-find over face gluings: each edge of the triangle joins two vertex charts
    assert [("v1", (0,)), ("v2", (1,))] in s1


def test_square_strata_and_components():
    b = B.square()
    assert [len(strata(b, k)) for k in range(3)] == [1, 4, 4]
    assert b.components() == [list(b.chart_ids)]
    disjoint = B.interior_graph(1, ["a", "b", "c"], [("a", "b")])
    assert len(disjoint.components()) == 2
    assert len(strata(disjoint, 0)) == 2


def test_face_map_direction():
    b = B.simplex2()
    # chart v1 sees the edge v1v2 as its face 1, chart v2 as its face 2
    assert b.face_map("v2", "v1") == {0: 1}
    assert b.face_map("v1", "v2") == {1: 0}


def test_affine_compatibility_examples():
    assert affine_compatibility(B.two_charts(2)).ok
    swap = SignedPermAut((1, 0), (1, -1))
    assert affine_compatibility(B.two_charts(2, swap)).ok
    assert affine_compatibility(B.square()).ok
    rep = affine_compatibility(B.shear_pair_base())
    assert not rep.ok and "U->V" in rep.violations[0]


def test_shear_matches_no_automorphism():
    shear = np.array([[1, 1], [0, 1]])
    assert signed_perm_candidates(shear) == []
    assert all(not np.array_equal(np.linalg.inv(g.matrix()).T, shear) for g in enumerate_aut(2))
    swap = SignedPermAut((1, 0), (1, -1))
    assert signed_perm_candidates(swap.matrix().astype(int)) == [swap]


def test_overlap_requires_integer_matrix():
    data = {"from": "U", "to": "V", "A": [[1.5, 0], [0, 1]], "c": [0, 0]}
    with pytest.raises(InputError):
        Overlap.from_json(data, 2)


def test_region_corners_checked():
    b = B.two_charts(2)
    ov = b.overlap("V", "U")
    inside = Overlap(ov.src, ov.dst, ov.A, ov.c, ov.rho, region=((1.2, 1.8), (1.2, 1.8)))
    outside = Overlap(ov.src, ov.dst, ov.A, ov.c, ov.rho, region=((1.2, 2.5), (1.2, 1.8)))
    ok = BaseComplex(2, b.charts, (inside, inside.inverse()))
    bad = BaseComplex(2, b.charts, (outside, inside.inverse()))
    assert validate_base(ok).ok
    assert any("region corner" in v for v in validate_base(bad).violations)


def test_overlap_apply_and_inverse(rng):
    ov = B.square().overlap("c11", "c00")
    xi = rng.random(2)
    assert np.allclose(ov.inverse().apply(ov.apply(xi)), xi)
    assert np.allclose(ov.apply([0.0, 0.0]), [2.0, 2.0])
