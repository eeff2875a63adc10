"""Regenerate the JSON fixture corpus and its manifest of expected CLI exit codes.

Usage: python3 scripts/make_fixtures.py [output_dir]
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from quatoric import builders as B
from quatoric.autgroup import SignedPermAut
from quatoric.cech import AutCocycle, Cochain0, TorusCocycle, delta_torus
from quatoric.charpair import CharacteristicPair
from quatoric.delzant import LagrangianCocycle
from quatoric.euler import ActionData
from quatoric.jsonio import write_json
from quatoric.quatcore import TorusElement
from quatoric.tetra import SectionMap

SEED = 20240501


def _action(pair: CharacteristicPair, euler: TorusCocycle) -> dict:
    return ActionData(pair, euler).to_json()


def _delzant(b, lam: LagrangianCocycle) -> dict:
    out = b.to_json()
    out["lambda"] = lam.to_json()
    return out


def _coboundary(b, twist, rng) -> TorusCocycle:
    theta = Cochain0({cid: TorusElement.random(b.n, rng) for cid in b.chart_ids})
    return delta_torus(theta, b, twist)


def build(out: Path) -> list[dict]:
    rng = np.random.default_rng(SEED)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, object] = {}

    # bases and characteristic pairs
    files["simplex.json"] = B.simplex2_pair().to_json()
    files["square.json"] = B.square_pair().to_json()
    files["square_skew.json"] = B.square_pair(skew=True).to_json()
    sq = B.square_pair()
    ell = dict(sq.ell)
    ell[("c00", 0)], ell[("c00", 1)] = (1, 1), (1, -1)
    ell[("c01", 0)], ell[("c10", 1)] = (1, -1), (1, 1)
    files["square_nonunimodular.json"] = CharacteristicPair(sq.base, ell).to_json()
    files["single_chart.json"] = CharacteristicPair.standard(B.single_chart(2)).to_json()
    files["two_charts.json"] = B.two_charts(2, SignedPermAut((1, 0), (-1, 1))).to_json()
    files["cycle3.json"] = B.cycle3(2).to_json()
    files["cycle3_obstructed.json"] = B.cycle3_flipped(2).to_json()
    files["shear_incompatible.json"] = B.shear_pair_base().to_json()

    # Euler data
    c3 = CharacteristicPair.standard(B.cycle3(2))
    files["cycle3_euler_trivial.json"] = _action(c3, TorusCocycle.trivial(c3.base))
    files["cycle3_euler_minus.json"] = _action(c3, B.holonomy_cocycle(c3.base, ("b", "a"), B.minus_one(2)))
    files["cycle3_euler_coboundary.json"] = _action(c3, _coboundary(c3.base, None, rng))
    files["square_euler_coboundary.json"] = _action(sq, _coboundary(sq.base, sq.rho, rng))
    c3f = CharacteristicPair.standard(B.cycle3_flipped(2))
    files["cycle3_flipped_euler_random.json"] = _action(c3f, B.random_torus_cocycle(c3f.base, c3f.rho, rng, 1.0))

    # forms, sections and fibre maps
    files["psi_H2.json"] = {"degree": 4, "dim": 8, "field": "builtin:psi_H"}
    files["psi_RQ1.json"] = {"degree": 4, "dim": 5, "field": "builtin:psi_RQ"}
    files["degenerate4.json"] = {"degree": 4, "dim": 8, "terms": [{"idx": [1, 2, 3, 4], "coef": 1.0}]}
    files["section_constant4.json"] = {"section": SectionMap.constant(TorusElement.random(4, rng)).to_json(),
                                       "range": [0.1, 1.0]}
    files["section_nonlagrangian4.json"] = {"section": B.nonlagrangian_section().to_json(), "range": [0.1, 1.0]}
    files["section_separable2.json"] = {"section": B.random_separable_section(2, rng).to_json(), "range": [0.1, 1.0]}
    swap = SignedPermAut((1, 0), (1, -1))
    fsec = SectionMap.constant(TorusElement.random(2, rng)).to_json()
    files["fibermap2.json"] = {"n": 2, "A": swap.matrix().astype(int).tolist(), "c": [0.5, -0.25],
                               "fiber_aut": swap.to_json(), "section": fsec}
    # base part rotated the other way: the fibre automorphism no longer matches A
    files["fibermap2_mismatch.json"] = {"n": 2, "A": (-swap.matrix()).astype(int).tolist(), "c": [0.5, -0.25],
                                        "fiber_aut": swap.to_json(), "section": fsec}

    # Delzant-type data
    single = B.single_chart(2)
    files["delzant_single.json"] = _delzant(single, LagrangianCocycle.trivial(single))
    cyc = B.cycle3(4)
    files["delzant_cycle3_trivial.json"] = _delzant(cyc, LagrangianCocycle.trivial(cyc))
    files["delzant_cycle3_minus.json"] = _delzant(
        cyc, LagrangianCocycle.from_torus(B.holonomy_cocycle(cyc, ("b", "a"), B.minus_one(4))))
    files["delzant_cycle3_coboundary.json"] = _delzant(cyc, LagrangianCocycle.from_torus(_coboundary(cyc, None, rng)))
    sqb = B.square()
    files["delzant_square.json"] = _delzant(
        sqb, LagrangianCocycle.from_torus(_coboundary(sqb, AutCocycle.from_base(sqb), rng)))
    two4 = B.two_charts(4)
    nl = B.nonlagrangian_section()
    files["delzant_nonlagrangian4.json"] = _delzant(
        two4, LagrangianCocycle({("V", "U"): nl, ("U", "V"): B.negated_section(nl)}))
    shear = B.shear_pair_base()
    files["delzant_shear.json"] = _delzant(shear, LagrangianCocycle.trivial(shear))

    for name, data in files.items():
        write_json(out / name, data)
    (out / "malformed.json").write_text('{"n": 2, "charts": [\n  {"id": "U", "box": [[0, 1], [0, 1]]\n')

    def f(name):
        return f"fixtures/{name}"

    manifest = [
        {"args": ["validate", f("simplex.json")], "exit": 0},
        {"args": ["validate", f("square.json")], "exit": 0},
        {"args": ["validate", f("cycle3_obstructed.json")], "exit": 0},
        {"args": ["validate", f("shear_incompatible.json")], "exit": 0},
        {"args": ["validate", "--strict", f("square.json")], "exit": 1},
        {"args": ["validate", f("malformed.json")], "exit": 2},
        {"args": ["validate", f("does_not_exist.json")], "exit": 2},
        {"args": ["charpair", "check", f("simplex.json")], "exit": 0},
        {"args": ["charpair", "check", f("square_skew.json")], "exit": 0},
        {"args": ["charpair", "check", f("square_nonunimodular.json")], "exit": 1},
        {"args": ["charpair", "isomorphic", f("square.json"), f("square.json")], "exit": 0},
        {"args": ["charpair", "isomorphic", f("square.json"), f("square_skew.json")], "exit": 1},
        {"args": ["charpair", "isomorphic", "--max-search", "1", f("square.json"), f("square_skew.json")], "exit": 3},
        {"args": ["globalize", f("cycle3.json")], "exit": 0},
        {"args": ["globalize", f("two_charts.json")], "exit": 0},
        {"args": ["globalize", f("cycle3_obstructed.json")], "exit": 1},
        {"args": ["euler", "vanishes", f("cycle3_euler_trivial.json")], "exit": 0},
        {"args": ["euler", "vanishes", f("cycle3_euler_coboundary.json")], "exit": 0},
        {"args": ["euler", "vanishes", f("square_euler_coboundary.json")], "exit": 0},
        {"args": ["euler", "vanishes", f("cycle3_euler_minus.json")], "exit": 1},
        {"args": ["classify", f("cycle3_euler_trivial.json"), f("cycle3_euler_coboundary.json")], "exit": 0},
        {"args": ["classify", f("cycle3_euler_trivial.json"), f("cycle3_euler_minus.json")], "exit": 1},
        {"args": ["realize", f("simplex.json")], "exit": 0},
        {"args": ["realize", f("cycle3_flipped_euler_random.json")], "exit": 0},
        {"args": ["realize", f("square_nonunimodular.json")], "exit": 2},
        {"args": ["tetra", "closed", f("psi_H2.json")], "exit": 0},
        {"args": ["tetra", "nondeg", f("psi_H2.json")], "exit": 0},
        {"args": ["tetra", "closed", "--tol", "1e-6", f("psi_RQ1.json")], "exit": 0},
        {"args": ["tetra", "nondeg", f("psi_RQ1.json")], "exit": 0},
        {"args": ["tetra", "nondeg", f("degenerate4.json")], "exit": 1},
        {"args": ["tetra", "trimoment", "--n", "2"], "exit": 0},
        {"args": ["tetra", "lagrangian", f("section_constant4.json")], "exit": 0},
        {"args": ["tetra", "lagrangian", f("section_nonlagrangian4.json")], "exit": 1},
        {"args": ["tetra", "liouville", f("section_constant4.json")], "exit": 0},
        {"args": ["tetra", "liouville", f("section_separable2.json")], "exit": 0},
        {"args": ["tetra", "liouville", f("section_nonlagrangian4.json")], "exit": 1},
        {"args": ["tetra", "decompose", f("fibermap2.json")], "exit": 0},
        {"args": ["tetra", "decompose", f("fibermap2_mismatch.json")], "exit": 1},
        {"args": ["delzant", "check", f("delzant_single.json")], "exit": 0},
        {"args": ["delzant", "check", f("delzant_square.json")], "exit": 0},
        {"args": ["delzant", "check", f("delzant_cycle3_minus.json")], "exit": 0},
        {"args": ["delzant", "check", f("delzant_nonlagrangian4.json")], "exit": 1},
        {"args": ["delzant", "check", f("delzant_shear.json")], "exit": 1},
        {"args": ["delzant", "compare", f("delzant_cycle3_trivial.json"), f("delzant_cycle3_coboundary.json")], "exit": 0},
        {"args": ["delzant", "compare", f("delzant_cycle3_trivial.json"), f("delzant_cycle3_minus.json")], "exit": 1},
        {"args": ["delzant", "realize", f("delzant_single.json")], "exit": 0},
        {"args": ["delzant", "realize", f("delzant_square.json")], "exit": 0},
    ]
    write_json(out / "manifest.json", manifest)
    return manifest


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    entries = build(target)
    print(f"wrote {len(entries)} manifest entries to {target}")
