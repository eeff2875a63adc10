"""Small standard complexes, cocycles and random data generators.

These are the building blocks for the shipped JSON fixtures, the test suite
and the experiment scripts.
"""
from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from .autgroup import SignedPermAut, enumerate_aut
from .basecomplex import BaseComplex, Chart, Overlap
from .cech import AutCocycle, Cochain0, TorusCocycle, delta_aut, delta_torus
from .charpair import CharacteristicPair, relabel_pair
from .euler import ActionData
from .quatcore import TorusElement
from .tetra import SectionMap


def _chart(cid: str, box) -> Chart:
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    return Chart(cid, box, tuple(i for i, (lo, _) in enumerate(box) if lo == 0.0))


def _ov(src, dst, A, c, rho: Optional[SignedPermAut] = None) -> Overlap:
    A = tuple(tuple(int(v) for v in row) for row in A)
    n = len(A)
    return Overlap(src, dst, A, tuple(float(x) for x in c), rho or SignedPermAut.identity(n))


def _symmetric(overlaps) -> tuple[Overlap, ...]:
    out = list(overlaps)
    keys = {o.key for o in out}
    for o in list(out):
        if (o.src, o.dst) not in keys:
            out.append(o.inverse())
    return tuple(out)


def single_chart(n: int = 2, box_hi: float = 1.0) -> BaseComplex:
    return BaseComplex(n, (_chart("U", [(0.0, box_hi)] * n),), ())


def two_charts(n: int = 2, rho: Optional[SignedPermAut] = None) -> BaseComplex:
    """Two interior charts glued by A = rho (identity by default); boxes are mapped onto each other."""
    rho = rho or SignedPermAut.identity(n)
    A = rho.matrix()
    box = [(1.0, 2.0)] * n
    # translation keeps the box [1, 2]^n invariant under the signed permutation
    c = [3.0 if s < 0 else 0.0 for s in rho.signs]
    charts = (_chart("U", box), _chart("V", box))
    return BaseComplex(n, charts, _symmetric([_ov("U", "V", A, c, rho)]))


def interior_graph(n: int, ids: Sequence[str], edges: Sequence[tuple[str, str]],
                   triples: Sequence[tuple[str, str, str]] = ()) -> BaseComplex:
    """Interior charts (no boundary faces) with identity transitions on the listed nerve edges."""
    charts = tuple(_chart(cid, [(1.0, 2.0)] * n) for cid in ids)
    I = np.eye(n, dtype=int)
    ovs = [_ov(a, b, I, [0.0] * n) for a, b in edges]
    return BaseComplex(n, charts, _symmetric(ovs), tuple(tuple(t) for t in triples))


def cycle3(n: int = 2) -> BaseComplex:
    """Annulus-like nerve: three charts, three edges, no common triple intersection."""
    return interior_graph(n, ["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])


def cycle3_flipped(n: int = 2) -> BaseComplex:
    """The 3-cycle with a sign flip on edge a -> b (affine part and rho agree), so rho has holonomy."""
    flip = SignedPermAut(tuple(range(n)), (-1,) + (1,) * (n - 1))
    base = cycle3(n)
    ovs = []
    for o in base.overlaps:
        if {o.src, o.dst} == {"a", "b"}:
            ovs.append(_ov(o.src, o.dst, flip.matrix(), [3.0] + [0.0] * (n - 1), flip))
        else:
            ovs.append(o)
    return BaseComplex(n, base.charts, tuple(ovs), ())


def simplex2() -> BaseComplex:
    """Triangle with three vertex charts; integral affine transitions, trivial rho."""
    box = [(0.0, 0.6), (0.0, 0.6)]
    charts = (_chart("v0", box), _chart("v1", box), _chart("v2", box))
    ovs = [
        _ov("v0", "v1", [[-1, -1], [0, 1]], [1, 0]),
        _ov("v0", "v2", [[1, 0], [-1, -1]], [0, 1]),
        _ov("v1", "v2", [[-1, -1], [1, 0]], [1, 0]),
    ]
    return BaseComplex(2, charts, _symmetric(ovs), (("v0", "v1", "v2"),))


def simplex2_pair() -> CharacteristicPair:
    """The simplex with isotropy normals (1,0), (0,1) and (1,1) on its three edges."""
    ell = {("v0", 0): (1, 0), ("v0", 1): (0, 1),
           ("v1", 0): (1, 1), ("v1", 1): (0, 1),
           ("v2", 0): (1, 0), ("v2", 1): (1, 1)}
    return CharacteristicPair(simplex2(), ell)


SQUARE_IDS = ("c00", "c10", "c01", "c11")


def square() -> BaseComplex:
    """Square [0, 2]^2 covered by four corner charts; transitions are sign flips with A = rho."""
    box = [(0.0, 1.5), (0.0, 1.5)]
    charts = tuple(_chart(cid, box) for cid in SQUARE_IDS)
    flips = {"c00": (1, 1), "c10": (-1, 1), "c01": (1, -1), "c11": (-1, -1)}
    ovs = []
    for a, b in itertools.combinations(SQUARE_IDS, 2):
        # chart coordinates: xi_a = s_a * x + t_a, with t = 2 where flipped
        sa, sb = flips[a], flips[b]
        signs = tuple(x * y for x, y in zip(sa, sb))
        rho = SignedPermAut((0, 1), signs)
        tb = np.array([2.0 if s < 0 else 0.0 for s in sb])
        ta = np.array([2.0 if s < 0 else 0.0 for s in sa])
        # xi_b = S_b S_a (xi_a - t_a) + t_b
        c = -np.array(signs) * ta + tb
        ovs.append(_ov(a, b, rho.matrix(), c, rho))
    triples = tuple(itertools.combinations(SQUARE_IDS, 3))
    return BaseComplex(2, charts, _symmetric(ovs), triples)


def square_pair(skew: bool = False) -> CharacteristicPair:
    p = CharacteristicPair.standard(square())
    if not skew:
        return p
    ell = dict(p.ell)
    # the bottom side y = 0 is face 2 of c00 and of c10; c10 sees it through the flip of x
    ell[("c00", 1)] = (1, 1)
    ell[("c10", 1)] = (1, -1)
    return CharacteristicPair(p.base, ell)


def shear_pair_base() -> BaseComplex:
    """Two interior charts glued by a shear: a valid base that is not affinely compatible."""
    charts = (_chart("U", [(1.0, 2.0)] * 2), _chart("V", [(1.0, 2.0)] * 2))
    return BaseComplex(2, charts, _symmetric([_ov("U", "V", [[1, 1], [0, 1]], [0.0, 0.0])]))


# ---------------------------------------------------------------------------
# cocycles

def random_aut_cochain(b: BaseComplex, rng: np.random.Generator) -> Cochain0:
    group = enumerate_aut(b.n)
    return Cochain0({cid: group[int(rng.integers(len(group)))] for cid in b.chart_ids})


def _free_edges(b: BaseComplex) -> list[tuple[str, str]]:
    """One orientation of each nerve edge lying in no declared triple."""
    in_triple = {frozenset(p) for t in b.triples for p in itertools.combinations(t, 2)}
    return [e for e in b.nerve_edges() if frozenset(e) not in in_triple]


def random_aut_cocycle(b: BaseComplex, rng: np.random.Generator, perturb: float = 0.5) -> AutCocycle:
    """delta of a random cochain, with edges outside all triples randomly replaced."""
    vals = dict(delta_aut(random_aut_cochain(b, rng), b).values)
    group = enumerate_aut(b.n)
    for a, s in _free_edges(b):
        if rng.random() < perturb:
            g = group[int(rng.integers(len(group)))]
            vals[(a, s)] = g
            vals[(s, a)] = g.inverse()
    return AutCocycle(vals)


def random_torus_cocycle(b: BaseComplex, twist: Optional[AutCocycle], rng: np.random.Generator,
                         perturb: float = 0.5) -> TorusCocycle:
    theta = Cochain0({cid: TorusElement.random(b.n, rng) for cid in b.chart_ids})
    vals = dict(delta_torus(theta, b, twist).values)
    for a, s in _free_edges(b):
        if rng.random() < perturb:
            u = TorusElement.random(b.n, rng) * vals[(a, s)]
            vals[(a, s)] = u
            rho_sa = twist[(s, a)] if twist is not None else SignedPermAut.identity(b.n)
            vals[(s, a)] = rho_sa.act_torus(u.inverse())
    return TorusCocycle(vals)


def holonomy_cocycle(b: BaseComplex, edge: tuple[str, str], value: TorusElement,
                     twist: Optional[AutCocycle] = None) -> TorusCocycle:
    """Identity everywhere except ``value`` on one edge (and its twisted inverse on the reverse)."""
    vals = dict(TorusCocycle.trivial(b).values)
    a, s = edge
    vals[(a, s)] = value
    rho_sa = twist[(s, a)] if twist is not None else SignedPermAut.identity(b.n)
    vals[(s, a)] = rho_sa.act_torus(value.inverse())
    return TorusCocycle(vals)


def minus_one(n: int) -> TorusElement:
    """(-1, 1, ..., 1): the element -1 in the first factor."""
    c = np.zeros((n, 4))
    c[:, 0] = 1.0
    c[0, 0] = -1.0
    return TorusElement(c)


# ---------------------------------------------------------------------------
# relabelling

def rename_charts(p: CharacteristicPair, names: dict[str, str]) -> CharacteristicPair:
    b = p.base
    charts = tuple(Chart(names[c.id], c.box, c.vanishing) for c in b.charts)
    ovs = tuple(Overlap(names[o.src], names[o.dst], o.A, o.c, o.rho, o.faces, o.region) for o in b.overlaps)
    triples = tuple(tuple(names[x] for x in t) for t in b.triples)
    ell = {(names[c], i): v for (c, i), v in p.ell.items()}
    return CharacteristicPair(BaseComplex(b.n, charts, ovs, triples), ell)


def relabel_action(a: ActionData, names: dict[str, str], g: dict[str, SignedPermAut]) -> ActionData:
    """An action isomorphic to ``a`` through the chart renaming ``names`` and conjugators ``g``."""
    pair = rename_charts(relabel_pair(a.pair, g), names)
    vals = {(names[x], names[y]): g[x].inverse().act_torus(v) for (x, y), v in a.euler.values.items()}
    return ActionData(pair, TorusCocycle(vals))


# ---------------------------------------------------------------------------
# sections

def nonlagrangian_section() -> SectionMap:
    """n = 4: f_1(xi) = exp(xi_2, xi_3, xi_4), the other factors constant at the identity."""
    coeffs = ([[[1.0, [0, 1, 0, 0]]], [[1.0, [0, 0, 1, 0]]], [[1.0, [0, 0, 0, 1]]]],) + ([[], [], []],) * 3
    return SectionMap(4, "exp_poly", coeffs=coeffs)


def negated_section(s: SectionMap) -> SectionMap:
    """exp(-p): the pointwise inverse of an exp_poly section."""
    coeffs = tuple(tuple(tuple((-a, ex) for a, ex in comp) for comp in triple) for triple in s.coeffs)
    return SectionMap(s.n, "exp_poly", coeffs=coeffs)


def random_separable_section(n: int, rng: np.random.Generator, degree: int = 2) -> SectionMap:
    """f_k depends on xi_k only: a Lagrangian section whose Liouville chart preserves psi."""
    coeffs = []
    for k in range(n):
        triple = []
        for _ in range(3):
            comp = []
            for d in range(degree + 1):
                ex = [0] * n
                ex[k] = d
                comp.append([float(rng.normal()), ex])
            triple.append(comp)
        coeffs.append(triple)
    return SectionMap(n, "exp_poly", coeffs=tuple(coeffs))
