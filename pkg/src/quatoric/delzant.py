"""Delzant-type data (B, lambda) for Lagrangian fibrations by quaternionic tori.

The Lagrangian class is a cocycle of sections: on the edge (a, b) the gluing
from chart b into chart a is

    G_ab(xi, q) = (A_ab xi + c_ab, rho_ab(q) * lambda_ab(xi)^-1),    xi in chart b,

so lambda_ab is evaluated in the coordinates of the source chart b.  With the
cech conventions the cocycle identity reads

    lambda_ac(xi) = lambda_ab(A_bc xi + c_bc) * rho_ab(lambda_bc(xi)).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .autgroup import SignedPermAut, enumerate_aut
from .basecomplex import BaseComplex, Chart, Edge, Overlap, Report, affine_compatibility
from .cech import DEFAULT_MAX_SEARCH, AutCocycle, Cochain0, TorusCocycle, gauge_solve
from .quatcore import InputError, ResourceLimitError, TorusElement, qconj, qmul
from .tetra import (DEFAULT_STEP, SectionMap, exp_chart, join_point, lagrangian_check, max_abs, psi_RQ,
                    pullback, split_point, subtract_terms, act_fiber)


@dataclass(frozen=True)
class LagrangianCocycle:
    values: Mapping[Edge, SectionMap]

    def __getitem__(self, edge: Edge) -> SectionMap:
        try:
            return self.values[edge]
        except KeyError:
            raise InputError(f"Lagrangian cocycle has no value on edge {edge[1]}->{edge[0]}") from None

    @property
    def is_constant(self) -> bool:
        return all(s.is_constant for s in self.values.values())

    @classmethod
    def trivial(cls, b: BaseComplex) -> "LagrangianCocycle":
        return cls({e: SectionMap.constant(TorusElement.identity(b.n)) for e in b.edges()})

    @classmethod
    def from_torus(cls, c: TorusCocycle) -> "LagrangianCocycle":
        return cls({e: SectionMap.constant(v) for e, v in c.values.items()})

    def at(self, b: BaseComplex, points: Mapping[str, np.ndarray]) -> TorusCocycle:
        """Torus cocycle of values, each edge evaluated at the given point of its source chart."""
        return TorusCocycle({(a, s): self[(a, s)].torus(points[s]) for (a, s) in b.edges()})

    @classmethod
    def from_json(cls, data, b: Optional[BaseComplex] = None) -> "LagrangianCocycle":
        values = {}
        try:
            for item in data["edges"]:
                values[(str(item["to"]), str(item["from"]))] = SectionMap.from_json(item["value"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed Lagrangian cocycle: {exc}") from exc
        if b is not None:
            for (a, s), v in list(values.items()):
                if (s, a) not in values:
                    if not v.is_constant:
                        raise InputError(f"edge {a}->{s} missing and cannot be inferred from a non-constant section")
                    rho = b.overlap(s, a).rho if b.overlap(s, a) is not None else SignedPermAut.identity(b.n)
                    values[(s, a)] = SectionMap.constant(rho.act_torus(v.torus(None).inverse()))
        return cls(values)

    def to_json(self) -> dict:
        return {"edges": [{"from": s, "to": a, "value": v.to_json()} for (a, s), v in self.values.items()]}


def _chart_samples(ch: Chart, rng: np.random.Generator, count: int) -> np.ndarray:
    lo = np.array([x[0] for x in ch.box])
    hi = np.array([x[1] for x in ch.box])
    return lo + (hi - lo) * rng.random((count, len(lo)))


def _center(ch: Chart) -> np.ndarray:
    return np.array([(lo + hi) / 2 for lo, hi in ch.box])


def lagrangian_class_check(b: BaseComplex, lam: LagrangianCocycle, rng: Optional[np.random.Generator] = None,
                           samples: int = 5, tol: float = 1e-7) -> Report:
    """Affine compatibility, the Lagrangian condition per edge, and the cocycle identity at samples."""
    rng = np.random.default_rng(0) if rng is None else rng
    v = [f"affine: {x}" for x in affine_compatibility(b).violations]
    missing = [e for e in b.edges() if e not in lam.values]
    if missing:
        return Report(False, v + [f"edge {s}->{a}: no section" for a, s in missing])
    for (a, s) in b.edges():
        sec = lam[(a, s)]
        if sec.kind == "quartic_root_section":
            v.append(f"edge {s}->{a}: section does not take values in Q^n")
            continue
        if sec.n != b.n:
            v.append(f"edge {s}->{a}: section has {sec.n} factors, expected {b.n}")
            continue
        if not sec.is_constant:
            rep = lagrangian_check(sec, _chart_samples(b.chart(s), rng, samples), tol)
            if not rep["lagrangian"]:
                v.append(f"edge {s}->{a}: section is not Lagrangian (residual {rep['max_residual']:.3g})")
    if v:
        return Report(False, sorted(v))
    for (a, s) in b.edges():
        ov_back = b.overlap(s, a)
        for xi_s in _chart_samples(b.chart(s), rng, samples):
            xi_a = b.overlap(a, s).apply(xi_s)
            expect = ov_back.rho.act_torus(lam[(a, s)].torus(xi_s).inverse())
            if not lam[(s, a)].torus(xi_a).allclose(expect, tol):
                v.append(f"edge {s}->{a}: reverse section is not the twisted inverse")
                break
    for t in b.triples:
        for x, y, z in itertools.permutations(t):
            rho_xy = b.overlap(x, y).rho
            bad = False
            for xi_z in _chart_samples(b.chart(z), rng, samples):
                xi_y = b.overlap(y, z).apply(xi_z)
                lhs = lam[(x, y)].torus(xi_y) * rho_xy.act_torus(lam[(y, z)].torus(xi_z))
                if not lhs.allclose(lam[(x, z)].torus(xi_z), tol):
                    bad = True
                    break
            if bad:
                v.append(f"triple {list(t)}: cocycle identity fails on ({x}, {y}, {z})")
                break
    return Report(not v, sorted(v))


# ---------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class DelzantWitness:
    chart_map: Mapping[str, str]
    conjugators: Mapping[str, SignedPermAut]
    translations: Mapping[str, tuple[float, ...]]
    gauge: Cochain0

    def to_json(self) -> dict:
        return {"chart_map": dict(self.chart_map),
                "conjugators": {k: g.to_json() for k, g in self.conjugators.items()},
                "translations": {k: list(d) for k, d in self.translations.items()},
                "gauge": self.gauge.to_json()}


def _affine_translations(b1: BaseComplex, b2: BaseComplex, fm, g, tol: float):
    """Solve g_a^-1 c1_ab + d_a = A2 d_b + c2 for the chart translations d (least squares)."""
    ids = b1.chart_ids
    n = b1.n
    pos = {cid: i for i, cid in enumerate(ids)}
    rows, rhs = [], []
    for (a, s) in b1.edges():
        o1, o2 = b1.overlap(a, s), b2.overlap(fm[a], fm[s])
        blk = np.zeros((n, n * len(ids)))
        blk[:, n * pos[a]: n * pos[a] + n] += np.eye(n)
        blk[:, n * pos[s]: n * pos[s] + n] -= o2.A_matrix
        rows.append(blk)
        rhs.append(np.array(o2.c) - g[a].inverse().matrix() @ np.array(o1.c))
    if not rows:
        return {cid: tuple([0.0] * n) for cid in ids}
    M, r = np.vstack(rows), np.concatenate(rhs)
    d, *_ = np.linalg.lstsq(M, r, rcond=None)
    if np.max(np.abs(M @ d - r), initial=0.0) > tol:
        return None
    return {cid: tuple(float(x) for x in d[n * pos[cid]: n * pos[cid] + n]) for cid in ids}


def _iter_affine_isomorphisms(b1: BaseComplex, b2: BaseComplex, max_search: int, tol: float):
    if b1.n != b2.n or len(b1.charts) != len(b2.charts) or len(b1.edges()) != len(b2.edges()):
        return
    edges2 = set(b2.edges())
    triples2 = {frozenset(t) for t in b2.triples}
    parent, comps = b1.spanning_forest()
    group = enumerate_aut(b1.n)
    used = 0
    for image in itertools.permutations(b2.chart_ids):
        used += 1
        if used > max_search:
            raise ResourceLimitError(f"affine isomorphism search exceeded the cap of {max_search}")
        fm = dict(zip(b1.chart_ids, image))
        if set((fm[a], fm[s]) for a, s in b1.edges()) != edges2:
            continue
        if {frozenset(fm[x] for x in t) for t in b1.triples} != triples2:
            continue
        per_comp = []
        for comp in comps:
            opts = []
            for root in group:
                used += 1
                if used > max_search:
                    raise ResourceLimitError(f"affine isomorphism search exceeded the cap of {max_search}")
                g = {comp[0]: root}
                for cid in comp[1:]:
                    p = parent[cid]
                    g[cid] = b1.overlap(p, cid).rho.inverse() @ g[p] @ b2.overlap(fm[p], fm[cid]).rho
                if all(g[a] @ b2.overlap(fm[a], fm[s]).rho @ g[s].inverse() == b1.overlap(a, s).rho
                       for (a, s) in b1.edges() if a in g):
                    opts.append(g)
            per_comp.append(opts)
        for combo in itertools.product(*per_comp):
            g = {}
            for part in combo:
                g.update(part)
            d = _affine_translations(b1, b2, fm, g, tol)
            if d is not None:
                yield fm, g, d


def pullback_lagrangian(lam2: LagrangianCocycle, b1: BaseComplex, fm, g, d) -> LagrangianCocycle:
    """Transport lambda2 to the nerve of b1 along chart maps T_a(xi) = g_a^-1 xi + d_a."""
    out = {}
    for (a, s) in b1.edges():
        sec = lam2[(fm[a], fm[s])]
        gm, ds, ga = g[s].inverse().matrix().astype(float), np.array(d[s]), g[a]
        if sec.is_constant and sec.kind == "constant":
            out[(a, s)] = SectionMap.constant(ga.act_torus(sec.value))
        else:
            out[(a, s)] = _TransportedSection(sec, ga, gm, ds, b1.n)
    return LagrangianCocycle(out)


class _TransportedSection:
    """xi -> g_a(sec(g_b^-1 xi + d_b)); quacks like a SectionMap for evaluation."""

    kind = "transported"

    def __init__(self, sec, ga, gm, ds, n):
        self.sec, self.ga, self.gm, self.ds, self.n = sec, ga, gm, ds, n

    @property
    def is_constant(self) -> bool:
        return self.sec.is_constant

    def torus(self, xi) -> TorusElement:
        return self.ga.act_torus(self.sec.torus(self.gm @ np.asarray(xi, dtype=float) + self.ds))


def delzant_compare(b1: BaseComplex, lam1: LagrangianCocycle, b2: BaseComplex, lam2: LagrangianCocycle,
                    max_search: int = DEFAULT_MAX_SEARCH, tol: float = 1e-9, samples: int = 5,
                    rng: Optional[np.random.Generator] = None) -> Optional[DelzantWitness]:
    """First affine isomorphism under which lambda1 and the pulled-back lambda2 differ by a constant gauge.

    The gauge is solved from the section values at chart centres and then
    confirmed at sampled points of each source chart.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    rho1 = AutCocycle.from_base(b1)
    centers = {ch.id: _center(ch) for ch in b1.charts}
    checks = {ch.id: _chart_samples(ch, rng, samples) for ch in b1.charts}
    target = lam1.at(b1, centers)
    failed = set()  # centre values already known to admit no gauge
    for fm, g, d in _iter_affine_isomorphisms(b1, b2, max_search, tol):
        pulled = pullback_lagrangian(lam2, b1, fm, g, d)
        at_centers = pulled.at(b1, centers)
        key = tuple((e, at_centers[e].coords.round(12).tobytes()) for e in sorted(at_centers.values))
        if key in failed:
            continue
        theta = gauge_solve(target, at_centers, b1, rho1, tol)
        if theta is None:
            failed.add(key)
            continue
        ok = True
        for (a, s) in b1.edges():
            if lam1[(a, s)].is_constant and pulled[(a, s)].is_constant:
                continue
            rho = b1.overlap(a, s).rho
            for xi in checks[s]:
                moved = theta[a] * pulled[(a, s)].torus(xi) * rho.act_torus(theta[s]).inverse()
                if not moved.allclose(lam1[(a, s)].torus(xi), 1e-7):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return DelzantWitness(fm, g, d, theta)
    return None


# ---------------------------------------------------------------------------
# realisation

def gluing_map(ov: Overlap, sec: SectionMap):
    """G(p) = (A xi + c, rho(q) lambda(xi)^-1) on the ambient R^n x (R^4)^n.

    Sign flips act on the fibre by quaternionic conjugation so that G is a
    tetraplectomorphism of psi_RQ.
    """
    n = len(ov.c)

    def G(p):
        xi, q = split_point(p, n)
        lam = sec(xi)
        return join_point(ov.apply(xi), qmul(act_fiber(ov.rho, q, reflect=True), qconj(lam)))
    return G


def psi_consistency(ov: Overlap, sec: SectionMap, xi, u: TorusElement, step: float = DEFAULT_STEP) -> float:
    n = len(ov.c)
    C = exp_chart(xi, u)
    G = gluing_map(ov, sec)
    moved = pullback(psi_RQ(n), lambda z: G(C(z)), C.origin, step)
    ref = pullback(psi_RQ(n), C, C.origin, step)
    return max_abs(subtract_terms(moved, ref))


def delzant_realize(b: BaseComplex, lam: LagrangianCocycle, rng: Optional[np.random.Generator] = None,
                    samples: int = 3, tol: float = 1e-7) -> dict:
    """Chart-wise standard models glued by (A, c, rho, lambda), with psi-consistency residuals."""
    rng = np.random.default_rng(0) if rng is None else rng
    rep = lagrangian_class_check(b, lam, rng)
    if not rep.ok:
        raise InputError("cannot realize invalid data: " + "; ".join(rep.violations))
    gluings = []
    worst = 0.0
    for ov in b.overlaps:
        sec = lam[ov.key]
        res = max((psi_consistency(ov, sec, xi, TorusElement.random(b.n, rng))
                   for xi in _chart_samples(b.chart(ov.src), rng, samples)), default=0.0)
        worst = max(worst, res)
        entry = ov.to_json()
        entry["section"] = sec.to_json()
        entry["psi_residual"] = res
        gluings.append(entry)
    return {
        "n": b.n,
        "charts": [dict(ch.to_json(), model="standard") for ch in b.charts],
        "gluings": gluings,
        "triples": [list(t) for t in b.triples],
        "psi_residual": worst,
        "psi_consistent": worst < tol,
    }


def delzant_extract(desc: dict) -> tuple[BaseComplex, LagrangianCocycle]:
    try:
        n = int(desc["n"])
        charts = tuple(Chart.from_json(c) for c in desc["charts"])
        overlaps = tuple(Overlap.from_json(g, n) for g in desc["gluings"])
        triples = tuple(tuple(str(x) for x in t) for t in desc.get("triples", []))
        values = {(str(g["to"]), str(g["from"])): SectionMap.from_json(g["section"], n) for g in desc["gluings"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed fibration description: {exc}") from exc
    return BaseComplex(n, charts, overlaps, triples), LagrangianCocycle(values)


def check_realization(desc: dict, rng: Optional[np.random.Generator] = None, samples: int = 3,
                      tol: float = 1e-7) -> Report:
    """Re-verify a realized description: valid Delzant data and psi-preserving gluings."""
    rng = np.random.default_rng(0) if rng is None else rng
    b, lam = delzant_extract(desc)
    v = list(lagrangian_class_check(b, lam, rng).violations)
    for ov in b.overlaps:
        for xi in _chart_samples(b.chart(ov.src), rng, samples):
            res = psi_consistency(ov, lam[ov.key], xi, TorusElement.random(b.n, rng))
            if res >= tol:
                v.append(f"gluing {ov.src}->{ov.dst}: psi not preserved (residual {res:.3g})")
                break
    return Report(not v, sorted(v))
