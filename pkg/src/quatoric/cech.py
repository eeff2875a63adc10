"""Cech 1-cocycles on the nerve of a chart complex.

Two coefficient groups are supported: the finite group Aut(Q^n) of signed
permutations, and the torus Q^n itself with locally constant (one element per
edge) representatives.  Edge keys ``(a, b)`` are read "into a, from b".

Torus cocycles may be twisted by an Aut-valued cocycle rho.  The conventions
are

    coboundary       (delta theta)(a, b) = theta_a * rho_ab(theta_b)^-1
    cocycle          c(a, b) * rho_ab(c(b, c)) = c(a, c)
    symmetry         c(b, a) = rho_ba(c(a, b)^-1)
    gauge action     (theta . c)(a, b) = theta_a * c(a, b) * rho_ab(theta_b)^-1

and the untwisted case is rho = identity on every edge.
"""
from __future__ import annotations

import warnings

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.transform import Rotation

from .autgroup import SignedPermAut, enumerate_aut, group_order
from .basecomplex import BaseComplex, Edge
from .quatcore import InputError, ResourceLimitError, TorusElement, qconj, qmul

TORUS_TOL = 1e-9
DEFAULT_MAX_SEARCH = 10 ** 7


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class AutCocycle:
    values: Mapping[Edge, SignedPermAut]

    def __getitem__(self, edge: Edge) -> SignedPermAut:
        try:
            return self.values[edge]
        except KeyError:
            raise InputError(f"cocycle has no value on edge {edge[1]}->{edge[0]}") from None

    def get(self, edge: Edge, n: int) -> SignedPermAut:
        """Value on an edge, with the identity on the diagonal."""
        if edge[0] == edge[1]:
            return SignedPermAut.identity(n)
        return self[edge]

    @classmethod
    def from_base(cls, b: BaseComplex) -> "AutCocycle":
        return cls(dict(b.aut_cocycle_values()))

    @classmethod
    def trivial(cls, b: BaseComplex) -> "AutCocycle":
        return cls({e: SignedPermAut.identity(b.n) for e in b.edges()})

    @classmethod
    def from_json(cls, data, complete: bool = True) -> "AutCocycle":
        values = {}
        try:
            for item in data["edges"]:
                values[(str(item["to"]), str(item["from"]))] = SignedPermAut.from_json(item["value"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed Aut cocycle: {exc}") from exc
        if complete:
            for (a, b), v in list(values.items()):
                values.setdefault((b, a), v.inverse())
        return cls(values)

    def to_json(self) -> dict:
        return {"edges": [{"from": b, "to": a, "value": v.to_json()} for (a, b), v in self.values.items()]}


@dataclass(frozen=True)
class TorusCocycle:
    values: Mapping[Edge, TorusElement]

    def __getitem__(self, edge: Edge) -> TorusElement:
        try:
            return self.values[edge]
        except KeyError:
            raise InputError(f"cocycle has no value on edge {edge[1]}->{edge[0]}") from None

    @classmethod
    def trivial(cls, b: BaseComplex) -> "TorusCocycle":
        return cls({e: TorusElement.identity(b.n) for e in b.edges()})

    @classmethod
    def from_json(cls, data, twist: Optional[AutCocycle] = None, complete: bool = True) -> "TorusCocycle":
        values = {}
        try:
            for item in data["edges"]:
                values[(str(item["to"]), str(item["from"]))] = TorusElement.from_json(item["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed torus cocycle: {exc}") from exc
        if complete:
            for (a, b), v in list(values.items()):
                if (b, a) not in values:
                    rho_ba = twist.values.get((b, a)) if twist is not None else None
                    inv = v.inverse()
                    values[(b, a)] = rho_ba.act_torus(inv) if rho_ba is not None else inv
        return cls(values)

    def to_json(self) -> dict:
        return {"edges": [{"from": b, "to": a, "value": v.to_json()} for (a, b), v in self.values.items()]}


@dataclass(frozen=True)
class Cochain0:
    values: Mapping[str, Union[SignedPermAut, TorusElement]]

    def __getitem__(self, cid: str):
        return self.values[cid]

    def to_json(self) -> dict:
        return {cid: v.to_json() for cid, v in self.values.items()}


@dataclass
class CocycleReport:
    ok: bool
    failing_triples: list[list[str]] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "failing_triples": self.failing_triples, "violations": self.violations}


def _twist_value(twist: Optional[AutCocycle], edge: Edge, n: int) -> SignedPermAut:
    if twist is None or edge[0] == edge[1]:
        return SignedPermAut.identity(n)
    return twist[edge]


def _require_edges(c, b: BaseComplex):
    missing = [e for e in b.edges() if e not in c.values]
    if missing:
        a, s = missing[0]
        raise InputError(f"cocycle is missing nerve edge {s}->{a} ({len(missing)} missing)")


# ---------------------------------------------------------------------------
# cocycle checks

def check_cocycle(c: Union[AutCocycle, TorusCocycle], b: BaseComplex,
                  twist: Optional[AutCocycle] = None, tol: float = TORUS_TOL) -> CocycleReport:
    """Symmetry on every edge and the cocycle identity on every declared triple."""
    _require_edges(c, b)
    n = b.n
    violations = []
    failing = []
    is_aut = isinstance(c, AutCocycle)
    for (a, s) in b.edges():
        if is_aut:
            if c[(s, a)] != c[(a, s)].inverse():
                violations.append(f"edge {s}->{a}: reverse value is not the inverse")
        else:
            expect = _twist_value(twist, (s, a), n).act_torus(c[(a, s)].inverse())
            if not c[(s, a)].allclose(expect, tol):
                violations.append(f"edge {s}->{a}: reverse value does not match the (twisted) inverse")
    for t in b.triples:
        bad = False
        for x, y, z in itertools.permutations(t):
            if is_aut:
                bad = c[(x, y)] @ c[(y, z)] != c[(x, z)]
            else:
                lhs = c[(x, y)] * _twist_value(twist, (x, y), n).act_torus(c[(y, z)])
                bad = not lhs.allclose(c[(x, z)], tol)
            if bad:
                break
        if bad:
            failing.append(list(t))
    return CocycleReport(not violations and not failing, failing, sorted(violations))


# ---------------------------------------------------------------------------
# Aut-valued coboundaries

def _tree_cochain_aut(c: AutCocycle, b: BaseComplex) -> dict[str, SignedPermAut]:
    parent, comps = b.spanning_forest()
    out = {}
    for comp in comps:
        for cid in comp:
            p = parent[cid]
            # rho_{p cid} = rho_p rho_cid^-1  =>  rho_cid = rho_{p cid}^-1 rho_p
            out[cid] = SignedPermAut.identity(b.n) if p is None else c[(p, cid)].inverse() @ out[p]
    return out


def loop_holonomy_aut(c: AutCocycle, b: BaseComplex) -> dict[Edge, SignedPermAut]:
    """Tree-conjugated holonomy rho_a^-1 rho_ab rho_b of each edge; identity on tree edges."""
    _require_edges(c, b)
    g = _tree_cochain_aut(c, b)
    return {(a, s): g[a].inverse() @ c[(a, s)] @ g[s] for (a, s) in b.edges()}


def coboundary_aut(c: AutCocycle, b: BaseComplex) -> Optional[Cochain0]:
    """A 0-cochain with rho_ab = rho_a rho_b^-1, rooted at the identity in each component, or None."""
    _require_edges(c, b)
    g = _tree_cochain_aut(c, b)
    for (a, s) in b.edges():
        if g[a] @ g[s].inverse() != c[(a, s)]:
            return None
    return Cochain0(g)


def coboundary_aut_bruteforce(c: AutCocycle, b: BaseComplex,
                              max_search: int = DEFAULT_MAX_SEARCH) -> Optional[Cochain0]:
    """Exhaustive search over Aut(Q^n)^#charts; the first solution in canonical order."""
    _require_edges(c, b)
    size = group_order(b.n) ** len(b.charts)
    if size > max_search:
        raise ResourceLimitError(f"brute-force coboundary search needs {size} candidates, cap is {max_search}")
    group = enumerate_aut(b.n)
    ids = b.chart_ids
    for combo in itertools.product(group, repeat=len(ids)):
        g = dict(zip(ids, combo))
        if all(g[a] @ g[s].inverse() == c[(a, s)] for (a, s) in b.edges()):
            return Cochain0(g)
    return None


# ---------------------------------------------------------------------------
# torus-valued coboundaries and gauge equivalence
#
# A tree-propagated unknown is carried as an "affine" expression
# theta = L * sigma(x) * R in the root value x.

@dataclass(frozen=True)
class _Affine:
    L: TorusElement
    sigma: SignedPermAut
    R: TorusElement

    def at(self, x: TorusElement) -> TorusElement:
        return self.L * self.sigma.act_torus(x) * self.R


def _apply_aut(g: SignedPermAut, f: _Affine) -> _Affine:
    return _Affine(g.act_torus(f.L), g @ f.sigma, g.act_torus(f.R))


def _gauge_constraints(c1: TorusCocycle, c2: TorusCocycle, b: BaseComplex, twist: Optional[AutCocycle]):
    """Reduce theta . c2 = c1 to per-component equations J = x K tau(x)^-1 in the root value x."""
    n = b.n
    parent, comps = b.spanning_forest()
    theta: dict[str, _Affine] = {}
    ident = TorusElement.identity(n)
    for comp in comps:
        for cid in comp:
            p = parent[cid]
            if p is None:
                theta[cid] = _Affine(ident, SignedPermAut.identity(n), ident)
                continue
            # c1(p,b) = theta_p c2(p,b) rho_pb(theta_b)^-1
            #   => theta_b = rho_bp(c1(p,b)^-1 theta_p c2(p,b))
            tp = theta[p]
            inner = _Affine(c1[(p, cid)].inverse() * tp.L, tp.sigma, tp.R * c2[(p, cid)])
            theta[cid] = _apply_aut(_twist_value(twist, (cid, p), n), inner)
    root_of = {}
    for comp in comps:
        for cid in comp:
            root_of[cid] = comp[0]
    constraints = {comp[0]: [] for comp in comps}
    for (a, s) in b.edges():
        ta, ts = theta[a], theta[s]
        rho = _twist_value(twist, (a, s), n)
        rts = _apply_aut(rho, ts)
        # La^-1 c1 rho(Ls) = sa(x) [Ra c2 rho(Rs)^-1] rho(ss(x))^-1
        K = ta.R * c2[(a, s)] * rts.R.inverse()
        J = ta.L.inverse() * c1[(a, s)] * rts.L
        sa_inv = ta.sigma.inverse()
        tau = sa_inv @ rts.sigma
        constraints[root_of[a]].append((sa_inv.act_torus(J), sa_inv.act_torus(K), tau))
    return theta, comps, constraints


def _solve_conjugacy(pairs: list[tuple[np.ndarray, np.ndarray]], tol: float) -> Optional[np.ndarray]:
    """A unit quaternion x with x k x^-1 = j for all (j, k) pairs, or None."""
    if not pairs:
        return np.array([1.0, 0.0, 0.0, 0.0])
    J = np.array([p[0] for p in pairs])
    K = np.array([p[1] for p in pairs])
    if np.max(np.abs(J[:, 0] - K[:, 0])) > tol:
        return None
    jv, kv = J[:, 1:], K[:, 1:]
    if np.max(np.abs(kv), initial=0.0) <= tol and np.max(np.abs(jv), initial=0.0) <= tol:
        return np.array([1.0, 0.0, 0.0, 0.0])
    with warnings.catch_warnings():
        # a single vector pair leaves the rotation about it free; any choice will do
        warnings.simplefilter("ignore", UserWarning)
        rot, _ = Rotation.align_vectors(jv, kv)
    if np.max(np.abs(rot.apply(kv) - jv)) > 10 * tol:
        return None
    xq = rot.as_quat()  # scalar-last
    return np.array([xq[3], xq[0], xq[1], xq[2]])


def _residual_fn(cons, n):
    def fn(z):
        x = z.reshape(n, 4)
        x = x / np.linalg.norm(x, axis=1, keepdims=True)
        res = []
        for J, K, tau in cons:
            tx = tau.act_quaternions(x)
            res.append((qmul(qmul(x, K.coords), qconj(tx)) - J.coords).ravel())
        return np.concatenate(res)
    return fn


def _solve_root(cons, n: int, tol: float, seed: int = 0, starts: int = 24) -> Optional[TorusElement]:
    if all(tau.is_identity() for _, _, tau in cons):
        x = np.zeros((n, 4))
        for i in range(n):
            sol = _solve_conjugacy([(J.coords[i], K.coords[i]) for J, K, _ in cons], tol)
            if sol is None:
                return None
            x[i] = sol
        return TorusElement(x, tol=1e-6)
    fn = _residual_fn(cons, n)
    rng = np.random.default_rng(seed)
    inits = [TorusElement.identity(n).coords.ravel()]
    inits += [TorusElement.random(n, rng).coords.ravel() for _ in range(starts - 1)]
    for z0 in inits:
        sol = least_squares(fn, z0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        if np.max(np.abs(sol.fun)) < tol:
            x = sol.x.reshape(n, 4)
            return TorusElement(x / np.linalg.norm(x, axis=1, keepdims=True), tol=np.inf)
    return None


def gauge_solve(c1: TorusCocycle, c2: TorusCocycle, b: BaseComplex,
                twist: Optional[AutCocycle] = None, tol: float = TORUS_TOL) -> Optional[Cochain0]:
    """A 0-cochain theta with theta . c2 = c1, or None when no such gauge exists.

    When every loop twist is trivial the root value is solved exactly (a
    simultaneous conjugacy problem per factor); otherwise a deterministic
    multistart least-squares search is used.
    """
    _require_edges(c1, b)
    _require_edges(c2, b)
    theta, comps, constraints = _gauge_constraints(c1, c2, b, twist)
    out = {}
    for comp in comps:
        x = _solve_root(constraints[comp[0]], b.n, tol)
        if x is None:
            return None
        for cid in comp:
            out[cid] = theta[cid].at(x)
    result = Cochain0(out)
    if gauge_residual(c1, c2, b, twist, result) > max(tol, 1e-9) * 10:
        return None
    return result


def gauge_act(theta: Cochain0, c: TorusCocycle, b: BaseComplex,
              twist: Optional[AutCocycle] = None) -> TorusCocycle:
    out = {}
    for (a, s), v in c.values.items():
        rho = _twist_value(twist, (a, s), b.n)
        out[(a, s)] = theta[a] * v * rho.act_torus(theta[s]).inverse()
    return TorusCocycle(out)


def gauge_residual(c1, c2, b, twist, theta: Cochain0) -> float:
    moved = gauge_act(theta, c2, b, twist)
    return max((moved[e].distance(c1[e]) for e in b.edges()), default=0.0)


def coboundary_torus(c: TorusCocycle, b: BaseComplex, twist: Optional[AutCocycle] = None,
                     tol: float = TORUS_TOL) -> Optional[Cochain0]:
    """{theta_a} with c(a, b) = theta_a * rho_ab(theta_b)^-1, or None."""
    return gauge_solve(c, TorusCocycle.trivial(b), b, twist, tol)


def delta_torus(theta: Cochain0, b: BaseComplex, twist: Optional[AutCocycle] = None) -> TorusCocycle:
    return gauge_act(theta, TorusCocycle.trivial(b), b, twist)


def delta_aut(g: Cochain0, b: BaseComplex) -> AutCocycle:
    return AutCocycle({(a, s): g[a] @ g[s].inverse() for (a, s) in b.edges()})


def cohomologous(c1, c2, b: BaseComplex, twist: Optional[AutCocycle] = None, tol: float = TORUS_TOL) -> bool:
    """Whether two cocycles differ by the action of a 0-cochain."""
    if isinstance(c1, AutCocycle) != isinstance(c2, AutCocycle):
        raise InputError("cannot compare Aut-valued and torus-valued cocycles")
    if isinstance(c1, AutCocycle):
        _require_edges(c1, b)
        _require_edges(c2, b)
        # c1(ab) = g_a c2(ab) g_b^-1: tree propagation from each root over all root values
        parent, comps = b.spanning_forest()
        for comp in comps:
            found = False
            for root in enumerate_aut(b.n):
                g = {comp[0]: root}
                for cid in comp[1:]:
                    p = parent[cid]
                    # c1(p,cid) = g_p c2(p,cid) g_cid^-1
                    g[cid] = c1[(p, cid)].inverse() @ g[p] @ c2[(p, cid)]
                if all(g[a] @ c2[(a, s)] @ g[s].inverse() == c1[(a, s)]
                       for (a, s) in b.edges() if a in g):
                    found = True
                    break
            if not found:
                return False
        return True
    return gauge_solve(c1, c2, b, twist, tol) is not None


def loop_holonomy_torus(c: TorusCocycle, b: BaseComplex, twist: Optional[AutCocycle] = None):
    """Residual of each off-tree edge after gauging c to the identity along a spanning tree."""
    theta, comps, constraints = _gauge_constraints(TorusCocycle.trivial(b), c, b, twist)
    ident = TorusElement.identity(b.n)
    g = Cochain0({cid: theta[cid].at(ident) for cid in theta})
    return gauge_act(g, c, b, twist).values


# ---------------------------------------------------------------------------
# transport along base isomorphisms

@dataclass(frozen=True)
class BaseIsomorphism:
    """Chart map f (from the pulled-back complex to the target) and per-chart conjugators."""
    chart_map: Mapping[str, str]
    conjugators: Mapping[str, SignedPermAut]

    def inverse(self) -> "BaseIsomorphism":
        inv = {v: k for k, v in self.chart_map.items()}
        return BaseIsomorphism(inv, {v: self.conjugators[k].inverse() for k, v in self.chart_map.items()})

    def to_json(self) -> dict:
        return {"chart_map": dict(self.chart_map),
                "conjugators": {k: v.to_json() for k, v in self.conjugators.items()}}


def pullback_cocycle(c, f: BaseIsomorphism, b: BaseComplex, target: Optional[BaseComplex] = None):
    """Transport c (defined on the target nerve) to the nerve of b along f."""
    fm, g = f.chart_map, f.conjugators
    if set(fm) != set(b.chart_ids) or len(set(fm.values())) != len(fm):
        raise InputError("chart map is not a bijection on the charts of the base")
    if target is not None:
        tgt_edges = set(target.edges())
        if len(tgt_edges) != len(b.edges()) or any((fm[a], fm[s]) not in tgt_edges for a, s in b.edges()):
            raise InputError("chart map is not a nerve isomorphism")
    out = {}
    for (a, s) in b.edges():
        v = c[(fm[a], fm[s])]
        if isinstance(c, AutCocycle):
            out[(a, s)] = g[a] @ v @ g[s].inverse()
        else:
            out[(a, s)] = g[a].act_torus(v)
    return AutCocycle(out) if isinstance(c, AutCocycle) else TorusCocycle(out)
