"""Characteristic pairs (P, L) and the canonical model built from them.

P is the Aut(Q^n)-cocycle carried by the overlaps of the base complex.  L
assigns to every boundary face (chart, i) -- the hyperplane xi_i = 0 of that
chart -- a primitive lattice vector, stored in chart-local coordinates with
its sign normalised so the first nonzero entry is positive.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .autgroup import SignedPermAut, enumerate_aut
from .basecomplex import BaseComplex, Report, strata, validate_base
from .cech import DEFAULT_MAX_SEARCH, AutCocycle, BaseIsomorphism, check_cocycle
from .quatcore import InputError, ResourceLimitError, TorusElement, is_primitive, log_su2, normalize_sign

Face = tuple[str, int]


# ---------------------------------------------------------------------------
# exact integer lattice helpers

def integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    k = len(m)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[k - 1][k - 1]


def minor_gcd(vectors: Sequence[Sequence[int]], size: int) -> int:
    """gcd of all size x size minors of the matrix whose rows are ``vectors``."""
    k = len(vectors)
    if size == 0:
        return 1
    n = len(vectors[0])
    g = 0
    for rows in itertools.combinations(range(k), size):
        for cols in itertools.combinations(range(n), size):
            g = math.gcd(g, integer_det([[vectors[r][c] for c in cols] for r in rows]))
            if g == 1:
                return 1
    return g


def smith_invariants(vectors: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Elementary divisors d_1 | d_2 | ... of the row matrix, via determinantal divisors."""
    out = []
    prev = 1
    for size in range(1, len(vectors) + 1):
        g = minor_gcd(vectors, size)
        if g == 0:
            out.extend([0] * (len(vectors) - size + 1))
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


def spans_direct_summand(vectors: Sequence[Sequence[int]]) -> bool:
    """True iff the k rows span a rank-k direct summand of Z^n (all elementary divisors 1)."""
    if not vectors:
        return True
    if len(vectors) > len(vectors[0]):
        return False
    return minor_gcd(vectors, len(vectors)) == 1


# ---------------------------------------------------------------------------
# data types

@dataclass(frozen=True)
class CharacteristicPair:
    base: BaseComplex
    ell: Mapping[Face, tuple[int, ...]]

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def rho(self) -> AutCocycle:
        return AutCocycle.from_base(self.base)

    def faces(self) -> list[Face]:
        return [(ch.id, i) for ch in self.base.charts for i in ch.vanishing]

    def ell_at(self, cid: str, i: int) -> tuple[int, ...]:
        try:
            return self.ell[(cid, i)]
        except KeyError:
            raise InputError(f"no isotropy vector on face {i + 1} of chart {cid}") from None

    @classmethod
    def from_json(cls, data) -> "CharacteristicPair":
        base = BaseComplex.from_json(data)
        ell = {}
        try:
            for item in data.get("ell", []):
                key = (str(item["chart"]), int(item["face"]) - 1)
                vec = tuple(int(v) for v in item["vector"])
                if len(vec) != base.n:
                    raise InputError(f"ell vector on {key[0]} face {key[1] + 1} has wrong length")
                ell[key] = normalize_sign(vec)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed ell entry: {exc}") from exc
        return cls(base, ell)

    @classmethod
    def standard(cls, base: BaseComplex) -> "CharacteristicPair":
        """Every face xi_i = 0 carries the basis vector e_i."""
        ell = {}
        for ch in base.charts:
            for i in ch.vanishing:
                ell[(ch.id, i)] = tuple(int(j == i) for j in range(base.n))
        return cls(base, ell)

    def to_json(self) -> dict:
        out = self.base.to_json()
        out["ell"] = [{"chart": c, "face": i + 1, "vector": list(v)} for (c, i), v in self.ell.items()]
        return out


@dataclass(frozen=True)
class ModelPoint:
    chart: str
    xi: tuple[float, ...]
    torus: TorusElement


# ---------------------------------------------------------------------------
# validation

def validate_pair(p: CharacteristicPair) -> Report:
    v = list(validate_base(p.base).violations)
    coc = check_cocycle(p.rho, p.base)
    v += coc.violations
    v += [f"rho fails the cocycle identity on triple {t}" for t in coc.failing_triples]
    faces = set(p.faces())
    for f in faces:
        if f not in p.ell:
            v.append(f"face {f[1] + 1} of chart {f[0]}: missing isotropy vector")
    for (cid, i), vec in p.ell.items():
        if (cid, i) not in faces:
            v.append(f"isotropy vector on chart {cid} coordinate {i + 1}, which is not a boundary face")
        elif not is_primitive(vec):
            v.append(f"face {i + 1} of chart {cid}: vector {list(vec)} is not primitive")
    for ov in p.base.overlaps:
        for i, j in p.base.face_map(ov.dst, ov.src).items():
            src, dst = p.ell.get((ov.src, i)), p.ell.get((ov.dst, j))
            if src is None or dst is None:
                continue
            moved = ov.rho.act_lattice(src)
            if normalize_sign(moved) != normalize_sign(dst):
                v.append(f"overlap {ov.src}->{ov.dst}: rho moves ell {list(src)} on face {i + 1} to "
                         f"{list(moved)}, expected +-{list(dst)} on face {j + 1}")
    v = sorted(set(v))
    return Report(not v, v)


@dataclass
class UnimodularityReport:
    ok: bool
    failing: list[dict]

    def to_json(self) -> dict:
        return {"ok": self.ok, "failing": self.failing}


def corner_vectors(p: CharacteristicPair, cid: str, S: Sequence[int]) -> list[tuple[int, ...]]:
    return [p.ell_at(cid, i) for i in sorted(S)]


def unimodularity(p: CharacteristicPair) -> UnimodularityReport:
    """Check every corner piece (chart, S) of every codimension."""
    failing = []
    for k in range(1, p.n + 1):
        for comp_index, comp in enumerate(strata(p.base, k)):
            for cid, S in comp:
                vecs = corner_vectors(p, cid, S)
                if not spans_direct_summand(vecs):
                    failing.append({"codim": k, "component": comp_index, "chart": cid,
                                    "faces": [i + 1 for i in S], "invariants": list(smith_invariants(vecs))})
    return UnimodularityReport(not failing, failing)


def isotropy_rank(p: CharacteristicPair, cid: str, xi=None, faces: Optional[Sequence[int]] = None,
                  tol: float = 1e-9) -> tuple[int, list[tuple[int, ...]]]:
    """Rank of the isotropy subtorus at a point (or at an explicit vanishing set) and its lattice basis."""
    ch = p.base.chart(cid)
    if faces is None:
        if xi is None:
            raise InputError("give either a base point or a face set")
        S = sorted(ch.vanishing_at(np.asarray(xi, dtype=float), tol))
    else:
        S = sorted(faces)
        if any(i not in ch.vanishing for i in S):
            raise InputError(f"faces {[i + 1 for i in S]} are not boundary faces of chart {cid}")
    return len(S), corner_vectors(p, cid, S)


# ---------------------------------------------------------------------------
# canonical model

def transport(p: CharacteristicPair, pt: ModelPoint, target: str) -> ModelPoint:
    """Move a model point into another chart through the canonical-model gluing."""
    if pt.chart == target:
        return pt
    ov = p.base.overlap(target, pt.chart)
    if ov is None:
        raise InputError(f"charts {pt.chart} and {target} do not overlap")
    return ModelPoint(target, tuple(ov.apply(pt.xi)), ov.rho.act_torus(pt.torus))


def model_equivalent(p: CharacteristicPair, a: ModelPoint, b: ModelPoint, tol: float = 1e-9) -> bool:
    """Equal base points and torus values differing by an element of the isotropy subtorus."""
    if b.chart != a.chart:
        b = transport(p, b, a.chart)
    xa, xb = np.asarray(a.xi), np.asarray(b.xi)
    if np.max(np.abs(xa - xb)) > tol:
        return False
    _, basis = isotropy_rank(p, a.chart, xa, tol=tol)
    logs = log_su2(b.torus * a.torus.inverse())  # (n, 3): column m lives in the lattice direction span
    if not basis:
        return float(np.max(np.abs(logs))) <= tol
    E = np.array(basis, dtype=float).T  # n x k
    coeffs, *_ = np.linalg.lstsq(E, logs, rcond=None)
    return float(np.max(np.abs(E @ coeffs - logs))) <= tol


def canonical_section(p: CharacteristicPair, cid: str, xi) -> ModelPoint:
    ch = p.base.chart(cid)
    xi = np.asarray(xi, dtype=float)
    if not ch.contains(xi):
        raise InputError(f"point {xi.tolist()} lies outside chart {cid}")
    return ModelPoint(cid, tuple(float(x) for x in xi), TorusElement.identity(p.n))


def model_orbit(pt: ModelPoint) -> np.ndarray:
    return np.asarray(pt.xi, dtype=float)


# ---------------------------------------------------------------------------
# isomorphisms

@dataclass(frozen=True)
class PairIsomorphism(BaseIsomorphism):
    """Chart bijection p1 -> p2, conjugators and per-chart face bijections (face of a -> face of f(a))."""
    face_maps: Mapping[str, Mapping[int, int]] = None

    def inverse(self) -> "PairIsomorphism":
        base = BaseIsomorphism.inverse(self)
        faces = {self.chart_map[a]: {j: i for i, j in fm.items()} for a, fm in self.face_maps.items()}
        return PairIsomorphism(base.chart_map, base.conjugators, faces)

    def to_json(self) -> dict:
        out = BaseIsomorphism.to_json(self)
        out["face_maps"] = {a: {str(i + 1): j + 1 for i, j in fm.items()} for a, fm in self.face_maps.items()}
        return out


def pair_invariants(p: CharacteristicPair) -> tuple:
    """Cheap isomorphism invariants: stratum counts and per-corner Smith invariants."""
    counts = tuple(len(strata(p.base, k)) for k in range(p.n + 1))
    smith = Counter()
    for ch in p.base.charts:
        for k in range(1, len(ch.vanishing) + 1):
            for S in itertools.combinations(ch.vanishing, k):
                if all((ch.id, i) in p.ell for i in S):
                    smith[smith_invariants(corner_vectors(p, ch.id, S))] += 1
    return (len(p.base.charts), len(p.base.edges()), counts, tuple(sorted(smith.items())))


def verify_pair_isomorphism(p1: CharacteristicPair, p2: CharacteristicPair, w: PairIsomorphism) -> bool:
    fm, g, phi = w.chart_map, w.conjugators, w.face_maps
    b1, b2 = p1.base, p2.base
    if sorted(fm) != sorted(b1.chart_ids) or sorted(fm.values()) != sorted(b2.chart_ids):
        return False
    if set((fm[a], fm[s]) for a, s in b1.edges()) != set(b2.edges()):
        return False
    if {frozenset(fm[x] for x in t) for t in b1.triples} != {frozenset(t) for t in b2.triples}:
        return False
    r1, r2 = p1.rho, p2.rho
    for a, s in b1.edges():
        if g[a] @ r2[(fm[a], fm[s])] @ g[s].inverse() != r1[(a, s)]:
            return False
    for ch in b1.charts:
        m = phi[ch.id]
        if sorted(m) != sorted(ch.vanishing) or sorted(m.values()) != sorted(b2.chart(fm[ch.id]).vanishing):
            return False
        for i, j in m.items():
            moved = g[ch.id].act_lattice(p2.ell_at(fm[ch.id], j))
            if normalize_sign(moved) != p1.ell_at(ch.id, i):
                return False
    for a, s in b1.edges():
        f1 = b1.face_map(a, s)
        f2 = b2.face_map(fm[a], fm[s])
        mapped = {phi[s][i]: phi[a][j] for i, j in f1.items()}
        if mapped != f2:
            return False
    return True


class _Budget:
    def __init__(self, cap: int):
        self.cap, self.used = cap, 0

    def spend(self, k: int = 1):
        self.used += k
        if self.used > self.cap:
            raise ResourceLimitError(f"isomorphism search exceeded the cap of {self.cap} candidates")


def _conjugator_choices(p1, p2, fm, comps, parent, budget) -> list[list[dict]]:
    """Per component, all conjugator assignments (in canonical root order) matching the cocycles."""
    r1, r2 = p1.rho, p2.rho
    b1 = p1.base
    group = enumerate_aut(p1.n)
    per_comp = []
    for comp in comps:
        options = []
        for root in group:
            budget.spend()
            g = {comp[0]: root}
            for cid in comp[1:]:
                par = parent[cid]
                g[cid] = r1[(par, cid)].inverse() @ g[par] @ r2[(fm[par], fm[cid])]
            if all(g[a] @ r2[(fm[a], fm[s])] @ g[s].inverse() == r1[(a, s)]
                   for a, s in b1.edges() if a in g):
                options.append(g)
        if not options:
            return []
        per_comp.append(options)
    return per_comp


def _face_choices(p1, p2, fm, g, budget) -> Iterator[dict]:
    b1, b2 = p1.base, p2.base
    per_chart = []
    for ch in b1.charts:
        tgt = b2.chart(fm[ch.id]).vanishing
        opts = []
        for image in itertools.permutations(tgt):
            budget.spend()
            m = dict(zip(ch.vanishing, image))
            if all(normalize_sign(g[ch.id].act_lattice(p2.ell_at(fm[ch.id], j))) == p1.ell_at(ch.id, i)
                   for i, j in m.items()):
                opts.append(m)
        if not opts:
            return
        per_chart.append(opts)
    ids = b1.chart_ids
    for combo in itertools.product(*per_chart):
        budget.spend()
        phi = dict(zip(ids, combo))
        ok = True
        for a, s in b1.edges():
            mapped = {phi[s][i]: phi[a][j] for i, j in b1.face_map(a, s).items()}
            if mapped != b2.face_map(fm[a], fm[s]):
                ok = False
                break
        if ok:
            yield phi


def iter_pair_isomorphisms(p1: CharacteristicPair, p2: CharacteristicPair,
                           max_search: int = DEFAULT_MAX_SEARCH) -> Iterator[PairIsomorphism]:
    """All isomorphisms p1 -> p2 in canonical order (chart bijection, conjugators, face maps)."""
    if p1.n != p2.n or pair_invariants(p1) != pair_invariants(p2):
        return
    b1, b2 = p1.base, p2.base
    ids1, ids2 = b1.chart_ids, b2.chart_ids
    budget = _Budget(max_search)
    edges2 = set(b2.edges())
    triples2 = {frozenset(t) for t in b2.triples}
    parent, comps = b1.spanning_forest()
    for image in itertools.permutations(ids2):
        budget.spend()
        fm = dict(zip(ids1, image))
        if any(len(b1.chart(a).vanishing) != len(b2.chart(fm[a]).vanishing) for a in ids1):
            continue
        if set((fm[a], fm[s]) for a, s in b1.edges()) != edges2:
            continue
        if {frozenset(fm[x] for x in t) for t in b1.triples} != triples2:
            continue
        per_comp = _conjugator_choices(p1, p2, fm, comps, parent, budget)
        for combo in itertools.product(*per_comp):
            g = {}
            for part in combo:
                g.update(part)
            for phi in _face_choices(p1, p2, fm, g, budget):
                yield PairIsomorphism(fm, g, phi)


def pair_isomorphic(p1: CharacteristicPair, p2: CharacteristicPair,
                    max_search: int = DEFAULT_MAX_SEARCH) -> Optional[PairIsomorphism]:
    """The canonically first isomorphism witness, or None."""
    return next(iter_pair_isomorphisms(p1, p2, max_search), None)


def relabel_pair(p: CharacteristicPair, g: Mapping[str, SignedPermAut]) -> CharacteristicPair:
    """The pair p' for which (identity charts, conjugators g) is an isomorphism p -> p'.

    rho'_ab = g_a^-1 rho_ab g_b and ell'(a, i) = g_a^-1 . ell(a, i).
    """
    rho = {(a, s): g[a].inverse() @ r @ g[s] for (a, s), r in p.base.aut_cocycle_values().items()}
    ell = {(c, i): normalize_sign(g[c].inverse().act_lattice(v)) for (c, i), v in p.ell.items()}
    return CharacteristicPair(p.base.replace_rho(rho), ell)
