"""Finite chart complexes modelling an orbit space with corners.

Each chart is an axis-aligned box in the nonnegative orthant.  An overlap
record with ``src = b`` and ``dst = a`` is the transition
xi_a = A xi_b + c from chart b coordinates into chart a coordinates, together
with the gluing automorphism rho_ab.  Ordered edges are keyed ``(a, b)`` in
that same "into a, from b" sense everywhere in the package.

Codimension-one faces of a chart are indexed by the coordinate that vanishes
on them.  Face gluings across an overlap are derived from (A, c) unless listed
explicitly.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .autgroup import SignedPermAut
from .quatcore import FOUR_PI, InputError

Edge = tuple[str, str]


@dataclass(frozen=True)
class Chart:
    id: str
    box: tuple[tuple[float, float], ...]
    vanishing: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.box)

    def corners(self) -> list[np.ndarray]:
        return [np.array(c, dtype=float) for c in itertools.product(*self.box)]

    def contains(self, xi, tol: float = 1e-9) -> bool:
        xi = np.asarray(xi, dtype=float)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return bool(np.all(xi >= lo - tol) and np.all(xi <= hi + tol))

    def vanishing_at(self, xi, tol: float = 1e-9) -> frozenset[int]:
        return frozenset(i for i in self.vanishing if abs(xi[i]) <= tol)

    @classmethod
    def from_json(cls, data) -> "Chart":
        try:
            box = tuple((float(lo), float(hi)) for lo, hi in data["box"])
            if "vanishing" in data:
                vanishing = tuple(sorted(int(i) - 1 for i in data["vanishing"]))
            else:
                vanishing = tuple(i for i, (lo, _) in enumerate(box) if lo == 0.0)
            return cls(str(data["id"]), box, vanishing)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed chart {data!r}: {exc}") from exc

    def to_json(self) -> dict:
        return {"id": self.id, "box": [list(b) for b in self.box], "vanishing": [i + 1 for i in self.vanishing]}


@dataclass(frozen=True)
class Overlap:
    src: str
    dst: str
    A: tuple[tuple[int, ...], ...]
    c: tuple[float, ...]
    rho: SignedPermAut
    faces: Optional[tuple[tuple[int, int], ...]] = None
    region: Optional[tuple[tuple[float, float], ...]] = None

    @property
    def key(self) -> Edge:
        return (self.dst, self.src)

    @property
    def A_matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=int)

    def apply(self, xi) -> np.ndarray:
        return np.asarray(xi, dtype=float) @ self.A_matrix.T.astype(float) + np.array(self.c)

    @classmethod
    def from_json(cls, data, n: int) -> "Overlap":
        try:
            A = tuple(tuple(int(round(v)) for v in row) for row in data["A"])
            if any(abs(float(v) - round(float(v))) > 0 for row in data["A"] for v in row):
                raise InputError(f"overlap {data.get('from')}->{data.get('to')}: A must be an integer matrix")
            c = tuple(float(v) for v in data.get("c", [0.0] * n))
            rho = SignedPermAut.from_json(data["rho"]) if "rho" in data else SignedPermAut.identity(n)
            faces = None
            if "faces" in data:
                faces = tuple((int(i) - 1, int(j) - 1) for i, j in data["faces"])
            region = None
            if "region" in data:
                region = tuple((float(lo), float(hi)) for lo, hi in data["region"])
            ov = cls(str(data["from"]), str(data["to"]), A, c, rho, faces, region)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed overlap {data!r}: {exc}") from exc
        if len(A) != n or any(len(r) != n for r in A) or len(c) != n or rho.n != n:
            raise InputError(f"overlap {ov.src}->{ov.dst}: data does not match dimension n={n}")
        return ov

    def to_json(self) -> dict:
        out = {"from": self.src, "to": self.dst, "A": [list(r) for r in self.A],
               "c": list(self.c), "rho": self.rho.to_json()}
        if self.faces is not None:
            out["faces"] = [[i + 1, j + 1] for i, j in self.faces]
        if self.region is not None:
            out["region"] = [list(b) for b in self.region]
        return out

    def inverse(self) -> "Overlap":
        A = self.A_matrix
        Ainv = np.linalg.inv(A)
        Ainv_i = np.rint(Ainv).astype(int)
        if np.max(np.abs(Ainv - Ainv_i)) > 1e-9:
            raise InputError(f"overlap {self.src}->{self.dst}: A is not invertible over the integers")
        c = -(Ainv_i @ np.array(self.c))
        faces = None if self.faces is None else tuple((j, i) for i, j in self.faces)
        region = None
        if self.region is not None:
            pts = np.array([self.apply(p) for p in itertools.product(*self.region)])
            region = tuple((float(lo), float(hi)) for lo, hi in zip(pts.min(axis=0), pts.max(axis=0)))
        return Overlap(self.dst, self.src, tuple(tuple(int(v) for v in r) for r in Ainv_i),
                       tuple(float(v) + 0.0 for v in c), self.rho.inverse(), faces, region)


@dataclass(frozen=True)
class BaseComplex:
    n: int
    charts: tuple[Chart, ...]
    overlaps: tuple[Overlap, ...]
    triples: tuple[tuple[str, str, str], ...] = ()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        index = {"chart": {}, "overlap": {}}
        for ch in self.charts:
            if ch.id in index["chart"]:
                raise InputError(f"duplicate chart id {ch.id!r}")
            if ch.n != self.n:
                raise InputError(f"chart {ch.id!r} has dimension {ch.n}, expected {self.n}")
            index["chart"][ch.id] = ch
        for ov in self.overlaps:
            for cid in (ov.src, ov.dst):
                if cid not in index["chart"]:
                    raise InputError(f"overlap {ov.src}->{ov.dst} references unknown chart {cid!r}")
            if ov.key in index["overlap"]:
                raise InputError(f"duplicate overlap {ov.src}->{ov.dst}")
            index["overlap"][ov.key] = ov
        for t in self.triples:
            for cid in t:
                if cid not in index["chart"]:
                    raise InputError(f"triple {list(t)} references unknown chart {cid!r}")
        object.__setattr__(self, "_index", index)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_json(cls, data, complete: bool = True) -> "BaseComplex":
        """Parse the base JSON format; missing reverse overlaps are filled in when ``complete``."""
        try:
            n = int(data["n"])
            charts = tuple(Chart.from_json(c) for c in data["charts"])
            overlaps = tuple(Overlap.from_json(o, n) for o in data.get("overlaps", []))
            triples = tuple(tuple(str(x) for x in t) for t in data.get("triples", []))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed base complex: missing or bad field {exc}") from exc
        if any(len(t) != 3 for t in triples):
            raise InputError("every triple must list exactly three chart ids")
        base = cls(n, charts, overlaps, triples)
        return base.with_inverses() if complete else base

    def to_json(self) -> dict:
        return {"n": self.n, "charts": [c.to_json() for c in self.charts],
                "overlaps": [o.to_json() for o in self.overlaps],
                "triples": [list(t) for t in self.triples]}

    def with_inverses(self) -> "BaseComplex":
        have = {o.key for o in self.overlaps}
        extra = [o.inverse() for o in self.overlaps if (o.src, o.dst) not in have]
        if not extra:
            return self
        return BaseComplex(self.n, self.charts, self.overlaps + tuple(extra), self.triples)

    def replace_rho(self, rho: dict[Edge, SignedPermAut]) -> "BaseComplex":
        overlaps = tuple(Overlap(o.src, o.dst, o.A, o.c, rho.get(o.key, o.rho), o.faces, o.region)
                         for o in self.overlaps)
        return BaseComplex(self.n, self.charts, overlaps, self.triples)

    # -- queries ------------------------------------------------------------

    @property
    def chart_ids(self) -> list[str]:
        return [c.id for c in self.charts]

    def chart(self, cid: str) -> Chart:
        try:
            return self._index["chart"][cid]
        except KeyError:
            raise InputError(f"unknown chart {cid!r}") from None

    def overlap(self, a: str, b: str) -> Optional[Overlap]:
        """The transition into chart a from chart b, if declared."""
        return self._index["overlap"].get((a, b))

    def edges(self) -> list[Edge]:
        return [o.key for o in self.overlaps]

    def nerve_edges(self) -> list[tuple[str, str]]:
        """Unordered nerve edges, each as an id pair in chart-listing order."""
        order = {cid: i for i, cid in enumerate(self.chart_ids)}
        seen = set()
        out = []
        for a, b in self.edges():
            e = (a, b) if order[a] < order[b] else (b, a)
            if a != b and e not in seen:
                seen.add(e)
                out.append(e)
        return sorted(out, key=lambda e: (order[e[0]], order[e[1]]))

    def neighbors(self, cid: str) -> list[str]:
        out = set()
        for a, b in self.nerve_edges():
            if a == cid:
                out.add(b)
            elif b == cid:
                out.add(a)
        order = {c: i for i, c in enumerate(self.chart_ids)}
        return sorted(out, key=order.__getitem__)

    def components(self) -> list[list[str]]:
        """Connected components of the nerve, each in BFS order from its first-listed chart."""
        seen = set()
        comps = []
        for cid in self.chart_ids:
            if cid in seen:
                continue
            comp = []
            queue = deque([cid])
            seen.add(cid)
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in self.neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        queue.append(y)
            comps.append(comp)
        return comps

    def spanning_forest(self) -> tuple[dict[str, Optional[str]], list[list[str]]]:
        """BFS parent map (root -> None) and the components in BFS order."""
        parent: dict[str, Optional[str]] = {}
        comps = self.components()
        for comp in comps:
            parent[comp[0]] = None
            seen = {comp[0]}
            queue = deque([comp[0]])
            while queue:
                x = queue.popleft()
                for y in self.neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        parent[y] = x
                        queue.append(y)
        return parent, comps

    def face_map(self, a: str, b: str) -> dict[int, int]:
        """Glued codimension-one faces across the overlap into a from b: face of b -> face of a."""
        ov = self.overlap(a, b)
        if ov is None:
            return {}
        if ov.faces is not None:
            return dict(ov.faces)
        ca, cb = self.chart(a), self.chart(b)
        A = ov.A_matrix
        out = {}
        for j in ca.vanishing:
            nz = np.flatnonzero(A[j])
            if len(nz) == 1 and int(nz[0]) in cb.vanishing and abs(ov.c[j]) <= 1e-9:
                out[int(nz[0])] = j
        return out

    def aut_cocycle_values(self) -> dict[Edge, SignedPermAut]:
        return {o.key: o.rho for o in self.overlaps}


# ---------------------------------------------------------------------------
# validation

@dataclass
class Report:
    ok: bool
    violations: list[str]

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def validate_base(b: BaseComplex, strict: bool = False, tol: float = 1e-9) -> Report:
    """Structural checks: chart boxes, overlap symmetry, stratification, triple consistency."""
    v: list[str] = []
    for ch in b.charts:
        for i, (lo, hi) in enumerate(ch.box):
            if not lo < hi:
                v.append(f"chart {ch.id}: empty interval in coordinate {i + 1}")
            if lo < 0:
                v.append(f"chart {ch.id}: coordinate {i + 1} leaves the nonnegative orthant")
        expect = tuple(i for i, (lo, _) in enumerate(ch.box) if lo == 0.0)
        if tuple(sorted(ch.vanishing)) != expect:
            v.append(f"chart {ch.id}: vanishing set {[i + 1 for i in ch.vanishing]} inconsistent with box")

    for ov in b.overlaps:
        tag = f"overlap {ov.src}->{ov.dst}"
        A = ov.A_matrix
        det = round(float(np.linalg.det(A)))
        if abs(det) != 1:
            v.append(f"{tag}: linear part has determinant {det}, not invertible over Z")
        if strict:
            k = np.array(ov.c) / FOUR_PI
            if np.max(np.abs(k - np.rint(k))) > tol:
                v.append(f"{tag}: translation not in (4 pi Z)^n")
        rev = b.overlap(ov.src, ov.dst)
        if rev is None:
            v.append(f"{tag}: reverse overlap missing")
        else:
            if not np.array_equal(rev.A_matrix @ A, np.eye(b.n, dtype=int)):
                v.append(f"{tag}: reverse linear part is not the inverse")
            elif np.max(np.abs(rev.A_matrix @ np.array(ov.c) + np.array(rev.c)), initial=0.0) > tol:
                v.append(f"{tag}: reverse translation is not the inverse")
            if rev.rho != ov.rho.inverse():
                v.append(f"{tag}: reverse rho is not the inverse")
        # stratification: glued faces map a face to a face with positive orientation
        for i, j in b.face_map(ov.dst, ov.src).items():
            if i not in b.chart(ov.src).vanishing or j not in b.chart(ov.dst).vanishing:
                v.append(f"{tag}: glued face {i + 1}->{j + 1} is not a boundary face of both charts")
            elif A[j, i] != 1 or np.count_nonzero(A[j]) != 1 or abs(ov.c[j]) > tol:
                v.append(f"{tag}: face {i + 1}->{j + 1} not mapped onto a face preserving the corner")
        if ov.region is not None:
            src, dst = b.chart(ov.src), b.chart(ov.dst)
            for corner in itertools.product(*ov.region):
                p = np.array(corner)
                img = ov.apply(p)
                if not src.contains(p, tol) or not dst.contains(img, tol):
                    v.append(f"{tag}: region corner {list(corner)} not mapped into the target box")
                elif len(src.vanishing_at(p, tol)) != len(dst.vanishing_at(img, tol)):
                    v.append(f"{tag}: region corner {list(corner)} changes stratum")

    for t in b.triples:
        bad_edge = False
        for x, y in itertools.permutations(t, 2):
            if b.overlap(x, y) is None:
                v.append(f"triple {list(t)}: edge {y}->{x} missing")
                bad_edge = True
        if bad_edge:
            continue
        for a, bb, c in itertools.permutations(t):
            ab, bc, ac = b.overlap(a, bb), b.overlap(bb, c), b.overlap(a, c)
            A_comp = ab.A_matrix @ bc.A_matrix
            c_comp = ab.A_matrix @ np.array(bc.c) + np.array(ab.c)
            if not np.array_equal(A_comp, ac.A_matrix) or np.max(np.abs(c_comp - np.array(ac.c))) > tol:
                v.append(f"triple {list(t)}: affine transitions inconsistent on ({a}, {bb}, {c})")
                break
    v = sorted(set(v))
    return Report(not v, v)


def strata(b: BaseComplex, k: int) -> list[list[tuple[str, tuple[int, ...]]]]:
    """Connected components of the codimension-k stratum.

    A component is a sorted list of (chart id, vanishing coordinate set) pieces.
    """
    if not 0 <= k <= b.n:
        raise InputError(f"codimension {k} out of range 0..{b.n}")
    pieces = [(ch.id, S) for ch in b.charts for S in itertools.combinations(ch.vanishing, k)]
    parent = {p: p for p in pieces}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for ov in b.overlaps:
        fm = b.face_map(ov.dst, ov.src)
        for S in itertools.combinations(b.chart(ov.src).vanishing, k):
            if all(i in fm for i in S):
                T = tuple(sorted(fm[i] for i in S))
                if (ov.dst, T) in parent:
                    ra, rb = find((ov.src, S)), find((ov.dst, T))
                    if ra != rb:
                        parent[ra] = rb
    groups = defaultdict(list)
    for p in pieces:
        groups[find(p)].append(p)
    order = {cid: i for i, cid in enumerate(b.chart_ids)}
    comps = [sorted(g, key=lambda p: (order[p[0]], p[1])) for g in groups.values()]
    return sorted(comps, key=lambda g: (order[g[0][0]], g[0][1]))


def affine_compatibility(b: BaseComplex) -> Report:
    """Every transition's linear part must equal rho^{-T} as an integer matrix."""
    v = []
    for ov in b.overlaps:
        if not np.array_equal(ov.A_matrix, ov.rho.inv_transpose().matrix()):
            v.append(f"overlap {ov.src}->{ov.dst}: linear part {[list(r) for r in ov.A]} "
                     f"!= rho^-T {ov.rho.matrix().tolist()}")
    return Report(not v, sorted(v))


def signed_perm_candidates(A) -> list[SignedPermAut]:
    """Elements of Aut(Q^n) whose inverse transpose equals A (empty when A is not a signed permutation)."""
    from .autgroup import enumerate_aut
    A = np.asarray(A)
    return [g for g in enumerate_aut(A.shape[0]) if np.array_equal(g.inv_transpose().matrix(), A)]


def iter_points(b: BaseComplex, rng: np.random.Generator, count: int) -> Iterable[tuple[str, np.ndarray]]:
    """Random (chart, point) samples, cycling through charts in listing order."""
    for i in range(count):
        ch = b.charts[i % len(b.charts)]
        lo = np.array([x[0] for x in ch.box])
        hi = np.array([x[1] for x in ch.box])
        yield ch.id, lo + (hi - lo) * rng.random(b.n)
