"""Euler class of a local Q^n-action and the classification built on it.

An action is described at nerve level by its characteristic pair together with
a torus-valued cocycle twisted by the pair's rho.  The action has a global
section exactly when that cocycle is a twisted coboundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .basecomplex import BaseComplex, Chart, Overlap, Report
from .cech import (DEFAULT_MAX_SEARCH, AutCocycle, Cochain0, TorusCocycle, check_cocycle,
                   coboundary_aut, coboundary_torus, gauge_solve, pullback_cocycle)
from .charpair import CharacteristicPair, PairIsomorphism, iter_pair_isomorphisms, unimodularity, validate_pair
from .quatcore import InputError, TorusElement

SECTION_NOTE = "torus cochains are locally constant (one value per chart or edge)"


@dataclass(frozen=True)
class ActionData:
    pair: CharacteristicPair
    euler: TorusCocycle

    @property
    def base(self) -> BaseComplex:
        return self.pair.base

    @classmethod
    def from_json(cls, data) -> "ActionData":
        pair = CharacteristicPair.from_json(data)
        e = data.get("euler")
        euler = TorusCocycle.trivial(pair.base) if e is None else TorusCocycle.from_json(e, twist=pair.rho)
        return cls(pair, euler)

    def to_json(self) -> dict:
        out = self.pair.to_json()
        out["euler"] = self.euler.to_json()
        return out


def validate_action(a: ActionData, tol: float = 1e-9) -> Report:
    v = list(validate_pair(a.pair).violations)
    rep = check_cocycle(a.euler, a.base, twist=a.pair.rho, tol=tol)
    v += [f"euler: {x}" for x in rep.violations]
    v += [f"euler fails the twisted cocycle identity on triple {t}" for t in rep.failing_triples]
    return Report(not v, sorted(v))


def euler_vanishes(a: ActionData, tol: float = 1e-9) -> tuple[bool, Optional[Cochain0]]:
    """Whether the Euler class is trivial, with the gauge 0-cochain as witness."""
    theta = coboundary_torus(a.euler, a.base, a.pair.rho, tol)
    return theta is not None, theta


@dataclass(frozen=True)
class ClassifyWitness:
    iso: PairIsomorphism
    gauge: Cochain0

    def to_json(self) -> dict:
        out = self.iso.to_json()
        out["gauge"] = self.gauge.to_json()
        return out


def classify(a1: ActionData, a2: ActionData, max_search: int = DEFAULT_MAX_SEARCH,
             tol: float = 1e-9) -> Optional[ClassifyWitness]:
    """First pair isomorphism under which the pulled-back Euler class of a2 matches that of a1."""
    for w in iter_pair_isomorphisms(a1.pair, a2.pair, max_search):
        pulled = pullback_cocycle(a2.euler, w, a1.base, a2.base)
        theta = gauge_solve(a1.euler, pulled, a1.base, a1.pair.rho, tol)
        if theta is not None:
            return ClassifyWitness(w, theta)
    return None


def canonical_action(pair: CharacteristicPair) -> ActionData:
    return ActionData(pair, TorusCocycle.trivial(pair.base))


# ---------------------------------------------------------------------------
# realisation and extraction

def realize(pair: CharacteristicPair, euler: TorusCocycle, tol: float = 1e-9) -> dict:
    """Chart-wise description of the glued model: canonical local charts plus (A, c, rho, theta) gluings."""
    a = ActionData(pair, euler)
    rep = validate_action(a, tol)
    if not rep.ok:
        raise InputError("cannot realize invalid data: " + "; ".join(rep.violations))
    uni = unimodularity(pair)
    if not uni.ok:
        raise InputError(f"cannot realize a non-unimodular pair ({len(uni.failing)} failing corners)")
    charts = []
    for ch in pair.base.charts:
        entry = ch.to_json()
        entry["isotropy"] = [{"face": i + 1, "vector": list(pair.ell_at(ch.id, i))} for i in ch.vanishing]
        charts.append(entry)
    gluings = []
    for ov in pair.base.overlaps:
        g = ov.to_json()
        g["theta"] = euler[ov.key].to_json()
        gluings.append(g)
    vanishes, _ = euler_vanishes(a, tol)
    return {
        "n": pair.n,
        "charts": charts,
        "gluings": gluings,
        "triples": [list(t) for t in pair.base.triples],
        "globalizable": coboundary_aut(pair.rho, pair.base) is not None,
        "section": vanishes,
        "note": SECTION_NOTE,
    }


def extract(model: dict) -> ActionData:
    """Recover (pair, euler) from a model description produced by :func:`realize`."""
    try:
        n = int(model["n"])
        charts = tuple(Chart.from_json(c) for c in model["charts"])
        overlaps = tuple(Overlap.from_json(g, n) for g in model["gluings"])
        triples = tuple(tuple(str(x) for x in t) for t in model.get("triples", []))
        ell = {}
        for c in model["charts"]:
            for item in c.get("isotropy", []):
                ell[(str(c["id"]), int(item["face"]) - 1)] = tuple(int(v) for v in item["vector"])
        values = {(str(g["to"]), str(g["from"])): TorusElement.from_json(g["theta"]) for g in model["gluings"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model description: {exc}") from exc
    base = BaseComplex(n, charts, overlaps, triples)
    return ActionData(CharacteristicPair(base, ell), TorusCocycle(values))
