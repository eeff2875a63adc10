"""Command-line front end.

Exit codes: 0 the checked property holds, 1 it does not, 2 input error,
3 a search cap was hit.  The structured report goes to stdout as JSON and a
one-line human summary to stderr.
"""
from __future__ import annotations

import argparse
import sys
from typing import Callable, Optional

import numpy as np

from . import cech, charpair, delzant, euler, tetra
from .autgroup import SignedPermAut
from .basecomplex import BaseComplex, affine_compatibility, strata, validate_base
from .config import RunConfig
from .jsonio import dumps, load_json, write_json
from .quatcore import InputError, ResourceLimitError, TorusElement, qmul, regular_action

OK, FALSE, INPUT_ERROR, RESOURCE = 0, 1, 2, 3

Result = tuple[int, dict, str]


# ---------------------------------------------------------------------------
# helpers

def _edge_json(edge) -> dict:
    return {"from": edge[1], "to": edge[0]}


def _twist(cfg: RunConfig, rho: cech.AutCocycle) -> Optional[cech.AutCocycle]:
    return rho if cfg.twisted else None


def _strata_counts(b: BaseComplex) -> list[int]:
    return [len(strata(b, k)) for k in range(b.n + 1)]


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args, cfg: RunConfig) -> Result:
    b = BaseComplex.from_json(load_json(args.file))
    rep = validate_base(b, strict=args.strict)
    aff = affine_compatibility(b)
    report = {"command": "validate", "valid": rep.ok, "violations": rep.violations,
              "strata_counts": _strata_counts(b) if rep.ok else None,
              "affine_compatible": aff.ok, "affine_violations": aff.violations}
    return (OK if rep.ok else FALSE), report, f"{'valid' if rep.ok else 'invalid'} ({len(rep.violations)} violations)"


def cmd_charpair_check(args, cfg: RunConfig) -> Result:
    p = charpair.CharacteristicPair.from_json(load_json(args.file))
    rep = charpair.validate_pair(p)
    uni = charpair.unimodularity(p) if rep.ok else None
    ok = rep.ok and uni.ok
    report = {"command": "charpair check", "valid": rep.ok, "violations": rep.violations,
              "unimodular": None if uni is None else uni.ok,
              "failing_corners": None if uni is None else uni.failing}
    return (OK if ok else FALSE), report, "characteristic pair ok" if ok else "characteristic pair rejected"


def cmd_charpair_isomorphic(args, cfg: RunConfig) -> Result:
    p1 = charpair.CharacteristicPair.from_json(load_json(args.first))
    p2 = charpair.CharacteristicPair.from_json(load_json(args.second))
    w = charpair.pair_isomorphic(p1, p2, cfg.max_search)
    report = {"command": "charpair isomorphic", "isomorphic": w is not None,
              "witness": None if w is None else w.to_json()}
    return (OK if w else FALSE), report, "isomorphic" if w else "not isomorphic"


def cmd_globalize(args, cfg: RunConfig) -> Result:
    b = BaseComplex.from_json(load_json(args.base))
    c = cech.AutCocycle.from_json(load_json(args.cocycle)) if args.cocycle else cech.AutCocycle.from_base(b)
    rep = cech.check_cocycle(c, b)
    if not rep.ok:
        raise InputError("not a cocycle: " + "; ".join(rep.violations + [f"triple {t}" for t in rep.failing_triples]))
    g = cech.coboundary_aut(c, b)
    hol = cech.loop_holonomy_aut(c, b)
    loops = [dict(_edge_json(e), holonomy=h.to_json()) for e, h in hol.items() if not h.is_identity()]
    report = {"command": "globalize", "globalizable": g is not None,
              "cochain": None if g is None else g.to_json(), "nontrivial_holonomy": loops}
    found = g is not None
    return (OK if found else FALSE), report, "globalizable" if found else f"obstructed ({len(loops)} edges with holonomy)"


def _load_action(args) -> euler.ActionData:
    if args.twist is None and args.cocycle is None:
        return euler.ActionData.from_json(load_json(args.base))
    if args.twist is None or args.cocycle is None:
        raise InputError("give either one action file or base, twist and cocycle files")
    data = load_json(args.base)
    b = BaseComplex.from_json(data)
    twist = cech.AutCocycle.from_json(load_json(args.twist))
    b = b.replace_rho(dict(twist.values))
    pair = charpair.CharacteristicPair.from_json(dict(b.to_json(), ell=data.get("ell", [])))
    return euler.ActionData(pair, cech.TorusCocycle.from_json(load_json(args.cocycle), twist=pair.rho))


def cmd_euler_vanishes(args, cfg: RunConfig) -> Result:
    a = _load_action(args)
    twist = _twist(cfg, a.pair.rho)
    rep = cech.check_cocycle(a.euler, a.base, twist, cfg.tol)
    if not rep.ok:
        raise InputError("euler data is not a cocycle: " + "; ".join(rep.violations + [f"triple {t}" for t in rep.failing_triples]))
    theta = cech.coboundary_torus(a.euler, a.base, twist, cfg.tol)
    report = {"command": "euler vanishes", "twisted": cfg.twisted, "vanishes": theta is not None,
              "section_gauge": None if theta is None else theta.to_json(), "note": euler.SECTION_NOTE}
    if theta is None:
        hol = cech.loop_holonomy_torus(a.euler, a.base, twist)
        report["holonomy"] = [dict(_edge_json(e), value=v.to_json()) for e, v in hol.items()
                              if not v.is_identity(cfg.tol)]
    return (OK if theta else FALSE), report, "euler class vanishes" if theta else "euler class is nonzero"


def cmd_classify(args, cfg: RunConfig) -> Result:
    a1 = euler.ActionData.from_json(load_json(args.first))
    a2 = euler.ActionData.from_json(load_json(args.second))
    for a in (a1, a2):
        rep = euler.validate_action(a, cfg.tol)
        if not rep.ok:
            raise InputError("invalid action data: " + "; ".join(rep.violations))
    w = euler.classify(a1, a2, cfg.max_search, cfg.tol)
    report = {"command": "classify", "homeomorphic": w is not None, "witness": None if w is None else w.to_json()}
    return (OK if w else FALSE), report, "equivariantly homeomorphic" if w else "not homeomorphic"


def cmd_realize(args, cfg: RunConfig) -> Result:
    data = load_json(args.pair)
    pair = charpair.CharacteristicPair.from_json(data)
    if args.euler:
        e = cech.TorusCocycle.from_json(load_json(args.euler), twist=pair.rho)
    elif "euler" in data:
        e = cech.TorusCocycle.from_json(data["euler"], twist=pair.rho)
    else:
        e = cech.TorusCocycle.trivial(pair.base)
    model = euler.realize(pair, e, cfg.tol)
    if args.output:
        write_json(args.output, model)
    report = {"command": "realize", "output": args.output, "globalizable": model["globalizable"],
              "section": model["section"], "model": None if args.output else model}
    return OK, report, f"model with {len(model['charts'])} charts and {len(model['gluings'])} gluings"


# -- tetra ------------------------------------------------------------------

def _form_points(form: tetra.DifferentialForm, data: dict, cfg: RunConfig):
    if "points" in data:
        return [np.asarray(p, dtype=float) for p in data["points"]]
    rng = cfg.rng()
    count = min(cfg.samples, 20)
    if form.name == "psi_RQ":
        n = form.dim // 5
        return [tetra.join_point(0.1 + rng.random(n), TorusElement.random(n, rng).coords) for _ in range(count)]
    return [rng.normal(size=form.dim) for _ in range(count)]


def cmd_tetra_closed(args, cfg: RunConfig) -> Result:
    data = load_json(args.file)
    form = tetra.DifferentialForm.from_json(data)
    res = [tetra.max_abs(tetra.exterior_derivative(form, p, cfg.fd_step)) for p in _form_points(form, data, cfg)]
    worst = max(res, default=0.0)
    ok = worst < cfg.tol
    return (OK if ok else FALSE), {"command": "tetra closed", "closed": ok, "max_residual": worst}, \
        f"closed (residual {worst:.2e})" if ok else f"not closed (residual {worst:.2e})"


def cmd_tetra_nondeg(args, cfg: RunConfig) -> Result:
    data = load_json(args.file)
    form = tetra.DifferentialForm.from_json(data)
    ranks = []
    for p in _form_points(form, data, cfg):
        if form.name == "psi_RQ":
            n = form.dim // 5
            xi, q = tetra.split_point(p, n)
            ranks.append(tetra.psi_RQ_nondegenerate(n, xi, TorusElement(q, tol=1e-6))[1])
        else:
            ranks.append(tetra.nondegenerate(form, p)[1])
    full = form.dim // 5 * 4 if form.name == "psi_RQ" else form.dim
    ok = all(r == full for r in ranks)
    report = {"command": "tetra nondeg", "nondegenerate": ok, "ranks": ranks, "expected_rank": full}
    return (OK if ok else FALSE), report, "nondegenerate" if ok else "degenerate"


def cmd_tetra_trimoment(args, cfg: RunConfig) -> Result:
    rng = cfg.rng()
    worst, inv = 0.0, 0.0
    for _ in range(cfg.samples):
        h = rng.normal(size=(args.n, 4))
        v = rng.normal(size=4 * args.n)
        d = tetra.TriVector(rng.normal(size=(args.n, 3, 3)))
        worst = max(worst, tetra.trimoment_verify(h, v, d, cfg.fd_step)["residual"])
        g = TorusElement.random(args.n, rng)
        moved = regular_action(g, h)
        inv = max(inv, float(np.max(np.abs(tetra.moment_H(moved) - tetra.moment_H(h)))))
    ok = worst < 1e-6 and inv < 1e-12
    report = {"command": "tetra trimoment", "n": args.n, "samples": cfg.samples,
              "max_residual": worst, "max_invariance_error": inv, "holds": ok}
    return (OK if ok else FALSE), report, f"tri-moment residual {worst:.2e}"


def _section_and_points(args, cfg: RunConfig):
    data = load_json(args.file)
    sec = tetra.SectionMap.from_json(data.get("section", data))
    if "points" in data:
        pts = np.asarray(data["points"], dtype=float)
    else:
        lo, hi = data.get("range", [0.1, 1.0])
        pts = lo + (hi - lo) * cfg.rng().random((min(cfg.samples, 10), sec.n))
    return sec, pts


def cmd_tetra_lagrangian(args, cfg: RunConfig) -> Result:
    sec, pts = _section_and_points(args, cfg)
    rep = tetra.lagrangian_check(sec, pts, step=cfg.fd_step)
    return (OK if rep["lagrangian"] else FALSE), dict(command="tetra lagrangian", **rep), \
        "Lagrangian" if rep["lagrangian"] else "not Lagrangian"


def cmd_tetra_liouville(args, cfg: RunConfig) -> Result:
    sec, pts = _section_and_points(args, cfg)
    rep = tetra.liouville_chart(sec, pts, cfg.rng(), step=cfg.fd_step)
    return (OK if rep["preserved"] else FALSE), dict(command="tetra liouville", **rep), \
        "psi preserved" if rep["preserved"] else "psi not preserved"


def cmd_tetra_decompose(args, cfg: RunConfig) -> Result:
    data = load_json(args.file)
    try:
        n = int(data["n"])
        A = np.array(data["A"], dtype=float)
        c = np.array(data.get("c", [0.0] * n), dtype=float)
        rho = SignedPermAut.from_json(data["fiber_aut"]) if "fiber_aut" in data else SignedPermAut.identity(n)
        sec = tetra.SectionMap.from_json(data.get("section", {"kind": "constant", "value": TorusElement.identity(n).to_json()}))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed fibre map: {exc}") from exc

    def phi(xi, u):
        return A @ xi + c, qmul(tetra.act_fiber(rho, u), sec(xi))
    dec = tetra.fiber_map_decompose(phi, n, cfg.rng(), samples=min(cfg.samples, 10))
    return (OK if dec.normal_form else FALSE), dict(command="tetra decompose", **dec.to_json()), \
        "normal form recovered" if dec.normal_form else dec.message


# -- delzant ----------------------------------------------------------------

def _load_delzant(path):
    data = load_json(path)
    b = BaseComplex.from_json(data)
    lam_data = data.get("lambda")
    lam = delzant.LagrangianCocycle.trivial(b) if lam_data is None else delzant.LagrangianCocycle.from_json(lam_data, b)
    return b, lam


def cmd_delzant_check(args, cfg: RunConfig) -> Result:
    b, lam = _load_delzant(args.file)
    rep = delzant.lagrangian_class_check(b, lam, cfg.rng())
    return (OK if rep.ok else FALSE), {"command": "delzant check", "valid": rep.ok, "violations": rep.violations}, \
        "Delzant data ok" if rep.ok else "Delzant data rejected"


def cmd_delzant_compare(args, cfg: RunConfig) -> Result:
    b1, l1 = _load_delzant(args.first)
    b2, l2 = _load_delzant(args.second)
    for b, lam in ((b1, l1), (b2, l2)):
        rep = delzant.lagrangian_class_check(b, lam, cfg.rng())
        if not rep.ok:
            raise InputError("invalid Delzant data: " + "; ".join(rep.violations))
    w = delzant.delzant_compare(b1, l1, b2, l2, cfg.max_search, rng=cfg.rng())
    report = {"command": "delzant compare", "equivalent": w is not None, "witness": None if w is None else w.to_json()}
    return (OK if w else FALSE), report, "equivalent" if w else "not equivalent"


def cmd_delzant_realize(args, cfg: RunConfig) -> Result:
    b, lam = _load_delzant(args.file)
    desc = delzant.delzant_realize(b, lam, cfg.rng())
    if args.output:
        write_json(args.output, desc)
    ok = desc["psi_consistent"]
    report = {"command": "delzant realize", "output": args.output, "psi_residual": desc["psi_residual"],
              "psi_consistent": ok, "description": None if args.output else desc}
    return (OK if ok else FALSE), report, f"realized (psi residual {desc['psi_residual']:.2e})"


# ---------------------------------------------------------------------------
# parser

def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    base = RunConfig()
    parser.add_argument("--tol", type=float, default=d(base.tol), help="numerical tolerance")
    parser.add_argument("--fd-step", type=float, default=d(base.fd_step), help="finite-difference step")
    parser.add_argument("--samples", type=int, default=d(base.samples), help="sample count")
    parser.add_argument("--seed", type=int, default=d(base.seed), help="random seed")
    parser.add_argument("--max-search", type=int, default=d(base.max_search), help="search cap")
    tw = parser.add_mutually_exclusive_group()
    tw.add_argument("--twisted", dest="twisted", action="store_true", default=d(True),
                    help="twist torus cocycles by rho (default)")
    tw.add_argument("--untwisted", dest="twisted", action="store_false", default=d(True),
                    help="treat torus cocycles as untwisted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quatoric", description="Local quaternionic torus actions at desk scale.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(subparsers, name, fn: Callable, help_text: str):
        p = subparsers.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    p = add(sub, "validate", cmd_validate, "validate a base complex")
    p.add_argument("file")
    p.add_argument("--strict", action="store_true", help="require translations in (4 pi Z)^n")

    cp = sub.add_parser("charpair", help="characteristic pairs").add_subparsers(dest="sub", required=True)
    add(cp, "check", cmd_charpair_check, "validate a pair and its unimodularity").add_argument("file")
    p = add(cp, "isomorphic", cmd_charpair_isomorphic, "search for a pair isomorphism")
    p.add_argument("first")
    p.add_argument("second")

    p = add(sub, "globalize", cmd_globalize, "is the Aut cocycle a coboundary")
    p.add_argument("base")
    p.add_argument("cocycle", nargs="?")

    ep = sub.add_parser("euler", help="Euler class").add_subparsers(dest="sub", required=True)
    p = add(ep, "vanishes", cmd_euler_vanishes, "does the Euler class vanish")
    p.add_argument("base")
    p.add_argument("twist", nargs="?")
    p.add_argument("cocycle", nargs="?")

    p = add(sub, "classify", cmd_classify, "compare two actions")
    p.add_argument("first")
    p.add_argument("second")

    p = add(sub, "realize", cmd_realize, "build a model description from a pair and an Euler cocycle")
    p.add_argument("pair")
    p.add_argument("euler", nargs="?")
    p.add_argument("-o", "--output")

    tp = sub.add_parser("tetra", help="tetraplectic checks").add_subparsers(dest="sub", required=True)
    add(tp, "closed", cmd_tetra_closed, "is a form closed").add_argument("file")
    add(tp, "nondeg", cmd_tetra_nondeg, "is a 4-form nondegenerate").add_argument("file")
    add(tp, "trimoment", cmd_tetra_trimoment, "tri-moment identity on random samples").add_argument(
        "--n", type=int, default=1)
    add(tp, "lagrangian", cmd_tetra_lagrangian, "is a section Lagrangian").add_argument("file")
    add(tp, "liouville", cmd_tetra_liouville, "does the Liouville chart preserve psi").add_argument("file")
    add(tp, "decompose", cmd_tetra_decompose, "normal form of a fibre map").add_argument("file")

    dp = sub.add_parser("delzant", help="Delzant-type data").add_subparsers(dest="sub", required=True)
    add(dp, "check", cmd_delzant_check, "validate (B, lambda)").add_argument("file")
    p = add(dp, "compare", cmd_delzant_compare, "compare two (B, lambda)")
    p.add_argument("first")
    p.add_argument("second")
    p = add(dp, "realize", cmd_delzant_realize, "realize (B, lambda)")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    return parser


def dispatch(argv=None) -> tuple[int, dict, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = INPUT_ERROR if exc.code not in (0, None) else OK
        return code, {"error": "usage"}, "bad arguments"
    try:
        cfg = RunConfig(args.tol, args.fd_step, args.samples, args.seed, args.max_search, args.twisted)
        code, report, summary = args.func(args, cfg)
        report["config"] = cfg.to_json()
        return code, report, summary
    except InputError as exc:
        return INPUT_ERROR, {"error": "input", "message": str(exc)}, f"input error: {exc}"
    except ResourceLimitError as exc:
        return RESOURCE, {"error": "resource", "message": str(exc)}, f"resource limit: {exc}"


def main(argv=None) -> int:
    code, report, summary = dispatch(argv)
    sys.stdout.write(dumps(report) + "\n")
    sys.stderr.write(summary + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
