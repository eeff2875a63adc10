"""Numerical exterior calculus for tetraplectic geometry.

Forms live on an ambient R^d and are stored as sparse tables mapping strictly
increasing index tuples to coefficients, either constant or produced by a
field callable.  Two standard 4-forms are provided:

* ``psi_H(n)`` on H^n = R^{4n}: the sum of the volume forms of the factors.
* ``psi_RQ(n)`` on R^n x (R^4)^n, coordinates (xi_1..xi_n, q_1, .., q_n):
  sum_k d xi_k ^ nu_k, where nu_k = -8 i_q vol_4 / |q|^4 on the k-th factor.
  nu restricts to the bi-invariant volume form of S^3, normalised to
  d theta_1 ^ d theta_2 ^ d theta_3 at the identity in exponential
  coordinates.  It is closed on R^4 minus the origin.

Tri-vectors are written in the basis H, X, Y of su(2), which correspond to the
quaternion units i, j, k; a 3-vector is identified with a number through
X ^ Y ^ H -> 1.  The fundamental field of U is h -> U h (left multiplication).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .autgroup import SignedPermAut
from .quatcore import InputError, TorusElement, exp_su2, qmul, qnorm

Terms = dict[tuple[int, ...], float]
DEFAULT_STEP = 1e-5


# ---------------------------------------------------------------------------
# sparse algebra on index tuples

def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def wedge_terms(a: Terms, b: Terms) -> Terms:
    out: Terms = {}
    for I, x in a.items():
        for J, y in b.items():
            s, K = _sort_sign(I + J)
            if s:
                out[K] = out.get(K, 0.0) + s * x * y
    return {K: v for K, v in out.items() if v != 0.0}


def interior_terms(terms: Terms, v) -> Terms:
    """Contraction i_v of a form value with a vector v."""
    v = np.asarray(v, dtype=float)
    out: Terms = {}
    for I, a in terms.items():
        for p, j in enumerate(I):
            if v[j] != 0.0:
                K = I[:p] + I[p + 1:]
                out[K] = out.get(K, 0.0) + (-1) ** p * a * v[j]
    return out


def apply_terms(terms: Terms, vectors) -> float:
    """omega(v_1, ..., v_k) for a form value and k vectors (rows of ``vectors``)."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    total = 0.0
    for I, a in terms.items():
        total += a * float(np.linalg.det(V[:, list(I)]))
    return total


def max_abs(terms: Terms) -> float:
    return max((abs(v) for v in terms.values()), default=0.0)


def subtract_terms(a: Terms, b: Terms) -> Terms:
    out = dict(a)
    for K, v in b.items():
        out[K] = out.get(K, 0.0) - v
    return out


# ---------------------------------------------------------------------------
# forms

class DifferentialForm:
    """A k-form on R^d, constant (``terms``) or given pointwise by ``field``."""

    def __init__(self, degree: int, dim: int, terms: Optional[Terms] = None,
                 field: Optional[Callable[[np.ndarray], Terms]] = None, name: Optional[str] = None):
        if (terms is None) == (field is None):
            raise InputError("give exactly one of constant terms or a field")
        self.degree, self.dim, self.name = degree, dim, name
        self._field = field
        self.terms: Optional[Terms] = None
        if terms is not None:
            clean = {}
            for I, a in terms.items():
                s, K = _sort_sign(I)
                if len(I) != degree or any(not 0 <= i < dim for i in I):
                    raise InputError(f"index tuple {I} invalid for a {degree}-form on R^{dim}")
                if s and a != 0.0:
                    clean[K] = clean.get(K, 0.0) + s * float(a)
            self.terms = clean

    @property
    def is_constant(self) -> bool:
        return self.terms is not None

    def at(self, point) -> Terms:
        if self.terms is not None:
            return dict(self.terms)
        return self._field(np.asarray(point, dtype=float))

    def __call__(self, point, vectors) -> float:
        return apply_terms(self.at(point), vectors)

    def interior(self, v, point=None) -> Terms:
        return interior_terms(self.at(point), v)

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        if self.dim != other.dim:
            raise InputError("wedge of forms on different spaces")
        deg = self.degree + other.degree
        if self.is_constant and other.is_constant:
            return DifferentialForm(deg, self.dim, wedge_terms(self.terms, other.terms))
        return DifferentialForm(deg, self.dim, field=lambda p: wedge_terms(self.at(p), other.at(p)))

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        if (self.degree, self.dim) != (other.degree, other.dim):
            raise InputError("sum of forms of different type")
        if self.is_constant and other.is_constant:
            out = dict(self.terms)
            for K, v in other.terms.items():
                out[K] = out.get(K, 0.0) + v
            return DifferentialForm(self.degree, self.dim, out)
        return DifferentialForm(self.degree, self.dim,
                                field=lambda p: subtract_terms(self.at(p), {K: -v for K, v in other.at(p).items()}))

    def scale(self, s: float) -> "DifferentialForm":
        if self.is_constant:
            return DifferentialForm(self.degree, self.dim, {K: s * v for K, v in self.terms.items()})
        return DifferentialForm(self.degree, self.dim, field=lambda p: {K: s * v for K, v in self.at(p).items()})

    @classmethod
    def from_json(cls, data) -> "DifferentialForm":
        try:
            if "field" in data:
                name = str(data["field"])
                if not name.startswith("builtin:"):
                    raise InputError(f"unknown field form {name!r}")
                return builtin_form(name[len("builtin:"):], int(data["dim"]))
            terms = {tuple(int(i) - 1 for i in t["idx"]): float(t["coef"]) for t in data["terms"]}
            return cls(int(data["degree"]), int(data["dim"]), terms)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed form: {exc}") from exc

    def to_json(self) -> dict:
        if self.name is not None:
            return {"degree": self.degree, "dim": self.dim, "field": f"builtin:{self.name}"}
        if not self.is_constant:
            raise InputError("field forms without a builtin name cannot be serialised")
        return {"degree": self.degree, "dim": self.dim,
                "terms": [{"idx": [i + 1 for i in K], "coef": v} for K, v in sorted(self.terms.items())]}


def psi_H(n: int) -> DifferentialForm:
    terms = {tuple(range(4 * k, 4 * k + 4)): 1.0 for k in range(n)}
    form = DifferentialForm(4, 4 * n, terms)
    form.name = "psi_H"
    return form


def omega_std(m: int) -> DifferentialForm:
    """Standard symplectic form sum dx_{2i-1} ^ dx_{2i} on R^m (m even)."""
    if m % 2:
        raise InputError("symplectic form needs an even dimension")
    form = DifferentialForm(2, m, {(2 * i, 2 * i + 1): 1.0 for i in range(m // 2)})
    form.name = "omega_std"
    return form


def nu_terms(q) -> Terms:
    """-8 i_q vol_4 / |q|^4 on R^4 (indices 0..3 = w, x, y, z)."""
    w, x, y, z = q
    s = -8.0 / float(np.dot(q, q)) ** 2
    return {(1, 2, 3): s * w, (0, 2, 3): -s * x, (0, 1, 3): s * y, (0, 1, 2): -s * z}


def psi_RQ(n: int) -> DifferentialForm:
    def fld(p):
        out: Terms = {}
        for k in range(n):
            q = p[n + 4 * k: n + 4 * k + 4]
            off = n + 4 * k
            for I, a in nu_terms(q).items():
                out[(k,) + tuple(off + i for i in I)] = a
        return out
    return DifferentialForm(4, 5 * n, field=fld, name="psi_RQ")


def builtin_form(name: str, dim: int) -> DifferentialForm:
    if name == "psi_H" and dim % 4 == 0:
        return psi_H(dim // 4)
    if name == "psi_RQ" and dim % 5 == 0:
        return psi_RQ(dim // 5)
    if name == "omega_std":
        return omega_std(dim)
    raise InputError(f"no builtin form {name!r} on R^{dim}")


# ---------------------------------------------------------------------------
# calculus

def _check_step(step: float):
    if not step > 0:
        raise InputError(f"finite-difference step must be positive, got {step}")


def exterior_derivative(form: DifferentialForm, point, step: float = DEFAULT_STEP) -> Terms:
    """Value of d(form) at a point, by central differences of the coefficients."""
    _check_step(step)
    if form.is_constant:
        return {}
    p = np.asarray(point, dtype=float)
    out: Terms = {}
    for j in range(form.dim):
        e = np.zeros(form.dim)
        e[j] = step
        plus, minus = form.at(p + e), form.at(p - e)
        for I in set(plus) | set(minus):
            dj = (plus.get(I, 0.0) - minus.get(I, 0.0)) / (2 * step)
            s, K = _sort_sign((j,) + I)
            if s and dj != 0.0:
                out[K] = out.get(K, 0.0) + s * dj
    return out


def exterior_derivative_form(form: DifferentialForm, step: float = DEFAULT_STEP) -> DifferentialForm:
    if form.is_constant:
        return DifferentialForm(form.degree + 1, form.dim, {})
    return DifferentialForm(form.degree + 1, form.dim, field=lambda p: exterior_derivative(form, p, step))


def contraction_matrix(terms: Terms, dim: int) -> np.ndarray:
    """Column j lists the coefficients of i_{e_j} of a 4-form value over all 3-index tuples."""
    rows = {K: r for r, K in enumerate(itertools.combinations(range(dim), 3))}
    M = np.zeros((len(rows), dim))
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        for K, v in interior_terms(terms, e).items():
            M[rows[K], j] += v
    return M


def numerical_rank(M: np.ndarray, rel: float = 1e-9) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel * s[0]))


def nondegenerate(form: DifferentialForm, point=None, rel: float = 1e-9) -> tuple[bool, int]:
    """Whether v -> i_v psi is injective at the point; returns (flag, rank)."""
    if form.degree != 4:
        raise InputError("nondegeneracy is defined here for 4-forms")
    r = numerical_rank(contraction_matrix(form.at(point), form.dim), rel)
    return r == form.dim, r


def jacobian(F: Callable[[np.ndarray], np.ndarray], point, step: float = DEFAULT_STEP) -> np.ndarray:
    _check_step(step)
    p = np.asarray(point, dtype=float)
    cols = []
    for j in range(p.shape[0]):
        e = np.zeros_like(p)
        e[j] = step
        cols.append((np.asarray(F(p + e)) - np.asarray(F(p - e))) / (2 * step))
    return np.stack(cols, axis=1)


def pullback_terms(terms: Terms, J: np.ndarray, degree: int) -> Terms:
    """(F^* omega)_K = sum_I a_I det J[I, K], for a form value and a Jacobian J (target x source)."""
    m = J.shape[1]
    Ks = np.array(list(itertools.combinations(range(m), degree)), dtype=int).reshape(-1, degree)
    if Ks.shape[0] == 0 or degree == 0:
        return {(): sum(terms.values())} if degree == 0 else {}
    acc = np.zeros(Ks.shape[0])
    for I, a in terms.items():
        sub = J[list(I)]  # degree x m
        blocks = np.transpose(sub[:, Ks], (1, 0, 2))  # (#K, degree, degree)
        acc += a * np.linalg.det(blocks)
    return {tuple(int(i) for i in K): float(v) for K, v in zip(Ks, acc) if v != 0.0}


def pullback(form: DifferentialForm, F: Callable[[np.ndarray], np.ndarray], point,
             step: float = DEFAULT_STEP) -> Terms:
    """Value of F^* form at a point of the source, with the Jacobian taken by central differences."""
    p = np.asarray(point, dtype=float)
    J = jacobian(F, p, step)
    return pullback_terms(form.at(np.asarray(F(p), dtype=float)), J, form.degree)


# ---------------------------------------------------------------------------
# points of R^n x Q^n

def split_point(p, n: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    return p[:n], p[n:].reshape(n, 4)


def join_point(xi, q) -> np.ndarray:
    return np.concatenate([np.asarray(xi, dtype=float).ravel(), np.asarray(q, dtype=float).ravel()])


def exp_chart(xi0, u0: TorusElement) -> Callable[[np.ndarray], np.ndarray]:
    """(xi, theta) in R^n x R^{3n} -> (xi, u0 exp(theta)) in the ambient R^{5n}."""
    n = u0.n
    base = np.asarray(xi0, dtype=float)

    def C(z):
        z = np.asarray(z, dtype=float)
        q = qmul(u0.coords, exp_su2(z[n:].reshape(n, 3)).coords)
        return join_point(z[:n], q)
    C.origin = np.concatenate([base, np.zeros(3 * n)])
    return C


def psi_RQ_nondegenerate(n: int, xi, u: TorusElement) -> tuple[bool, int]:
    """Nondegeneracy of psi_RQ on the tangent space of R^n x Q^n at (xi, u)."""
    C = exp_chart(xi, u)
    r = numerical_rank(contraction_matrix(pullback(psi_RQ(n), C, C.origin), 4 * n))
    return r == 4 * n, r


# ---------------------------------------------------------------------------
# tri-moment map

BASIS_HXY = (np.array([0.0, 1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 0.0]), np.array([0.0, 0.0, 0.0, 1.0]))


@dataclass(frozen=True)
class TriVector:
    """Per factor, three su(2) vectors (U, V, W) in (H, X, Y) coordinates; shape (n, 3, 3)."""
    factors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.factors, dtype=float)
        if arr.ndim != 3 or arr.shape[1:] != (3, 3):
            raise InputError(f"tri-vector data must have shape (n, 3, 3), got {arr.shape}")
        object.__setattr__(self, "factors", arr)

    @classmethod
    def standard(cls, n: int) -> "TriVector":
        """X ^ Y ^ H in every factor."""
        one = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        return cls(np.repeat(one[None], n, axis=0))

    def scalars(self) -> np.ndarray:
        """Each factor's 3-vector as a number under X ^ Y ^ H -> 1."""
        xyh = self.factors[:, :, [1, 2, 0]]
        return np.linalg.det(xyh)


def moment_H(h) -> np.ndarray:
    """mu(h) = -1/4 (|h_1|^4, ..., |h_n|^4)."""
    return -0.25 * qnorm(np.asarray(h, dtype=float).reshape(-1, 4)) ** 4


def fundamental_field(U, h) -> np.ndarray:
    """Velocity of t -> exp(t U) h at t = 0 for U in (H, X, Y) coordinates."""
    quat = U[0] * BASIS_HXY[0] + U[1] * BASIS_HXY[1] + U[2] * BASIS_HXY[2]
    return qmul(quat, h)


def trimoment_verify(h, v, delta: TriVector, step: float = DEFAULT_STEP) -> dict:
    """Compare d mu_h(v)(delta) with sum_i psi(U_i^, V_i^, W_i^, v) on H^n."""
    _check_step(step)
    h = np.asarray(h, dtype=float).reshape(-1, 4)
    n = h.shape[0]
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != 4 * n or delta.factors.shape[0] != n:
        raise InputError("tangent vector and tri-vector must match the number of factors")
    flat = h.ravel()
    dmu = (moment_H(flat + step * v) - moment_H(flat - step * v)) / (2 * step)
    lhs = float(np.dot(dmu, delta.scalars()))
    psi = psi_H(n).terms
    rhs = 0.0
    for i in range(n):
        vecs = []
        for U in delta.factors[i]:
            full = np.zeros(4 * n)
            full[4 * i: 4 * i + 4] = fundamental_field(U, h[i])
            vecs.append(full)
        vecs.append(v)
        rhs += apply_terms(psi, np.array(vecs))
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)}


# ---------------------------------------------------------------------------
# sections

@dataclass(frozen=True)
class SectionMap:
    """A map from the base R^n into (R^4)^n, used as a section xi -> (xi, f(xi)).

    kinds:
      ``constant``              f(xi) = value
      ``exp_poly``              f(xi)_k = exp_su2(p_k(xi)), p_k a polynomial triple
      ``quartic_root_section``  f(xi)_k = xi_k^(1/4) (a real quaternion, not unit)

    ``coeffs[k][m]`` is a list of (coefficient, exponent tuple) monomials.
    """
    n: int
    kind: str = "constant"
    value: Optional[TorusElement] = None
    coeffs: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "constant":
            if self.value is None:
                object.__setattr__(self, "value", TorusElement.identity(self.n))
            if self.value.n != self.n:
                raise InputError("constant section has the wrong number of factors")
        elif self.kind == "exp_poly":
            if self.coeffs is None or len(self.coeffs) != self.n or any(len(c) != 3 for c in self.coeffs):
                raise InputError("exp_poly section needs n polynomial triples")
            frozen = tuple(tuple(tuple((float(a), tuple(int(e) for e in ex)) for a, ex in comp)
                                 for comp in triple) for triple in self.coeffs)
            for triple in frozen:
                for comp in triple:
                    for _, ex in comp:
                        if len(ex) != self.n or min(ex, default=0) < 0:
                            raise InputError("monomial exponents must be n nonnegative integers")
            object.__setattr__(self, "coeffs", frozen)
        elif self.kind != "quartic_root_section":
            raise InputError(f"unknown section kind {self.kind!r}")

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "exp_poly":
            return all(all(ex == (0,) * self.n for _, ex in comp) for triple in self.coeffs for comp in triple)
        return False

    def lie_values(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = np.zeros((self.n, 3))
        for k, triple in enumerate(self.coeffs):
            for m, comp in enumerate(triple):
                out[k, m] = sum(a * float(np.prod(xi ** np.array(ex))) for a, ex in comp)
        return out

    def __call__(self, xi) -> np.ndarray:
        if self.kind == "constant":
            return np.array(self.value.coords)
        if self.kind == "exp_poly":
            return np.array(exp_su2(self.lie_values(xi)).coords)
        xi = np.asarray(xi, dtype=float)
        out = np.zeros((self.n, 4))
        out[:, 0] = np.maximum(xi, 0.0) ** 0.25
        return out

    def torus(self, xi) -> TorusElement:
        if self.kind == "quartic_root_section":
            raise InputError("the quartic-root section does not take values in Q^n")
        return TorusElement(self(xi), tol=1e-6)

    @classmethod
    def constant(cls, value: TorusElement) -> "SectionMap":
        return cls(value.n, "constant", value)

    @classmethod
    def from_json(cls, data, n: Optional[int] = None) -> "SectionMap":
        if isinstance(data, list):
            value = TorusElement.from_json(data)
            return cls(value.n, "constant", value)
        try:
            kind = data.get("kind", "constant")
            if kind == "constant":
                value = TorusElement.from_json(data["value"])
                return cls(value.n, kind, value)
            if kind == "exp_poly":
                coeffs = tuple(tuple(tuple((m[0], tuple(m[1])) for m in comp) for comp in triple)
                               for triple in data["coeffs"])
                return cls(len(coeffs), kind, coeffs=coeffs)
            return cls(int(data.get("n", n)), kind)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed section: {exc}") from exc

    def to_json(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value.to_json()}
        if self.kind == "exp_poly":
            return {"kind": "exp_poly",
                    "coeffs": [[[[a, list(ex)] for a, ex in comp] for comp in triple] for triple in self.coeffs]}
        return {"kind": self.kind, "n": self.n}


def _sample_points(n: int, rng: np.random.Generator, count: int, lo: float = 0.1, hi: float = 1.0) -> np.ndarray:
    return lo + (hi - lo) * rng.random((count, n))


def lagrangian_residual(f: SectionMap, xi, step: float = DEFAULT_STEP) -> float:
    """Largest coefficient of f^* psi_RQ at xi, pulling back along xi -> (xi, f(xi))."""
    n = f.n
    F = lambda z: join_point(z, f(z))
    return max_abs(pullback(psi_RQ(n), F, xi, step))


def lagrangian_check(f: SectionMap, points, tol: float = 1e-7, step: float = DEFAULT_STEP) -> dict:
    res = [lagrangian_residual(f, p, step) for p in np.atleast_2d(points)]
    worst = max(res, default=0.0)
    return {"lagrangian": worst < tol, "max_residual": worst}


def liouville_map(f: SectionMap) -> Callable[[np.ndarray], np.ndarray]:
    """Psi(xi, q) = (xi, q f(xi)) on the ambient R^n x (R^4)^n."""
    n = f.n

    def Psi(p):
        xi, q = split_point(p, n)
        return join_point(xi, qmul(q, f(xi)))
    return Psi


def liouville_residual(f: SectionMap, xi, u: TorusElement, step: float = DEFAULT_STEP) -> float:
    """max |Psi^* psi - psi| on the tangent space of R^n x Q^n at (xi, u)."""
    n = f.n
    C = exp_chart(xi, u)
    Psi = liouville_map(f)
    moved = pullback(psi_RQ(n), lambda z: Psi(C(z)), C.origin, step)
    ref = pullback(psi_RQ(n), C, C.origin, step)
    return max_abs(subtract_terms(moved, ref))


def liouville_chart(f: SectionMap, points, rng: np.random.Generator, tol: float = 1e-7,
                    step: float = DEFAULT_STEP) -> dict:
    res = [liouville_residual(f, p, TorusElement.random(f.n, rng), step) for p in np.atleast_2d(points)]
    worst = max(res, default=0.0)
    return {"preserved": worst < tol, "max_residual": worst}


# ---------------------------------------------------------------------------
# fibre-preserving maps in normal form

FiberMap = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def act_fiber(rho: SignedPermAut, q, reflect: bool = True) -> np.ndarray:
    return rho.act_quaternions_reflect(q) if reflect else rho.act_quaternions(q)


def compose_fiber_map(rho: SignedPermAut, c, f: Callable[[np.ndarray], np.ndarray],
                      reflect: bool = True) -> FiberMap:
    """phi(xi, u) = (rho^{-T} xi + c, rho(u) f(xi)).

    With ``reflect`` the sign flips act on the fibre by quaternionic conjugation,
    which is what makes phi preserve psi_RQ when a base coordinate changes sign.
    """
    A = rho.inv_transpose().matrix().astype(float)
    c = np.asarray(c, dtype=float)

    def phi(xi, u):
        xi = np.asarray(xi, dtype=float)
        return A @ xi + c, qmul(act_fiber(rho, u, reflect), f(xi))
    return phi


@dataclass
class FiberDecomposition:
    normal_form: bool
    rho: Optional[SignedPermAut]
    c: Optional[np.ndarray]
    section: Optional[Callable[[np.ndarray], np.ndarray]]
    residual: float
    message: str = ""
    samples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"normal_form": self.normal_form,
                "rho": None if self.rho is None else self.rho.to_json(),
                "c": None if self.c is None else [float(x) for x in self.c],
                "section_samples": [{"xi": list(map(float, x)), "value": np.asarray(v).tolist()}
                                    for x, v in self.samples],
                "residual": self.residual, "message": self.message}


def fiber_map_decompose(phi: FiberMap, n: int, rng: np.random.Generator, samples: int = 10,
                        tol: float = 1e-9, reflect: bool = True) -> FiberDecomposition:
    """Recover (rho, c, f) with phi(xi, u) = (rho^{-T} xi + c, rho(u) f(xi))."""
    ident = TorusElement.identity(n).coords
    c = np.asarray(phi(np.zeros(n), ident)[0], dtype=float)
    A = np.stack([np.asarray(phi(np.eye(n)[j], ident)[0]) - c for j in range(n)], axis=1)
    try:
        rho = SignedPermAut.from_matrix(A, tol=tol)
    except InputError as exc:
        return FiberDecomposition(False, None, c, None, float("inf"), f"not in normal form: {exc}")
    section = lambda xi: np.asarray(phi(np.asarray(xi, dtype=float), ident)[1])
    rebuilt = compose_fiber_map(rho, c, section, reflect)
    worst = 0.0
    table = []
    for _ in range(samples):
        xi = rng.normal(size=n)
        u = TorusElement.random(n, rng).coords
        b0, f0 = phi(xi, u)
        b1, f1 = rebuilt(xi, u)
        worst = max(worst, float(np.max(np.abs(np.asarray(b0) - b1))), float(np.max(np.abs(np.asarray(f0) - f1))))
        table.append((xi, section(xi)))
    ok = worst <= max(tol, 1e-9) * 10
    return FiberDecomposition(ok, rho, c, section, worst, "" if ok else "recomposition does not match", table)


# ---------------------------------------------------------------------------
# cut moment map

def cut_moment(xi, z, index: Sequence[int], q: Optional[TorusElement] = None) -> np.ndarray:
    """(xi_i - |z_i|^4) for i in the index set (0-based); q is carried but unused."""
    xi = np.asarray(xi, dtype=float)
    z = np.asarray(z, dtype=float).reshape(-1, 4)
    index = list(index)
    if len(index) != z.shape[0]:
        raise InputError("one quaternion z_i is needed per index")
    if any(not 0 <= i < xi.shape[0] for i in index):
        raise InputError(f"index set {index} out of range for n={xi.shape[0]}")
    return xi[index] - qnorm(z) ** 4


def on_cut_level(xi, z, index, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(cut_moment(xi, z, index)), initial=0.0) <= tol)


def standard_identification(p, n: int) -> np.ndarray:
    """(xi, q) -> q xi^(1/4) from R_{>0}^n x Q^n into H^n."""
    xi, q = split_point(p, n)
    return qmul(q, SectionMap(n, "quartic_root_section")(xi)).ravel()
