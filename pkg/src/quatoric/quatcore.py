"""Quaternions, the quaternionic torus Q^n = Sp(1)^n and its exponential map.

Quaternions are numpy arrays of shape (..., 4) laid out as [w, x, y, z]. The
identification with SU(2) used throughout is

    w + x i + y j + z k  <->  w I + x H + y X + z Y,

with H = diag(i, -i), X = [[0, 1], [-1, 0]], Y = [[0, i], [i, 0]].  Under this
map the generators T_a = (i/2) sigma_a of su(2) become T_1 = k/2, T_2 = j/2,
T_3 = i/2, so the lattice direction T_3 is the quaternion unit i.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

UNIT_TOL = 1e-9
FOUR_PI = 4.0 * math.pi


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class ResourceLimitError(RuntimeError):
    """A search would exceed the configured enumeration cap."""


# ---------------------------------------------------------------------------
# quaternion algebra on arrays

def qmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = aw * bw - ax * bx - ay * by - az * bz
    out[..., 1] = aw * bx + ax * bw + ay * bz - az * by
    out[..., 2] = aw * by - ax * bz + ay * bw + az * bx
    out[..., 3] = aw * bz + ax * by - ay * bx + az * bw
    return out


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sqrt(np.einsum("...i,...i->...", q, q))


def qinv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return qconj(q) / np.sum(q * q, axis=-1, keepdims=True)


def su2_matrix(q) -> np.ndarray:
    """2x2 complex matrix of a quaternion under the H, X, Y identification."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def lie_matrix(alpha) -> np.ndarray:
    """alpha_1 T_1 + alpha_2 T_2 + alpha_3 T_3 as a 2x2 anti-Hermitian matrix."""
    a1, a2, a3 = np.asarray(alpha, dtype=float)
    return 0.5j * (a1 * PAULI[0] + a2 * PAULI[1] + a3 * PAULI[2])


# ---------------------------------------------------------------------------
# torus elements

def _as_unit(coords, tol: float = UNIT_TOL) -> np.ndarray:
    arr = np.array(coords, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise InputError(f"torus coordinates must have shape (n, 4), got {arr.shape}")
    norms = qnorm(arr)
    dev = np.abs(norms - 1.0)
    worst = dev.max(initial=0.0)
    if not worst <= tol:
        i = int(np.argmax(~(dev <= tol)))
        raise InputError(f"coordinate {i} has norm {norms[i]!r}, not a unit quaternion")
    # renormalise only values that are measurably off, so re-wrapping is bit-stable
    if worst > 1e-14:
        fix = dev > 1e-14
        arr[fix] /= norms[fix, None]
    arr.setflags(write=False)
    return arr


class TorusElement:
    """An element of Q^n, stored as an (n, 4) read-only array of unit quaternions."""

    __slots__ = ("coords",)

    def __init__(self, coords, tol: float = UNIT_TOL):
        self.coords = _as_unit(coords, tol)

    @classmethod
    def identity(cls, n: int) -> "TorusElement":
        c = np.zeros((n, 4))
        c[:, 0] = 1.0
        return cls(c)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "TorusElement":
        c = rng.normal(size=(n, 4))
        return cls(c / qnorm(c)[:, None], tol=np.inf)

    @classmethod
    def from_json(cls, data) -> "TorusElement":
        return cls(data)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def __mul__(self, other: "TorusElement") -> "TorusElement":
        if self.n != other.n:
            raise InputError(f"dimension mismatch {self.n} != {other.n}")
        return TorusElement(qmul(self.coords, other.coords), tol=1e-6)

    def inverse(self) -> "TorusElement":
        return TorusElement(qconj(self.coords))

    def distance(self, other: "TorusElement") -> float:
        """Max-abs coordinate difference; a cheap metric for tolerance checks."""
        return float(np.max(np.abs(self.coords - other.coords)))

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.distance(TorusElement.identity(self.n)) <= tol

    def allclose(self, other: "TorusElement", tol: float = 1e-9) -> bool:
        return self.n == other.n and self.distance(other) <= tol

    def to_json(self) -> list:
        return [[float(v) for v in row] for row in self.coords]

    def __eq__(self, other) -> bool:
        return isinstance(other, TorusElement) and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())

    def __repr__(self) -> str:
        return f"TorusElement({self.to_json()!r})"


# ---------------------------------------------------------------------------
# exponential map and lattice

def exp_su2(alpha) -> TorusElement:
    """Coordinatewise exponential of an element of su(2)^n.

    ``alpha`` has shape (n, 3): row k holds the coefficients of T_1, T_2, T_3
    in factor k.  exp(theta n.T) = cos(theta/2) + sin(theta/2) n.(k, j, i).
    """
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    if alpha.shape[-1] != 3:
        raise InputError(f"Lie algebra coefficients must have shape (n, 3), got {alpha.shape}")
    theta = np.linalg.norm(alpha, axis=1)
    half = 0.5 * theta
    # sin(theta/2)/theta, with its limit 1/2 at theta = 0
    scale = np.where(theta > 1e-300, np.sin(half) / np.where(theta > 1e-300, theta, 1.0), 0.5)
    out = np.empty((alpha.shape[0], 4))
    out[:, 0] = np.cos(half)
    out[:, 1] = scale * alpha[:, 2]
    out[:, 2] = scale * alpha[:, 1]
    out[:, 3] = scale * alpha[:, 0]
    return TorusElement(out, tol=1e-6)


def log_su2(u: TorusElement) -> np.ndarray:
    """Principal logarithm: returns alpha with exp_su2(alpha) == u and theta in [0, 2 pi]."""
    c = u.coords
    v = c[:, 1:]
    vn = np.linalg.norm(v, axis=1)
    theta = 2.0 * np.arctan2(vn, c[:, 0])
    scale = np.where(vn > 1e-300, theta / np.where(vn > 1e-300, vn, 1.0), 2.0)
    return np.stack([scale * v[:, 2], scale * v[:, 1], scale * v[:, 0]], axis=1)


def lattice_embedding(k: Sequence[int]) -> np.ndarray:
    """The Lie algebra element 4 pi k_i T_3 in each factor."""
    k = np.asarray(k, dtype=float)
    alpha = np.zeros((k.shape[0], 3))
    alpha[:, 2] = FOUR_PI * k
    return alpha


def is_primitive(k: Iterable[int]) -> bool:
    g = 0
    for v in k:
        g = math.gcd(g, int(v))
    return g == 1


def normalize_sign(k: Sequence[int]) -> tuple[int, ...]:
    """Representative of +-k whose first nonzero entry is positive."""
    k = tuple(int(v) for v in k)
    for v in k:
        if v != 0:
            return k if v > 0 else tuple(-x for x in k)
    return k


# ---------------------------------------------------------------------------
# regular representation

def regular_action(s: TorusElement, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (s.n, 4):
        raise InputError(f"expected {s.n} quaternions, got array of shape {h.shape}")
    return qmul(s.coords, h)


def orbit_map(h) -> np.ndarray:
    """(|h_1|^4, ..., |h_n|^4)."""
    return qnorm(h) ** 4


def orbit_section(xi) -> np.ndarray:
    """The section xi -> (xi_1^(1/4), ..., xi_n^(1/4)) of the orbit map."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise InputError("section is defined on the nonnegative orthant only")
    out = np.zeros((xi.shape[0], 4))
    out[:, 0] = xi ** 0.25
    return out
