"""Aut(Q^n) modulo inner automorphisms, as signed permutations.

Convention, used by every other module: an element ``a`` with permutation
``perm`` (``perm[j]`` is the image of coordinate j, 0-based) and sign vector
``signs`` acts on a lattice or base vector by

    (a . v)_i = signs[i] * v[perm^-1(i)],

i.e. through the signed permutation matrix M with M[perm[j], j] = signs[perm[j]].
On Q^n a negative sign acts by the Weyl reflection q -> j q j^-1, a group
automorphism of Sp(1) that restricts to inversion on the circle exp(t T_3) and
induces T_3 -> -T_3 (and T_1 -> -T_1) on the Lie algebra.  Quaternionic
conjugation, which inverts the whole factor and reverses its orientation, is
available separately as :meth:`SignedPermAut.act_torus_reflect`; it is not a
homomorphism, so the Cech machinery never uses it.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quatcore import InputError, ResourceLimitError, TorusElement

_WEYL = np.array([1.0, -1.0, 1.0, -1.0])

ENUMERATE_CAP = 6


@dataclass(frozen=True)
class SignedPermAut:
    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))):
            raise InputError(f"perm {perm} is not a permutation of 0..{len(perm) - 1}")
        if len(signs) != len(perm) or any(s not in (1, -1) for s in signs):
            raise InputError(f"signs {signs} must be {len(perm)} values in {{+1, -1}}")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "SignedPermAut":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-9) -> "SignedPermAut":
        """Inverse of :meth:`matrix`; raises InputError if ``m`` is not a signed permutation."""
        m = np.asarray(m, dtype=float)
        n = m.shape[0]
        if m.shape != (n, n):
            raise InputError(f"expected a square matrix, got shape {m.shape}")
        perm = [0] * n
        signs = [1] * n
        rounded = np.rint(m)
        if np.max(np.abs(m - rounded), initial=0.0) > tol:
            raise InputError("matrix is not integral")
        for j in range(n):
            nz = np.flatnonzero(rounded[:, j])
            if len(nz) != 1 or abs(rounded[nz[0], j]) != 1:
                raise InputError(f"column {j} is not a signed unit vector")
            perm[j] = int(nz[0])
            signs[nz[0]] = int(rounded[nz[0], j])
        return cls(tuple(perm), tuple(signs))

    @classmethod
    def from_json(cls, data) -> "SignedPermAut":
        try:
            perm = [int(p) - 1 for p in data["perm"]]
            signs = data["signs"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed automorphism {data!r}") from exc
        return cls(tuple(perm), tuple(signs))

    def to_json(self) -> dict:
        return {"perm": [p + 1 for p in self.perm], "signs": list(self.signs)}

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=int)
        for j, p in enumerate(self.perm):
            m[p, j] = self.signs[p]
        return m

    def _check(self, other_n: int):
        if other_n != self.n:
            raise InputError(f"dimension mismatch: automorphism of Q^{self.n} on data of size {other_n}")

    def compose(self, other: "SignedPermAut") -> "SignedPermAut":
        """self o other."""
        self._check(other.n)
        perm = tuple(self.perm[other.perm[j]] for j in range(self.n))
        inv_self = self.inverse_perm()
        signs = tuple(self.signs[i] * other.signs[inv_self[i]] for i in range(self.n))
        return SignedPermAut(perm, signs)

    __matmul__ = compose

    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for j, p in enumerate(self.perm):
            inv[p] = j
        return tuple(inv)

    def inverse(self) -> "SignedPermAut":
        # matrix transpose: (a^-1 . v)_j = signs[perm[j]] * v[perm[j]]
        return SignedPermAut(self.inverse_perm(), tuple(self.signs[self.perm[j]] for j in range(self.n)))

    def inv_transpose(self) -> "SignedPermAut":
        """The automorphism with matrix (M^-1)^T; equal to self since M is orthogonal."""
        return SignedPermAut.from_matrix(np.linalg.inv(self.matrix()).T)

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.n)) and all(s == 1 for s in self.signs)

    def act_lattice(self, v: Sequence[int]) -> tuple[int, ...]:
        self._check(len(v))
        inv = self.inverse_perm()
        return tuple(self.signs[i] * int(v[inv[i]]) for i in range(self.n))

    def act_real(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        self._check(xi.shape[-1])
        inv = self.inverse_perm()
        return np.asarray(self.signs, dtype=float) * xi[..., list(inv)]

    def act_lie(self, alpha) -> np.ndarray:
        """Differential of :meth:`act_torus`: permute factors; flipped factors map (a1, a2, a3) -> (-a1, a2, -a3)."""
        alpha = np.asarray(alpha, dtype=float)
        self._check(alpha.shape[0])
        out = alpha[list(self.inverse_perm())].copy()
        for i, s in enumerate(self.signs):
            if s < 0:
                out[i, 0] *= -1.0
                out[i, 2] *= -1.0
        return out

    def act_lie_reflect(self, alpha) -> np.ndarray:
        """Differential of :meth:`act_torus_reflect`: flipped factors are negated outright."""
        alpha = np.asarray(alpha, dtype=float)
        self._check(alpha.shape[0])
        return np.asarray(self.signs, dtype=float)[:, None] * alpha[list(self.inverse_perm())]

    def _permute_and_flip(self, q, flip) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        self._check(q.shape[-2])
        out = q[..., list(self.inverse_perm()), :].copy()
        for i, s in enumerate(self.signs):
            if s < 0:
                out[..., i, :] = out[..., i, :] * flip
        return out

    def act_quaternions(self, q) -> np.ndarray:
        """Automorphism action on (..., n, 4) arrays (not necessarily unit)."""
        return self._permute_and_flip(q, _WEYL)

    def act_quaternions_reflect(self, q) -> np.ndarray:
        """Permute factors and conjugate the flipped ones (orientation reversing on each flipped factor)."""
        return self._permute_and_flip(q, np.array([1.0, -1.0, -1.0, -1.0]))

    def act_torus(self, u: TorusElement) -> TorusElement:
        return TorusElement(self.act_quaternions(u.coords))

    def act_torus_reflect(self, u: TorusElement) -> TorusElement:
        return TorusElement(self.act_quaternions_reflect(u.coords))

    def __repr__(self) -> str:
        return f"SignedPermAut(perm={list(self.perm)}, signs={list(self.signs)})"


def enumerate_aut(n: int) -> list[SignedPermAut]:
    """All n! 2^n elements, ordered by permutation word then sign vector (+1 before -1)."""
    if n > ENUMERATE_CAP:
        raise ResourceLimitError(f"enumerate(n={n}) exceeds the cap n <= {ENUMERATE_CAP}")
    if n < 0:
        raise InputError("n must be nonnegative")
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            out.append(SignedPermAut(perm, signs))
    return out


def group_order(n: int) -> int:
    return math.factorial(n) * 2 ** n
