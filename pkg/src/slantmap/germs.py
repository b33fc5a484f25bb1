"""First-order germs of tensors along a map, in source coordinates.

A germ stores a value at the base point together with its partial
derivatives ``jac[..., k] = d_k`` with respect to the source coordinates.
Products follow the Leibniz rule, so fields assembled from projectors,
structure tensors and the differential carry exact first derivatives and
covariant derivatives at the point need no finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Germ:
    value: np.ndarray
    jac: np.ndarray  # value.shape + (m,)

    @classmethod
    def constant(cls, value, m: int) -> "Germ":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros(value.shape + (m,)))

    @property
    def m(self) -> int:
        return self.jac.shape[-1]

    @property
    def T(self) -> "Germ":
        if self.value.ndim != 2:
            raise ValueError("transpose needs a matrix germ")
        return Germ(self.value.T, np.swapaxes(self.jac, 0, 1))

    def __add__(self, other: "Germ") -> "Germ":
        return Germ(self.value + other.value, self.jac + other.jac)

    def __sub__(self, other: "Germ") -> "Germ":
        return Germ(self.value - other.value, self.jac - other.jac)

    def __neg__(self) -> "Germ":
        return Germ(-self.value, -self.jac)

    def scale(self, s) -> "Germ":
        """Multiply by a float or a scalar germ."""
        if isinstance(s, Germ):
            return Germ(s.value * self.value,
                        s.value * self.jac + np.multiply.outer(self.value, s.jac))
        return Germ(s * self.value, s * self.jac)

    def __matmul__(self, other: "Germ") -> "Germ":
        if not isinstance(other, Germ):
            other = Germ.constant(other, self.m)
        a, b = self.value, other.value
        val = a @ b
        if b.ndim == 1:
            jac = np.einsum("ijk,j->ik", self.jac, b) + np.einsum("ij,jk->ik", a, other.jac)
        else:
            jac = np.einsum("ijk,jl->ilk", self.jac, b) + np.einsum("ij,jlk->ilk", a, other.jac)
        return Germ(val, jac)

    def inv(self) -> "Germ":
        vi = np.linalg.inv(self.value)
        return Germ(vi, -np.einsum("ij,jlk,lm->imk", vi, self.jac, vi))

    def along(self, X) -> np.ndarray:
        """Directional derivative ``X^k d_k`` at the base point."""
        return self.jac @ np.asarray(X, dtype=float)


def dot(u: Germ, G: Germ, w: Germ) -> Germ:
    """Scalar germ ``u^T G w``."""
    Gw = G @ w
    val = float(u.value @ Gw.value)
    jac = np.einsum("ik,i->k", u.jac, Gw.value) + np.einsum("i,ik->k", u.value, Gw.jac)
    return Germ(np.asarray(val), jac)


def projector_germ(Q: Germ, g: Germ) -> Germ:
    """g-orthogonal projector onto the column span of ``Q``: ``Q (Q^T g Q)^-1 Q^T g``."""
    QtG = Q.T @ g
    return Q @ (QtG @ Q).inv() @ QtG
