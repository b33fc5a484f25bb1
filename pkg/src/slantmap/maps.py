"""Pointwise first-order analysis of a smooth map between charts."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exprlang import ScalarExpr, eval_jets, parse
from .geometry import ChartManifold, ChartPoint
from .linalg import complement, gram_schmidt, svd_split

#: vectors must lie in their claimed subspace to this relative accuracy
MEMBERSHIP_TOL = 1e-8


class NotProperError(ValueError):
    """The differential has rank 0 or full rank where a proper map is required."""

    def __init__(self, rank: int, m: int, n: int, point):
        super().__init__(f"not a proper Riemannian-map candidate: rank {rank} with "
                         f"source dim {m}, target dim {n} at {tuple(float(x) for x in point)}")
        self.rank = rank


class SubspaceError(ValueError):
    """An input vector is not in the subspace an operation requires."""


class SmoothMap:
    def __init__(self, source: ChartManifold, target: ChartManifold,
                 components: Sequence[ScalarExpr]):
        components = tuple(components)
        if len(components) != target.dim:
            raise ValueError(f"map has {len(components)} components, target dimension is {target.dim}")
        for c in components:
            if c.dim != source.dim:
                raise ValueError("map components must be expressions in the source coordinates")
        self.source = source
        self.target = target
        self.components = components

    @classmethod
    def parse(cls, source: ChartManifold, target: ChartManifold, texts: Sequence[str],
              params=None) -> "SmoothMap":
        return cls(source, target, [parse(t, source.dim, params) for t in texts])

    @property
    def m(self) -> int:
        return self.source.dim

    @property
    def n(self) -> int:
        return self.target.dim

    def jets(self, p):
        """``(F(p), dF, d2F)`` with ``dF[a, i] = d_i F^a`` and ``d2F[a, i, j]``."""
        return eval_jets(self.components, np.asarray(p, dtype=float))


def differential_at(F: SmoothMap, p) -> np.ndarray:
    return F.jets(p)[1]


@dataclass(frozen=True, eq=False)
class PointSplit:
    """Vertical/horizontal and range/range-perp splitting at a point.

    Bases are stored as column matrices, orthonormal in the metric of their
    own side.
    """

    point: np.ndarray
    rank: int
    vertical_basis: np.ndarray
    horizontal_basis: np.ndarray
    pushed_basis: np.ndarray
    range_basis: np.ndarray
    range_perp_basis: np.ndarray
    lambda_sq: float
    conformal_residual: float
    riemannian_residual: float
    singular_values: np.ndarray
    value: np.ndarray = field(repr=False)
    differential: np.ndarray = field(repr=False)
    second: np.ndarray = field(repr=False)
    src: ChartPoint = field(repr=False)
    tgt: ChartPoint = field(repr=False)
    proper: bool = True

    @property
    def m(self) -> int:
        return self.differential.shape[1]

    @property
    def n(self) -> int:
        return self.differential.shape[0]

    @property
    def lam(self) -> float:
        return float(np.sqrt(self.lambda_sq))

    @cached_property
    def P_vertical(self) -> np.ndarray:
        return self.vertical_basis @ self.vertical_basis.T @ self.src.g

    @cached_property
    def P_horizontal(self) -> np.ndarray:
        return self.horizontal_basis @ self.horizontal_basis.T @ self.src.g

    @cached_property
    def P_range(self) -> np.ndarray:
        return self.range_basis @ self.range_basis.T @ self.tgt.g

    @cached_property
    def P_perp(self) -> np.ndarray:
        return self.range_perp_basis @ self.range_perp_basis.T @ self.tgt.g

    def push(self, X) -> np.ndarray:
        return self.differential @ np.asarray(X, dtype=float)


def split_at(F: SmoothMap, p, *, rotation_seed: int | None = None,
             allow_full_rank: bool = False) -> PointSplit:
    """Split source and target tangent spaces at ``p``.

    ``rotation_seed`` applies a random orthogonal change of the horizontal
    frame (used to test that the dilation does not depend on it).
    ``allow_full_rank`` admits rank = min(m, n), as needed when the
    range-perp space is declared trivial.
    """
    p = np.asarray(p, dtype=float)
    value, A, H = F.jets(p)
    src = F.source.at(p)
    tgt = F.target.at(value)
    g_m, g_n = src.g, tgt.g
    m, n = F.m, F.n
    rank, s, row, null, col, left_null = svd_split(A)
    if rank == 0 or (rank >= min(m, n) and not allow_full_rank):
        raise NotProperError(rank, m, n, p)

    vertical = gram_schmidt(null, g_m)
    g_m_inv = src.ginv
    horizontal = gram_schmidt(g_m_inv @ row, g_m)
    if rotation_seed is not None and horizontal.shape[1] > 1:
        rng = np.random.default_rng(rotation_seed)
        q, r = np.linalg.qr(rng.standard_normal((rank, rank)))
        horizontal = horizontal @ (q * np.sign(np.diag(r)))
    pushed = A @ horizontal
    range_basis = gram_schmidt(pushed, g_n)
    if left_null.shape[1]:
        perp = gram_schmidt(tgt.ginv @ left_null, g_n)
    else:
        perp = np.zeros((n, 0))

    gram = pushed.T @ g_n @ pushed
    lambda_sq = float(np.mean(np.diag(gram)))
    conformal_residual = float(np.max(np.abs(gram - lambda_sq * np.eye(rank))))
    return PointSplit(
        point=p, rank=rank, vertical_basis=vertical, horizontal_basis=horizontal,
        pushed_basis=pushed, range_basis=range_basis, range_perp_basis=perp,
        lambda_sq=lambda_sq, conformal_residual=conformal_residual,
        riemannian_residual=abs(lambda_sq - 1.0) + conformal_residual,
        singular_values=s, value=value, differential=A, second=H, src=src, tgt=tgt,
        proper=0 < rank < min(m, n),
    )


@dataclass(frozen=True)
class SlantReport:
    theta: float
    spread: float
    side: str
    angles: np.ndarray = field(repr=False)

    def is_pointwise_slant(self, tol: float = 1e-6) -> bool:
        return self.spread <= tol


def _probe_vectors(basis: np.ndarray, probes: int | None, rng) -> list[np.ndarray]:
    k = basis.shape[1]
    count = 2 * k if probes is None else probes
    vecs = [basis[:, i] for i in range(k)]
    for _ in range(count):
        c = rng.standard_normal(k)
        vecs.append(basis @ (c / np.linalg.norm(c)))
    return vecs


def _angle(inside: np.ndarray, outside: np.ndarray, g: np.ndarray) -> float:
    a = np.sqrt(max(inside @ g @ inside, 0.0))
    b = np.sqrt(max(outside @ g @ outside, 0.0))
    return float(np.arctan2(b, a))


def slant_at(F: SmoothMap, split: PointSplit, side: str = "domain", probes: int | None = None,
             seed: int = 0) -> SlantReport:
    """Wirtinger angle of J on ker F* (``domain``) or of J on range F* (``range``).

    Probes are the basis vectors plus ``probes`` random unit vectors
    (default twice the subspace dimension).
    """
    rng = np.random.default_rng(seed)
    if side == "domain":
        if F.source.J is None:
            raise ValueError("domain-side slant needs J on the source")
        basis = split.vertical_basis
        if basis.shape[1] == 0:
            raise ValueError("vertical space is zero-dimensional")
        J, Pin, g = split.src.J, split.P_vertical, split.src.g
        vecs = _probe_vectors(basis, probes, rng)
    elif side == "range":
        if F.target.J is None:
            raise ValueError("range-side slant needs J on the target")
        if split.horizontal_basis.shape[1] == 0:
            raise ValueError("range is zero-dimensional")
        J, Pin, g = split.tgt.J, split.P_range, split.tgt.g
        vecs = [split.push(z) for z in _probe_vectors(split.horizontal_basis, probes, rng)]
    else:
        raise ValueError(f"unknown slant side {side!r}")
    angles = []
    for v in vecs:
        Jv = J @ v
        inside = Pin @ Jv
        angles.append(_angle(inside, Jv - inside, g))
    angles = np.array(angles)
    return SlantReport(float(np.mean(angles)), float(np.max(angles) - np.min(angles)), side, angles)


def _require_in(vec, P, g, what: str):
    vec = np.asarray(vec, dtype=float)
    off = vec - P @ vec
    size = max(1.0, float(np.sqrt(max(vec @ g @ vec, 0.0))))
    if np.sqrt(max(off @ g @ off, 0.0)) > MEMBERSHIP_TOL * size:
        raise SubspaceError(f"vector is not {what} at this point")
    return vec


@dataclass(frozen=True)
class DomainParts:
    phi: np.ndarray
    omega: np.ndarray
    B: np.ndarray
    C: np.ndarray
    mu_basis: np.ndarray


@dataclass(frozen=True)
class RangeParts:
    rho: np.ndarray
    varpi: np.ndarray
    D: np.ndarray
    E: np.ndarray
    eta_basis: np.ndarray


def domain_operators(split: PointSplit):
    """Matrices of phi, omega, B, C (each acting on the full tangent space)."""
    J, Pv, Ph = split.src.J, split.P_vertical, split.P_horizontal
    return Pv @ J @ Pv, Ph @ J @ Pv, Pv @ J @ Ph, Ph @ J @ Ph


def range_operators(split: PointSplit):
    """Matrices of rho, varpi, D, E on the target tangent space."""
    J, Pr, Pp = split.tgt.J, split.P_range, split.P_perp
    return Pr @ J @ Pr, Pp @ J @ Pr, Pr @ J @ Pp, Pp @ J @ Pp


def mu_basis(split: PointSplit) -> np.ndarray:
    _, omega, _, _ = domain_operators(split)
    return complement(omega @ split.vertical_basis, split.src.g, within=split.horizontal_basis)


def eta_basis(split: PointSplit) -> np.ndarray:
    _, varpi, _, _ = range_operators(split)
    return complement(varpi @ split.range_basis, split.tgt.g, within=split.range_perp_basis)


def decompose_domain(F: SmoothMap, split: PointSplit, V, X) -> DomainParts:
    if F.source.J is None:
        raise ValueError("domain decomposition needs J on the source")
    g = split.src.g
    V = _require_in(V, split.P_vertical, g, "vertical")
    X = _require_in(X, split.P_horizontal, g, "horizontal")
    phi, omega, B, C = domain_operators(split)
    return DomainParts(phi @ V, omega @ V, B @ X, C @ X, mu_basis(split))


def decompose_range(G: SmoothMap, split: PointSplit, W, P) -> RangeParts:
    if G.target.J is None:
        raise ValueError("range decomposition needs J on the target")
    g = split.tgt.g
    W = _require_in(W, split.P_range, g, "in the range of the differential")
    P = _require_in(P, split.P_perp, g, "orthogonal to the range")
    rho, varpi, D, E = range_operators(split)
    return RangeParts(rho @ W, varpi @ W, D @ P, E @ P, eta_basis(split))


def adjoint_matrix(split: PointSplit) -> np.ndarray:
    return split.src.ginv @ split.differential.T @ split.tgt.g


def adjoint_at(G: SmoothMap, split: PointSplit, W) -> np.ndarray:
    """The metric adjoint ``g_M^-1 A^T g_N W``; it is always horizontal."""
    return adjoint_matrix(split) @ np.asarray(W, dtype=float)


__all__ = [
    "DomainParts", "NotProperError", "PointSplit", "RangeParts", "SlantReport", "SmoothMap",
    "SubspaceError", "adjoint_at", "adjoint_matrix", "decompose_domain", "decompose_range",
    "differential_at", "domain_operators", "eta_basis", "mu_basis",
    "range_operators", "slant_at", "split_at",
]
