"""Small dense linear-algebra helpers in a metric inner product."""
from __future__ import annotations

import numpy as np

#: singular values below this fraction of the largest count as zero
RANK_RTOL = 1e-8
#: metrics with a larger condition number are rejected as singular
MAX_CONDITION = 1e12


class MetricError(ValueError):
    """The metric is singular, indefinite or ill-conditioned at a point."""


def check_metric(g: np.ndarray, where: str = "") -> None:
    if not np.all(np.isfinite(g)):
        raise MetricError(f"metric has non-finite entries{where}")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise MetricError(f"metric is not positive definite{where}") from None
    cond = np.linalg.cond(g)
    if cond > MAX_CONDITION:
        raise MetricError(f"metric is singular at point{where} (condition number {cond:.3g})")


def metric_inverse(g: np.ndarray) -> np.ndarray:
    """Inverse by LU with partial pivoting (LAPACK gesv)."""
    return np.linalg.solve(g, np.eye(g.shape[0]))


def gram_schmidt(vectors: np.ndarray, g: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """g-orthonormalise the columns of ``vectors``.

    Modified Gram-Schmidt with one re-orthogonalisation pass. Columns whose
    residual norm falls below ``tol`` times their original norm are dropped,
    so the result is an orthonormal basis of the column span.
    """
    vectors = np.asarray(vectors, dtype=float)
    basis = []
    for k in range(vectors.shape[1]):
        v = vectors[:, k].copy()
        norm0 = np.sqrt(max(v @ g @ v, 0.0))
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for q in basis:
                v -= (q @ g @ v) * q
        norm = np.sqrt(max(v @ g @ v, 0.0))
        if norm <= tol * norm0:
            continue
        basis.append(v / norm)
    if not basis:
        return np.zeros((vectors.shape[0], 0))
    return np.column_stack(basis)


def complement(basis: np.ndarray, g: np.ndarray, within: np.ndarray | None = None) -> np.ndarray:
    """g-orthonormal basis of the complement of span(basis) inside span(within).

    ``within`` defaults to the whole space; both inputs are column matrices
    and ``within`` is assumed g-orthonormal.
    """
    dim = g.shape[0]
    if within is None:
        within = gram_schmidt(np.eye(dim), g)
    if basis.shape[1] == 0:
        return within.copy()
    q = gram_schmidt(basis, g)
    # project the ambient frame off span(basis), then re-orthonormalise
    residual = within - q @ (q.T @ g @ within)
    return gram_schmidt(residual, g, tol=1e-7)


def svd_split(a: np.ndarray, rtol: float = RANK_RTOL):
    """Rank and Euclidean row/null/left-null space bases of ``a``."""
    u, s, vt = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rtol * s[0]))
    row = vt[:rank].T
    null = vt[rank:].T
    col = u[:, :rank]
    left_null = u[:, rank:]
    return rank, s, row, null, col, left_null


def projector(basis: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Matrix of the g-orthogonal projection onto span of a g-orthonormal basis."""
    return basis @ basis.T @ g
