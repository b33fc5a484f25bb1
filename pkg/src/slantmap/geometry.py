"""Chart-level Riemannian and almost-complex geometry.

Index conventions (all zero-based):

* ``dg[k, i, j] = d_k g_ij`` and ``ddg[k, l, i, j] = d_k d_l g_ij``
* ``gamma[k, i, j]`` is the Christoffel symbol of the second kind with upper
  index ``k``
* curvature uses ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``;
  the lowered array is ``riemann[a, b, c, d] = g(R(d_c, d_d) d_b, d_a)``, so a
  unit round sphere has ``riemann[0, 1, 0, 1] = sin(x1)^2``.  The four-slot
  form matching the complex-space-form formula is
  ``CurvatureAtPoint.form(Y1, Y2, Y3, Y4) = g(R(Y1, Y2)Y3, Y4)``.
* a complex structure is stored as a matrix whose column ``b`` holds
  ``J d_b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .exprlang import ScalarExpr, eval_jets, parse
from .exprlang.ast import Num
from .linalg import MetricError, check_metric, gram_schmidt, metric_inverse


@dataclass(frozen=True, eq=False)
class VectorField:
    components: tuple[ScalarExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        dims = {c.dim for c in self.components}
        if len(dims) > 1 or (dims and dims.pop() != len(self.components)):
            raise ValueError("vector field needs one component per chart coordinate")

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def coordinate(cls, index: int, dim: int) -> "VectorField":
        """The coordinate field d/dx{index+1}."""
        return cls.constant(np.eye(dim)[index])

    @classmethod
    def constant(cls, vector: Sequence[float]) -> "VectorField":
        dim = len(vector)
        return cls(tuple(ScalarExpr.constant(float(c), dim) for c in vector))

    @classmethod
    def parse(cls, texts: Sequence[str], params=None) -> "VectorField":
        dim = len(texts)
        return cls(tuple(parse(t, dim, params) for t in texts))

    def jet1(self, p) -> tuple[np.ndarray, np.ndarray]:
        """Components and Jacobian ``d[k, i] = d_i X^k`` at ``p``."""
        vals, grads, _ = eval_jets(self.components, p)
        return vals, grads


class ChartManifold:
    """A single chart with a metric and an optional (1,1) tensor J."""

    def __init__(self, dim: int, metric: Sequence[Sequence[ScalarExpr]],
                 J: Sequence[Sequence[ScalarExpr]] | None = None, name: str = ""):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.name = name
        self.metric = tuple(tuple(row) for row in metric)
        if len(self.metric) != dim or any(len(r) != dim for r in self.metric):
            raise ValueError("metric must be a dim x dim matrix")
        for i in range(dim):
            for j in range(i):
                if self.metric[i][j] is not self.metric[j][i]:
                    raise ValueError("metric must be declared symmetric")
        if J is not None:
            if dim % 2:
                raise ValueError("a complex structure needs an even dimension")
            J = tuple(tuple(row) for row in J)
            if len(J) != dim or any(len(r) != dim for r in J):
                raise ValueError("J must be a dim x dim matrix")
        self.J = J

    @classmethod
    def from_entries(cls, dim: int, metric: Mapping[tuple[int, int], str] | None = None,
                     J: Mapping[tuple[int, int], str] | None = None,
                     params=None, name: str = "") -> "ChartManifold":
        """Build from 1-based ``(i, j)`` entry texts; metric entries need ``i <= j``.

        A missing metric means the identity; missing entries are zero.
        """
        zero = ScalarExpr.constant(0.0, dim)
        one = ScalarExpr.constant(1.0, dim)
        if metric is None:
            rows = [[one if i == j else zero for j in range(dim)] for i in range(dim)]
        else:
            rows = [[zero] * dim for _ in range(dim)]
            for (i, j), text in metric.items():
                if not (1 <= i <= dim and 1 <= j <= dim):
                    raise ValueError(f"metric index ({i}, {j}) out of range")
                if i > j:
                    raise ValueError("lower-triangle metric entry; declare i <= j")
                e = text if isinstance(text, ScalarExpr) else parse(str(text), dim, params)
                rows[i - 1][j - 1] = e
                rows[j - 1][i - 1] = e
        jrows = None
        if J is not None:
            jrows = [[zero] * dim for _ in range(dim)]
            for (a, b), text in J.items():
                if not (1 <= a <= dim and 1 <= b <= dim):
                    raise ValueError(f"J index ({a}, {b}) out of range")
                jrows[a - 1][b - 1] = text if isinstance(text, ScalarExpr) else parse(str(text), dim, params)
        return cls(dim, rows, jrows, name=name)

    @property
    def has_J(self) -> bool:
        return self.J is not None

    def at(self, p) -> "ChartPoint":
        return ChartPoint(self, np.asarray(p, dtype=float))

    def apply_J(self, X: VectorField) -> VectorField:
        """The field JX built at expression level (exact, no differencing)."""
        if self.J is None:
            raise ValueError("manifold has no complex structure")
        out = []
        for a in range(self.dim):
            terms = [self.J[a][b] * X.components[b] for b in range(self.dim)
                     if not (isinstance(self.J[a][b].root, Num) and self.J[a][b].root.value == 0.0)]
            if not terms:
                out.append(ScalarExpr.constant(0.0, self.dim))
                continue
            acc = terms[0]
            for t in terms[1:]:
                acc = acc + t
            out.append(acc)
        return VectorField(tuple(out))


class ChartPoint:
    """Geometry of a chart at one point; every quantity is computed once."""

    def __init__(self, M: ChartManifold, p: np.ndarray):
        if p.shape != (M.dim,):
            raise ValueError(f"point has shape {p.shape}, expected ({M.dim},)")
        self.M = M
        self.p = p

    @cached_property
    def _metric_jets(self):
        n = self.M.dim
        flat = [self.M.metric[i][j] for i in range(n) for j in range(n)]
        vals, grads, hess = eval_jets(flat, self.p, shape=(n, n))
        check_metric(vals, f" at {tuple(self.p)}")
        return vals, np.moveaxis(grads, 2, 0), np.moveaxis(hess, (2, 3), (0, 1))

    @property
    def g(self) -> np.ndarray:
        return self._metric_jets[0]

    @property
    def dg(self) -> np.ndarray:
        return self._metric_jets[1]

    @property
    def ddg(self) -> np.ndarray:
        return self._metric_jets[2]

    @cached_property
    def ginv(self) -> np.ndarray:
        return metric_inverse(self.g)

    @cached_property
    def gamma_lower(self) -> np.ndarray:
        """Christoffel symbols of the first kind, ``[l, i, j]``."""
        dg = self.dg
        return 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.einsum("kl,lij->kij", self.ginv, self.gamma_lower)

    @cached_property
    def dgamma(self) -> np.ndarray:
        """``dgamma[m, k, i, j] = d_m Gamma^k_ij``."""
        ddg = self.ddg
        d_lower = 0.5 * (np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg)
                         - ddg)
        d_ginv = -np.einsum("ka,mab,bl->mkl", self.ginv, self.dg, self.ginv)
        return (np.einsum("mkl,lij->mkij", d_ginv, self.gamma_lower)
                + np.einsum("kl,mlij->mkij", self.ginv, d_lower))

    @cached_property
    def riemann_mixed(self) -> np.ndarray:
        """``[l, k, i, j]``: component ``l`` of ``R(d_i, d_j) d_k``."""
        G, dG = self.gamma, self.dgamma
        term = np.einsum("iljk->lkij", dG) - np.einsum("jlik->lkij", dG)
        quad = np.einsum("lim,mjk->lkij", G, G)
        return term + quad - np.einsum("lkji->lkij", quad)

    @cached_property
    def curvature(self) -> "CurvatureAtPoint":
        R = np.einsum("ae,ebcd->abcd", self.g, self.riemann_mixed)
        return CurvatureAtPoint(self.p, R, self.g)

    @cached_property
    def _J_jets(self):
        if self.M.J is None:
            raise ValueError("manifold has no complex structure")
        n = self.M.dim
        flat = [self.M.J[a][b] for a in range(n) for b in range(n)]
        vals, grads, _ = eval_jets(flat, self.p, shape=(n, n))
        return vals, grads

    @property
    def J(self) -> np.ndarray:
        return self._J_jets[0]

    @property
    def dJ(self) -> np.ndarray:
        """``dJ[a, b, i] = d_i J^a_b``."""
        return self._J_jets[1]

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.g @ np.asarray(v))

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def nabla(self, X, Y_value, Y_jac) -> np.ndarray:
        """``nabla_X Y`` for a field with value and Jacobian ``[k, i] = d_i Y^k`` at p."""
        return Y_jac @ X + np.einsum("kij,i,j->k", self.gamma, X, Y_value)

    @cached_property
    def frame(self) -> np.ndarray:
        """A g-orthonormal frame (columns) from Gram-Schmidt on the coordinate basis."""
        return gram_schmidt(np.eye(self.M.dim), self.g)


@dataclass(frozen=True)
class CurvatureAtPoint:
    point: np.ndarray
    riemann: np.ndarray  # riemann[a, b, c, d] = g(R(d_c, d_d) d_b, d_a)
    metric: np.ndarray

    def form(self, Y1, Y2, Y3, Y4) -> float:
        """``g(R(Y1, Y2) Y3, Y4)``."""
        return float(np.einsum("abcd,a,b,c,d->", self.riemann, Y4, Y3, Y1, Y2))

    def symmetry_residuals(self) -> dict[str, float]:
        R = self.riemann
        return {
            "antisym_12": float(np.max(np.abs(R + np.swapaxes(R, 0, 1)), initial=0.0)),
            "antisym_34": float(np.max(np.abs(R + np.swapaxes(R, 2, 3)), initial=0.0)),
            "pair": float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))), initial=0.0)),
            "bianchi": float(np.max(np.abs(R + np.transpose(R, (0, 2, 3, 1))
                                           + np.transpose(R, (0, 3, 1, 2))), initial=0.0)),
        }


def christoffel_at(M: ChartManifold, p) -> np.ndarray:
    """``Gamma[k, i, j]``; raises :class:`MetricError` where g is not a metric."""
    return M.at(p).gamma


def riemann_at(M: ChartManifold, p) -> CurvatureAtPoint:
    return M.at(p).curvature


def lie_bracket_at(X: VectorField, Y: VectorField, p) -> np.ndarray:
    if X.dim != Y.dim:
        raise ValueError("vector fields live on charts of different dimension")
    xv, xd = X.jet1(p)
    yv, yd = Y.jet1(p)
    return yd @ xv - xd @ yv


def nijenhuis_at(M: ChartManifold, X: VectorField, Y: VectorField, p) -> np.ndarray:
    """``[JX, JY] - [X, Y] - J[X, JY] - J[JX, Y]`` at ``p``."""
    if M.J is None:
        raise ValueError("manifold has no complex structure")
    JX, JY = M.apply_J(X), M.apply_J(Y)
    Jp = M.at(p).J
    return (lie_bracket_at(JX, JY, p) - lie_bracket_at(X, Y, p)
            - Jp @ lie_bracket_at(X, JY, p) - Jp @ lie_bracket_at(JX, Y, p))


def nabla_J(cp: ChartPoint) -> np.ndarray:
    """``[a, b, i] = (nabla_i J)^a_b``."""
    J, dJ, G = cp.J, cp.dJ, cp.gamma
    return dJ + np.einsum("aic,cb->abi", G, J) - np.einsum("ac,cib->abi", J, G)


def hermitian_kahler_residuals(M: ChartManifold, p) -> dict[str, float]:
    """Residuals of J^2 = -I, g(JX, JY) = g(X, Y) and nabla J = 0.

    The last two are measured on a g-orthonormal frame.
    """
    cp = M.at(p)
    J = cp.J
    E = cp.frame
    n = M.dim
    jsq = float(np.max(np.abs(J @ J + np.eye(n))))
    JE = J @ E
    compat = float(np.max(np.abs(JE.T @ cp.g @ JE - E.T @ cp.g @ E)))
    nJ = nabla_J(cp)
    kahler = 0.0
    for a in range(n):
        for b in range(n):
            vec = np.einsum("kji,i,j->k", nJ, E[:, a], E[:, b])
            kahler = max(kahler, cp.norm(vec))
    return {"jsq": jsq, "compat": compat, "kahler": kahler}


def space_form_curvature(v: float, M: ChartManifold, Y1, Y2, Y3, Y4, p) -> float:
    """Curvature of a complex space form of holomorphic sectional curvature ``v``."""
    if M.J is None:
        raise ValueError("manifold has no complex structure")
    cp = M.at(p)
    return space_form_value(v, cp.g, cp.J, Y1, Y2, Y3, Y4)


def space_form_value(v, g, J, Y1, Y2, Y3, Y4) -> float:
    def ip(u, w):
        return float(u @ g @ w)

    Y1, Y2, Y3, Y4 = (np.asarray(y, dtype=float) for y in (Y1, Y2, Y3, Y4))
    return (v / 4.0) * (ip(Y1, Y4) * ip(Y2, Y3) - ip(Y1, Y3) * ip(Y2, Y4)
                        + ip(Y1, J @ Y3) * ip(J @ Y2, Y4)
                        - ip(Y2, J @ Y3) * ip(J @ Y1, Y4)
                        + 2.0 * ip(Y1, J @ Y2) * ip(J @ Y3, Y4))


__all__ = [
    "ChartManifold", "ChartPoint", "CurvatureAtPoint", "MetricError", "VectorField",
    "christoffel_at", "hermitian_kahler_residuals", "lie_bracket_at", "nabla_J",
    "nijenhuis_at", "riemann_at", "space_form_curvature", "space_form_value",
]
