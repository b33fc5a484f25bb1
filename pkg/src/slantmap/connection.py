"""Second-order objects along a map: second fundamental form, O'Neill
tensors, the shape operator of the range-perp bundle, covariant
derivatives of the slant operators and the tension field.

Distribution-valued fields are extended from a point by the moving
projectors: a vertical vector ``e`` becomes ``P_v(x) e`` near ``p`` (and
likewise for horizontal, range and range-perp vectors).  These extensions
stay inside their distribution, so the O'Neill tensors and the covariant
derivatives below are the tensorial quantities and do not depend on the
extension.  Derivatives of the projectors come from the exact jets of the
metric and of the map.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exprlang import ScalarExpr, eval_jet2
from .geometry import VectorField
from .germs import Germ, projector_germ
from .maps import PointSplit, SmoothMap, SubspaceError, split_at

#: a point counts as conformal when the Gram matrix deviates from lambda^2 I by less
CONFORMAL_TOL = 1e-8
#: step and extrapolation for the numerically differentiated dilation
FD_STEP = 1e-5


class NotConformalError(ValueError):
    """The horizontal restriction of the differential is not conformal at the point."""


def _trace_lambda_sq(F: SmoothMap, x: np.ndarray, rank: int):
    """Dilation squared and its coordinate gradient from the trace formula.

    Vertical vectors are annihilated, so the full-frame trace of
    ``g_M^-1 A^T g_N A`` equals the horizontal sum ``rank * lambda^2``.
    """
    value, A, H = F.jets(x)
    src = F.source.at(x)
    tgt = F.target.at(value)
    A_g = Germ(A, H)
    gN = Germ(tgt.g, np.einsum("cij,ck->ijk", tgt.dg, A))
    gM = Germ(src.g, np.moveaxis(src.dg, 0, 2))
    M = gM.inv() @ A_g.T @ gN @ A_g
    return (float(np.trace(M.value)) / rank,
            np.einsum("iik->k", M.jac) / rank)


def lambda_sq_fd_gradient(F: SmoothMap, p, step: float = FD_STEP, allow_full_rank: bool = False) -> np.ndarray:
    """Gradient of the split-estimated lambda^2 by central differences with one
    Richardson step, re-running :func:`split_at` at every shifted point."""
    p = np.asarray(p, dtype=float)

    def lam2(x):
        return split_at(F, x, allow_full_rank=allow_full_rank).lambda_sq

    grad = np.empty(p.size)
    for k in range(p.size):
        e = np.zeros(p.size)
        e[k] = 1.0
        d1 = (lam2(p + step * e) - lam2(p - step * e)) / (2 * step)
        d2 = (lam2(p + 2 * step * e) - lam2(p - 2 * step * e)) / (4 * step)
        grad[k] = (4 * d1 - d2) / 3
    return grad


class LambdaField:
    """The dilation as a function on the source.

    With a declared closed form, its exact jet is used.  Otherwise the value
    and gradient come from the trace formula (exact first derivatives) and the
    Hessian of ``1/lambda^2`` from central differences of that gradient.
    """

    def __init__(self, F: SmoothMap, declared: ScalarExpr | None = None,
                 allow_full_rank: bool = False):
        self.F = F
        self.declared = declared
        self.allow_full_rank = allow_full_rank

    def _rank(self, p) -> int:
        return split_at(self.F, p, allow_full_rank=self.allow_full_rank).rank

    def jet(self, p, rank: int | None = None):
        """``(lambda, d lambda, d^2 lambda)`` in coordinates (Hessian may be None)."""
        p = np.asarray(p, dtype=float)
        if self.declared is not None:
            j = eval_jet2(self.declared, p)
            return j.value, j.gradient, j.hessian
        r = rank if rank is not None else self._rank(p)
        lam2, dlam2 = _trace_lambda_sq(self.F, p, r)
        lam = np.sqrt(lam2)
        return lam, dlam2 / (2 * lam), None

    def dlog(self, p, rank: int | None = None) -> np.ndarray:
        """Coordinate differential of ln(lambda)."""
        lam, dlam, _ = self.jet(p, rank)
        return dlam / lam

    def h_jet(self, p, rank: int | None = None):
        """``h = 1/lambda^2`` with gradient and Hessian in coordinates."""
        p = np.asarray(p, dtype=float)
        if self.declared is not None:
            lam, dl, ddl = self.jet(p)
            h = lam ** -2
            dh = -2.0 * lam ** -3 * dl
            ddh = 6.0 * lam ** -4 * np.outer(dl, dl) - 2.0 * lam ** -3 * ddl
            return h, dh, ddh
        r = rank if rank is not None else self._rank(p)

        def dh_at(x):
            lam2, dlam2 = _trace_lambda_sq(self.F, x, r)
            return -dlam2 / lam2 ** 2

        lam2, _ = _trace_lambda_sq(self.F, p, r)
        ddh = np.empty((p.size, p.size))
        for k in range(p.size):
            e = np.zeros(p.size)
            e[k] = FD_STEP
            d1 = (dh_at(p + e) - dh_at(p - e)) / (2 * FD_STEP)
            d2 = (dh_at(p + 2 * e) - dh_at(p - 2 * e)) / (4 * FD_STEP)
            ddh[:, k] = (4 * d1 - d2) / 3
        return 1.0 / lam2, dh_at(p), 0.5 * (ddh + ddh.T)


@dataclass(frozen=True)
class SFFValue:
    total: np.ndarray
    range_part: np.ndarray
    perp_part: np.ndarray


class MapContext:
    """Everything needed for second-order computations at one point."""

    def __init__(self, F: SmoothMap, split: PointSplit, lam: LambdaField | None = None):
        self.F = F
        self.split = split
        self.lam = lam if lam is not None else LambdaField(F)
        self.m, self.n = split.m, split.n

    @classmethod
    def at(cls, F: SmoothMap, p, lam: LambdaField | None = None, **split_kw) -> "MapContext":
        return cls(F, split_at(F, p, **split_kw), lam)

    # --- germs ---------------------------------------------------------
    def const(self, v) -> Germ:
        return Germ.constant(v, self.m)

    @cached_property
    def A(self) -> Germ:
        return Germ(self.split.differential, self.split.second)

    @cached_property
    def gM(self) -> Germ:
        return Germ(self.split.src.g, np.moveaxis(self.split.src.dg, 0, 2))

    @cached_property
    def gN(self) -> Germ:
        t = self.split.tgt
        return Germ(t.g, np.einsum("cij,ck->ijk", t.dg, self.split.differential))

    @cached_property
    def JM(self) -> Germ:
        return Germ(self.split.src.J, self.split.src.dJ)

    @cached_property
    def JN(self) -> Germ:
        t = self.split.tgt
        return Germ(t.J, np.einsum("abc,ck->abk", t.dJ, self.split.differential))

    @cached_property
    def Ph(self) -> Germ:
        Q = self.gM.inv() @ self.A.T @ self.const(self.split.pushed_basis)
        return projector_germ(Q, self.gM)

    @cached_property
    def Pv(self) -> Germ:
        return self.const(np.eye(self.m)) - self.Ph

    @cached_property
    def Pr(self) -> Germ:
        return projector_germ(self.A @ self.const(self.split.horizontal_basis), self.gN)

    @cached_property
    def Pp(self) -> Germ:
        return Germ.constant(np.eye(self.n), self.m) - self.Pr

    @cached_property
    def adjoint(self) -> Germ:
        return self.gM.inv() @ self.A.T @ self.gN

    @cached_property
    def lambda_sq(self) -> Germ:
        """lambda^2 as a germ (trace formula)."""
        M = self.gM.inv() @ self.A.T @ self.gN @ self.A
        r = self.split.rank
        return Germ(np.asarray(np.trace(M.value) / r), np.einsum("iik->k", M.jac) / r)

    # field extensions
    def vfield(self, e) -> Germ:
        return self.Pv @ self.const(e)

    def hfield(self, e) -> Germ:
        return self.Ph @ self.const(e)

    def rfield(self, w) -> Germ:
        return self.Pr @ Germ.constant(w, self.m)

    def pfield(self, w) -> Germ:
        return self.Pp @ Germ.constant(w, self.m)

    def push(self, X: Germ) -> Germ:
        return self.A @ X

    # --- connections ---------------------------------------------------
    @property
    def gamma_M(self) -> np.ndarray:
        return self.split.src.gamma

    @property
    def gamma_N(self) -> np.ndarray:
        return self.split.tgt.gamma

    def nabla_M(self, X, W: Germ) -> np.ndarray:
        """Levi-Civita derivative on the source of the field germ ``W`` along ``X``."""
        return W.along(X) + np.einsum("kij,i,j->k", self.gamma_M, X, W.value)

    def nabla_F(self, X, W: Germ) -> np.ndarray:
        """Pullback-connection derivative of a target-valued germ along source ``X``."""
        AX = self.split.differential @ X
        return W.along(X) + np.einsum("kij,i,j->k", self.gamma_N, AX, W.value)

    def nabla_N_transverse(self, P, W) -> np.ndarray:
        """Target derivative along a range-perp direction.

        Fields known only along the image are extended constantly in the
        transverse coordinate directions, which leaves only the Christoffel term.
        """
        return np.einsum("kij,i,j->k", self.gamma_N, P, W)

    # --- inner products ------------------------------------------------
    def ipM(self, u, v) -> float:
        return float(u @ self.split.src.g @ v)

    def ipN(self, u, v) -> float:
        return float(u @ self.split.tgt.g @ v)

    def normM(self, u) -> float:
        return float(np.sqrt(max(self.ipM(u, u), 0.0)))

    def normN(self, u) -> float:
        return float(np.sqrt(max(self.ipN(u, u), 0.0)))

    # --- frames --------------------------------------------------------
    @property
    def vertical(self) -> list[np.ndarray]:
        b = self.split.vertical_basis
        return [b[:, i] for i in range(b.shape[1])]

    @property
    def horizontal(self) -> list[np.ndarray]:
        b = self.split.horizontal_basis
        return [b[:, i] for i in range(b.shape[1])]

    @property
    def perp(self) -> list[np.ndarray]:
        b = self.split.range_perp_basis
        return [b[:, i] for i in range(b.shape[1])]

    # --- second fundamental form ---------------------------------------
    @cached_property
    def sff_tensor(self) -> np.ndarray:
        """``S[a, i, j]`` with ``(nabla F*)(X, Y)^a = S[a, i, j] X^i Y^j``."""
        A, H = self.split.differential, self.split.second
        return (H - np.einsum("kij,ak->aij", self.gamma_M, A)
                + np.einsum("abc,bi,cj->aij", self.gamma_N, A, A))

    def sff(self, X, Y) -> np.ndarray:
        return np.einsum("aij,i,j->a", self.sff_tensor, X, Y)

    def sff_value(self, X, Y) -> SFFValue:
        total = self.sff(X, Y)
        r = self.split.P_range @ total
        return SFFValue(total, r, total - r)

    # --- dilation ------------------------------------------------------
    @cached_property
    def dlog_lambda(self) -> np.ndarray:
        return self.lam.dlog(self.split.point, self.split.rank)

    @cached_property
    def grad_log_lambda(self) -> np.ndarray:
        return self.split.src.ginv @ self.dlog_lambda

    def is_conformal(self, tol: float = CONFORMAL_TOL) -> bool:
        return self.split.conformal_residual <= tol * max(1.0, self.split.lambda_sq)

    # --- O'Neill tensors -----------------------------------------------
    def T(self, D, E) -> np.ndarray:
        """``T_D E = H nabla_{vD} vE + V nabla_{vD} hE``."""
        s = self.split
        vD = s.P_vertical @ D
        return (s.P_horizontal @ self.nabla_M(vD, self.vfield(s.P_vertical @ E))
                + s.P_vertical @ self.nabla_M(vD, self.hfield(s.P_horizontal @ E)))

    def A_tensor(self, D, E) -> np.ndarray:
        """``A_D E = H nabla_{hD} vE + V nabla_{hD} hE``."""
        s = self.split
        hD = s.P_horizontal @ D
        return (s.P_horizontal @ self.nabla_M(hD, self.vfield(s.P_vertical @ E))
                + s.P_vertical @ self.nabla_M(hD, self.hfield(s.P_horizontal @ E)))

    def lie_bracket(self, X: Germ, Y: Germ) -> np.ndarray:
        return Y.along(X.value) - X.along(Y.value)


def sff_at(F: SmoothMap, X: VectorField, Y: VectorField, p, split: PointSplit | None = None) -> SFFValue:
    """``(nabla F*)(X, Y) = nabla^F_X F*Y - F*(nabla_X Y)`` from field jets.

    The derivative of ``F*Y`` is formed from the jets of ``Y`` and the second
    jets of ``F``; the result is split along range F* and its complement.
    """
    p = np.asarray(p, dtype=float)
    if split is None:
        split = split_at(F, p, allow_full_rank=True)
    A, H = split.differential, split.second
    xv, _ = X.jet1(p)
    yv, yd = Y.jet1(p)
    # d_i (A Y)^a = H[a, j, i] Y^j + A[a, j] d_i Y^j
    d_pushY = np.einsum("aji,j->ai", H, yv) + A @ yd
    nablaF = d_pushY @ xv + np.einsum("abc,b,c->a", split.tgt.gamma, A @ xv, A @ yv)
    nablaM = yd @ xv + np.einsum("kij,i,j->k", split.src.gamma, xv, yv)
    total = nablaF - A @ nablaM
    r = split.P_range @ total
    return SFFValue(total, r, total - r)


def sff_conformal_identity_at(ctx: MapContext, X, Y) -> float:
    """Norm of ``SFF^range(X, Y) - [X(ln l) F*Y + Y(ln l) F*X - g(X, Y) F*(grad ln l)]``."""
    if not ctx.is_conformal():
        raise NotConformalError(
            f"map is not conformal at {tuple(ctx.split.point)} "
            f"(residual {ctx.split.conformal_residual:.3g})")
    s = ctx.split
    dl = ctx.dlog_lambda
    rhs = (float(dl @ X) * s.push(Y) + float(dl @ Y) * s.push(X)
           - ctx.ipM(X, Y) * s.push(ctx.grad_log_lambda))
    return ctx.normN(ctx.sff_value(X, Y).range_part - rhs)


@dataclass(frozen=True)
class ONeillAtPoint:
    frame: np.ndarray          # columns: vertical basis then horizontal basis
    n_vertical: int
    T: np.ndarray              # T[i, j] = T_{E_i} E_j
    A: np.ndarray              # A[i, j] = A_{E_i} E_j
    decomposition_residuals: dict
    vertical_symmetry: float


def oneill_at(ctx: MapContext) -> ONeillAtPoint:
    s = ctx.split
    V, H = s.vertical_basis, s.horizontal_basis
    frame = np.hstack([V, H])
    k = frame.shape[1]
    T = np.empty((k, k, ctx.m))
    A = np.empty((k, k, ctx.m))
    for i in range(k):
        for j in range(k):
            T[i, j] = ctx.T(frame[:, i], frame[:, j])
            A[i, j] = ctx.A_tensor(frame[:, i], frame[:, j])
    Pv, Ph = s.P_vertical, s.P_horizontal
    res = {"c": 0.0, "d": 0.0, "e": 0.0, "f": 0.0}
    nv = V.shape[1]
    for i in range(k):
        for j in range(k):
            Di, Ej = frame[:, i], frame[:, j]
            vi, hj = i < nv, j >= nv
            field = ctx.hfield(Ej) if hj else ctx.vfield(Ej)
            full = ctx.nabla_M(Di, field)
            if vi and not hj:      # nabla_V W = T_V W + V nabla_V W
                key, other = "c", Pv @ full
                tens = T[i, j]
            elif vi and hj:        # nabla_V X = H nabla_V X + T_V X
                key, other = "d", Ph @ full
                tens = T[i, j]
            elif not vi and not hj:  # nabla_X V = A_X V + V nabla_X V
                key, other = "e", Pv @ full
                tens = A[i, j]
            else:                  # nabla_X Y = A_X Y + H nabla_X Y
                key, other = "f", Ph @ full
                tens = A[i, j]
            res[key] = max(res[key], ctx.normM(full - (tens + other)))
    sym = 0.0
    for i in range(nv):
        for j in range(nv):
            sym = max(sym, ctx.normM(T[i, j] - T[j, i]))
    return ONeillAtPoint(frame, nv, T, A, res, sym)


@dataclass(frozen=True)
class ShapeOperatorValue:
    value: np.ndarray
    duality_residual: float


def _perp_germ(ctx: MapContext, V) -> Germ:
    s = ctx.split
    if isinstance(V, VectorField):
        vals, grads = V.jet1(s.value)
        germ = Germ(vals, grads @ s.differential)
    elif isinstance(V, Germ):
        germ = V
    else:
        v = np.asarray(V, dtype=float)
        if ctx.normN(s.P_range @ v) > 1e-8 * max(1.0, ctx.normN(v)):
            raise SubspaceError("V is not orthogonal to the range at this point")
        germ = ctx.pfield(v)
    v = germ.value
    if ctx.normN(s.P_range @ v) > 1e-8 * max(1.0, ctx.normN(v)):
        raise SubspaceError("V is not orthogonal to the range at this point")
    return germ


def s_operator_at(ctx: MapContext, V, X) -> ShapeOperatorValue:
    """``S_V F*X = -(range part of nabla^F_X V)`` with the duality residual
    ``max_Y |g(S_V F*X, F*Y) - g(V, SFF(X, Y))|`` over the horizontal frame."""
    s = ctx.split
    Vg = _perp_germ(ctx, V)
    S = -(s.P_range @ ctx.nabla_F(X, Vg))
    dual = 0.0
    for Y in ctx.horizontal:
        dual = max(dual, abs(ctx.ipN(S, s.push(Y)) - ctx.ipN(Vg.value, ctx.sff(X, Y))))
    return ShapeOperatorValue(S, dual)


@dataclass(frozen=True)
class SlantCovariantDerivatives:
    nabla_omega: np.ndarray
    nabla_phi: np.ndarray
    eq17_res: float
    eq18_res: float
    omega_parallel_res: float


def omega_phi_covderiv_at(ctx: MapContext, V, W) -> SlantCovariantDerivatives:
    s = ctx.split
    Pv, Ph = s.P_vertical, s.P_horizontal
    J = s.src.J
    phi, omega = Pv @ J @ Pv, Ph @ J @ Pv
    B, C = Pv @ J @ Ph, Ph @ J @ Ph
    Wf = ctx.vfield(W)
    JM = ctx.JM
    omegaW = ctx.Ph @ JM @ Wf
    phiW = ctx.Pv @ JM @ Wf
    hat_VW = Pv @ ctx.nabla_M(V, Wf)
    n_omega = Ph @ ctx.nabla_M(V, omegaW) - omega @ hat_VW
    n_phi = Pv @ ctx.nabla_M(V, phiW) - phi @ hat_VW
    TVW = ctx.T(V, W)
    r17 = ctx.normM(n_omega - (C @ TVW - ctx.T(V, phi @ W)))
    r18 = ctx.normM(n_phi - (B @ TVW - ctx.T(V, omega @ W)))
    return SlantCovariantDerivatives(n_omega, n_phi, r17, r18, ctx.normM(n_omega))


@dataclass(frozen=True)
class TensionValue:
    tension: np.ndarray
    norm: float
    harmonic: bool


#: harmonicity threshold on the tension norm
TOL_HARMONIC = 1e-7


def tension_at(ctx: MapContext, tol: float = TOL_HARMONIC) -> TensionValue:
    """Trace of the second fundamental form over the vertical plus horizontal frame."""
    tau = np.zeros(ctx.n)
    for e in ctx.vertical + ctx.horizontal:
        tau = tau + ctx.sff(e, e)
    norm = ctx.normN(tau)
    return TensionValue(tau, norm, norm <= tol)


__all__ = [
    "CONFORMAL_TOL", "LambdaField", "MapContext", "NotConformalError", "ONeillAtPoint",
    "SFFValue", "ShapeOperatorValue", "SlantCovariantDerivatives", "TOL_HARMONIC",
    "TensionValue", "lambda_sq_fd_gradient", "omega_phi_covderiv_at", "oneill_at",
    "s_operator_at", "sff_at", "sff_conformal_identity_at", "tension_at",
]
