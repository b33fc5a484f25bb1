"""Scalar expressions of chart coordinates and their second-order jets."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _jet_py
from .ast import Binary, Node, Num, Unary, Var, is_constant, max_var_index, to_text
from .parser import ExprError, ParamValue, parse_tree
from .tape import Tape, compile_tape


def _select_backend():
    choice = os.environ.get("SLANTMAP_BACKEND", "auto").lower()
    if choice == "python":
        return "python", _jet_py.eval_tape
    try:
        from . import _jetkernel
    except ImportError:
        if choice == "compiled":
            raise
        return "python", _jet_py.eval_tape
    return "compiled", _jetkernel.eval_tape


BACKEND, _eval_tape = _select_backend()


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the domain of an operation (ln of a non-positive, 1/0, ...)."""

    def __init__(self, subexpr: str, point):
        super().__init__(f"domain error in {subexpr} at point {tuple(float(x) for x in point)}")
        self.subexpr = subexpr
        self.point = tuple(point)


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (exactly symmetric) Hessian at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True, eq=False)
class ScalarExpr:
    """Immutable parsed expression in the coordinates ``x1..x{dim}``."""

    root: Node
    dim: int
    params: Mapping[str, float] = field(default_factory=dict)
    tape: Tape = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if max_var_index(self.root) >= self.dim:
            raise ValueError(f"expression references x{max_var_index(self.root) + 1} "
                             f"beyond dimension {self.dim}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        object.__setattr__(self, "tape", compile_tape(self.root))

    @classmethod
    def constant(cls, value: float, dim: int) -> "ScalarExpr":
        return cls(Num(float(value)), dim)

    @classmethod
    def coordinate(cls, index: int, dim: int) -> "ScalarExpr":
        """The coordinate function ``x{index+1}``."""
        return cls(Var(index), dim)

    @property
    def is_constant(self) -> bool:
        return is_constant(self.root)

    def to_text(self) -> str:
        return to_text(self.root)

    def __str__(self) -> str:
        return self.to_text()

    # expression-level arithmetic, used to apply J to vector fields exactly
    def _lift(self, other) -> "ScalarExpr":
        if isinstance(other, ScalarExpr):
            return other
        return ScalarExpr.constant(float(other), self.dim)

    def _combine(self, op: str, other, reflected=False) -> "ScalarExpr":
        other = self._lift(other)
        left, right = (other, self) if reflected else (self, other)
        params = {**left.params, **right.params}
        return ScalarExpr(Binary(op, left.root, right.root), max(left.dim, right.dim), params)

    def __add__(self, other):
        return self._combine("+", other)

    def __radd__(self, other):
        return self._combine("+", other, reflected=True)

    def __sub__(self, other):
        return self._combine("-", other)

    def __rsub__(self, other):
        return self._combine("-", other, reflected=True)

    def __mul__(self, other):
        return self._combine("*", other)

    def __rmul__(self, other):
        return self._combine("*", other, reflected=True)

    def __truediv__(self, other):
        return self._combine("/", other)

    def __neg__(self):
        return ScalarExpr(Unary("neg", self.root), self.dim, self.params)


def parse(text: str, dim: int, params: Mapping[str, ParamValue] | None = None) -> ScalarExpr:
    """Parse ``text`` as an expression in ``dim`` coordinates.

    ``params`` maps names to numbers or to already-parsed expressions, which
    are substituted as subtrees (this is how a slant parameter can be bound
    to a coordinate function).
    """
    resolved = {}
    numeric = {}
    for name, value in (params or {}).items():
        if isinstance(value, ScalarExpr):
            resolved[name] = value.root
        else:
            resolved[name] = float(value)
            numeric[name] = float(value)
    return ScalarExpr(parse_tree(text, dim, resolved), dim, numeric)


def _subexpr_text(e: ScalarExpr, slot: int) -> str:
    node = e.tape.nodes[slot]
    return to_text(node) if node is not None else e.to_text()


def _as_point(e: ScalarExpr, p) -> np.ndarray:
    point = np.ascontiguousarray(p, dtype=np.float64)
    if point.ndim != 1 or point.shape[0] != e.dim:
        raise ValueError(f"point has shape {point.shape}, expected ({e.dim},)")
    return point


def eval_jet2(e: ScalarExpr, p: Sequence[float]) -> Jet2:
    """Value, gradient and Hessian of ``e`` at ``p`` in one forward pass."""
    point = _as_point(e, p)
    t = e.tape
    bad, value, grad, hess = _eval_tape(t.ops, t.a, t.b, t.consts, point)
    if bad >= 0:
        raise ExprDomainError(_subexpr_text(e, bad), point)
    return Jet2(float(value), grad, hess)


def eval_value(e: ScalarExpr, p: Sequence[float]) -> float:
    return eval_jet2(e, p).value


def eval_jets(exprs: Iterable[ScalarExpr], p: Sequence[float], shape=None):
    """Stack jets of several expressions at one point.

    Returns ``(values, grads, hessians)`` with shapes ``shape``,
    ``shape + (n,)`` and ``shape + (n, n)``.
    """
    exprs = list(exprs)
    n = len(p)
    vals = np.empty(len(exprs))
    grads = np.empty((len(exprs), n))
    hess = np.empty((len(exprs), n, n))
    for k, e in enumerate(exprs):
        j = eval_jet2(e, p)
        vals[k], grads[k], hess[k] = j.value, j.gradient, j.hessian
    if shape is not None:
        shape = tuple(shape)
        return vals.reshape(shape), grads.reshape(shape + (n,)), hess.reshape(shape + (n, n))
    return vals, grads, hess
