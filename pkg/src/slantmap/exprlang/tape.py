"""Flatten an expression tree into a post-order instruction tape.

Both jet backends evaluate the same tape, one slot per instruction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ast import Binary, Node, Num, Param, Unary, Var, is_constant

CONST, VAR, ADD, SUB, MUL, DIV, POWC, NEG = range(8)
SIN, COS, TAN, SINH, COSH, EXP, LN, SQRT = range(8, 16)

UNARY_CODES = {
    "neg": NEG, "sin": SIN, "cos": COS, "tan": TAN, "sinh": SINH,
    "cosh": COSH, "exp": EXP, "ln": LN, "sqrt": SQRT,
}
BINARY_CODES = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}


@dataclass(frozen=True, eq=False)
class Tape:
    ops: np.ndarray     # int32 opcode per slot
    a: np.ndarray       # int32 first operand slot (or variable index)
    b: np.ndarray       # int32 second operand slot
    consts: np.ndarray  # float64 literal for CONST slots
    nodes: tuple        # originating node per slot, for error messages

    def __len__(self) -> int:
        return len(self.ops)


def compile_tape(root: Node) -> Tape:
    ops: list[int] = []
    a: list[int] = []
    b: list[int] = []
    consts: list[float] = []
    nodes: list[Node] = []

    def emit(op, x=-1, y=-1, c=0.0, node=None):
        ops.append(op)
        a.append(x)
        b.append(y)
        consts.append(c)
        nodes.append(node)
        return len(ops) - 1

    def visit(node: Node) -> int:
        if isinstance(node, (Num, Param)):
            return emit(CONST, c=float(node.value), node=node)
        if isinstance(node, Var):
            return emit(VAR, x=node.index, node=node)
        if isinstance(node, Unary):
            return emit(UNARY_CODES[node.op], visit(node.arg), node=node)
        if isinstance(node, Binary):
            left = visit(node.left)
            right = visit(node.right)
            if node.op != "^":
                return emit(BINARY_CODES[node.op], left, right, node=node)
            if is_constant(node.right):
                return emit(POWC, left, right, node=node)
            # u^v with a varying exponent is exp(v * ln u)
            log = emit(LN, left, node=node)
            prod = emit(MUL, right, log, node=node)
            return emit(EXP, prod, node=node)
        raise TypeError(f"unknown node {node!r}")

    visit(root)
    return Tape(
        np.asarray(ops, dtype=np.int32),
        np.asarray(a, dtype=np.int32),
        np.asarray(b, dtype=np.int32),
        np.asarray(consts, dtype=np.float64),
        tuple(nodes),
    )
