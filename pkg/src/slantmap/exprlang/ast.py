"""Expression tree nodes and the printer used for round-tripping."""
from __future__ import annotations

from dataclasses import dataclass

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "exp", "ln", "sqrt")
BINARY_OPS = ("+", "-", "*", "/", "^")


class Node:
    __slots__ = ()

    def children(self) -> tuple["Node", ...]:
        return ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int  # zero-based coordinate index


@dataclass(frozen=True)
class Param(Node):
    name: str
    value: float


@dataclass(frozen=True)
class Unary(Node):
    op: str  # "neg" or a name from FUNCTIONS
    arg: Node

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)


def is_constant(node: Node) -> bool:
    """True when the subtree references no coordinate."""
    if isinstance(node, Var):
        return False
    return all(is_constant(c) for c in node.children())


def max_var_index(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    return max((max_var_index(c) for c in node.children()), default=-1)


def to_text(node: Node) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    if isinstance(node, Num):
        if node.value < 0:
            return f"(-{repr(-node.value)})"
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    raise TypeError(f"unknown node {node!r}")
