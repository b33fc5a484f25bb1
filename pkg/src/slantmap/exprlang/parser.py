"""Recursive-descent parser for coordinate expressions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := ("-")? power
    power  := atom ("^" factor)?
    atom   := number | ident | ident "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so
``-x1^2`` is ``-(x1^2)``.  Identifiers are coordinates ``x1..xn``, the
constant ``pi``, parameter names, or one of the functions in
:data:`~slantmap.exprlang.ast.FUNCTIONS`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .ast import FUNCTIONS, Binary, Node, Num, Param, Unary, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()−])
    """,
    re.VERBOSE,
)
_COORD_RE = re.compile(r"x([1-9][0-9]*)$")
CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Malformed input; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.reason = message
        self.offset = offset
        self.text = text


class UnknownIdentifierError(ExprSyntaxError):
    pass


class VariableRangeError(ExprSyntaxError):
    pass


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 encoding


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", byte_pos, text)
        chunk = m.group(0)
        if m.lastgroup != "ws":
            tok_text = "-" if chunk == "−" else chunk
            tokens.append(_Token(m.lastgroup, tok_text, byte_pos))
        byte_pos += len(chunk.encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


ParamValue = Union[float, int, Node]


class _Parser:
    def __init__(self, text: str, dim: int, params: Mapping[str, ParamValue]):
        self.text = text
        self.dim = dim
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _error(self, message: str, tok: _Token | None = None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(message, tok.offset, self.text)

    def _expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            found = self.tok.text or "end of input"
            raise self._error(f"expected {text!r}, found {found!r}")
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self._error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Unary("neg", self.power())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr()
            self._expect(")")
            return node
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Unary(name, arg)
            m = _COORD_RE.match(name)
            if m:
                k = int(m.group(1))
                if k > self.dim:
                    raise self._error(
                        f"variable {name} out of range for dimension {self.dim}",
                        tok,
                        VariableRangeError,
                    )
                return Var(k - 1)
            if name in self.params:
                value = self.params[name]
                if isinstance(value, Node):
                    return value
                return Param(name, float(value))
            if name in CONSTANTS:
                return Param(name, CONSTANTS[name])
            raise self._error(f"unknown identifier {name!r}", tok, UnknownIdentifierError)
        found = tok.text or "end of input"
        raise self._error(f"unexpected token {found!r}")


def parse_tree(text: str, dim: int, params: Mapping[str, ParamValue] | None = None) -> Node:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text)
    return _Parser(text, dim, params or {}).parse()
