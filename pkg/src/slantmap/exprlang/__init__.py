"""Closed-form scalar expressions with exact first and second derivatives."""
from .jets import (BACKEND, ExprDomainError, Jet2, ScalarExpr, eval_jet2,
                   eval_jets, eval_value, parse)
from .parser import (ExprError, ExprSyntaxError, UnknownIdentifierError,
                     VariableRangeError)

__all__ = [
    "BACKEND",
    "ExprDomainError",
    "ExprError",
    "ExprSyntaxError",
    "Jet2",
    "ScalarExpr",
    "UnknownIdentifierError",
    "VariableRangeError",
    "eval_jet2",
    "eval_jets",
    "eval_value",
    "parse",
]
