"""Pure-Python second-order forward evaluation of an instruction tape.

Reference implementation for ``_jetkernel.pyx``; the arithmetic order of
every update matches the compiled kernel so both backends agree to the
last bit on the same libm.
"""
from __future__ import annotations

import math

import numpy as np

from .tape import (ADD, CONST, COS, COSH, DIV, EXP, LN, MUL, NEG, POWC, SIN,
                   SINH, SQRT, SUB, TAN, VAR)


def _unary_coeffs(op: int, u: float):
    """(f, f', f'') at u, or None outside the domain."""
    if op == NEG:
        return -u, -1.0, 0.0
    if op == SIN:
        s, c = math.sin(u), math.cos(u)
        return s, c, -s
    if op == COS:
        s, c = math.sin(u), math.cos(u)
        return c, -s, -c
    if op == TAN:
        if math.cos(u) == 0.0:
            return None
        t = math.tan(u)
        d1 = 1.0 + t * t
        return t, d1, 2.0 * t * d1
    if op == SINH:
        sh, ch = math.sinh(u), math.cosh(u)
        return sh, ch, sh
    if op == COSH:
        sh, ch = math.sinh(u), math.cosh(u)
        return ch, sh, ch
    if op == EXP:
        e = math.exp(u)
        return e, e, e
    if op == LN:
        if u <= 0.0:
            return None
        inv = 1.0 / u
        return math.log(u), inv, -inv * inv
    if op == SQRT:
        if u <= 0.0:
            return None
        s = math.sqrt(u)
        return s, 0.5 / s, -0.25 / (s * u)
    raise ValueError(f"not a unary opcode: {op}")


def _powc_coeffs(u: float, c: float):
    if u < 0.0 and c != math.floor(c):
        return None
    if u == 0.0 and c < 2.0 and c not in (0.0, 1.0):
        return None
    f0 = math.pow(u, c)
    f1 = 0.0 if c == 0.0 else c * math.pow(u, c - 1.0)
    f2 = 0.0 if c in (0.0, 1.0) else c * (c - 1.0) * math.pow(u, c - 2.0)
    return f0, f1, f2


def eval_tape(ops, a, b, consts, point):
    """Evaluate a tape at ``point``.

    Returns ``(bad_slot, value, grad, hess)``; ``bad_slot`` is -1 on success,
    otherwise the slot whose operation left its domain.
    """
    n = len(point)
    nslots = len(ops)
    val = [0.0] * nslots
    grad = [None] * nslots
    hess = [None] * nslots
    zero_g = np.zeros(n)
    zero_h = np.zeros((n, n))
    for k in range(nslots):
        op = int(ops[k])
        if op == CONST:
            val[k], grad[k], hess[k] = float(consts[k]), zero_g, zero_h
        elif op == VAR:
            g = np.zeros(n)
            g[a[k]] = 1.0
            val[k], grad[k], hess[k] = float(point[a[k]]), g, zero_h
        elif op in (ADD, SUB):
            i, j = a[k], b[k]
            if op == ADD:
                val[k] = val[i] + val[j]
                grad[k] = grad[i] + grad[j]
                hess[k] = hess[i] + hess[j]
            else:
                val[k] = val[i] - val[j]
                grad[k] = grad[i] - grad[j]
                hess[k] = hess[i] - hess[j]
        elif op == MUL:
            i, j = a[k], b[k]
            u, v = val[i], val[j]
            gu, gv = grad[i], grad[j]
            val[k] = u * v
            grad[k] = u * gv + v * gu
            hess[k] = ((u * hess[j] + v * hess[i]) + np.outer(gu, gv)) + np.outer(gv, gu)
        elif op == DIV:
            i, j = a[k], b[k]
            u, v = val[i], val[j]
            if v == 0.0:
                return k, 0.0, None, None
            q = u / v
            gq = (grad[i] - q * grad[j]) / v
            gv = grad[j]
            hq = (((hess[i] - q * hess[j]) - np.outer(gq, gv)) - np.outer(gv, gq)) / v
            val[k], grad[k], hess[k] = q, gq, hq
        else:
            i = a[k]
            u = val[i]
            try:
                if op == POWC:
                    coeffs = _powc_coeffs(u, val[b[k]])
                else:
                    coeffs = _unary_coeffs(op, u)
            except (OverflowError, ValueError):
                coeffs = None
            if coeffs is None:
                return k, 0.0, None, None
            f0, f1, f2 = coeffs
            gu = grad[i]
            val[k] = f0
            grad[k] = f1 * gu
            hess[k] = f1 * hess[i] + f2 * np.outer(gu, gu)
        if not math.isfinite(val[k]):
            return k, 0.0, None, None
    h = np.triu(np.array(hess[-1], dtype=float))
    # lower entries may differ by an ulp (summation order); keep the upper one
    return -1, val[-1], np.array(grad[-1], dtype=float), h + np.triu(h, 1).T
