# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled second-order jet evaluation of an instruction tape.

Mirrors ``_jet_py.eval_tape`` operation for operation.  Each slot stores
value, gradient (n) and the upper triangle of the Hessian, mirrored on
output so the result is exactly symmetric.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, sinh, cosh, exp, log, sqrt, pow, floor, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

DEF CONST = 0
DEF VAR = 1
DEF ADD = 2
DEF SUB = 3
DEF MUL = 4
DEF DIV = 5
DEF POWC = 6
DEF NEG = 7
DEF SIN = 8
DEF COS = 9
DEF TAN = 10
DEF SINH = 11
DEF COSH = 12
DEF EXP = 13
DEF LN = 14
DEF SQRT = 15


cdef inline bint _unary(int op, double u, double *f0, double *f1, double *f2) nogil:
    cdef double s, c, t, e, inv
    if op == NEG:
        f0[0] = -u; f1[0] = -1.0; f2[0] = 0.0
    elif op == SIN:
        s = sin(u); c = cos(u)
        f0[0] = s; f1[0] = c; f2[0] = -s
    elif op == COS:
        s = sin(u); c = cos(u)
        f0[0] = c; f1[0] = -s; f2[0] = -c
    elif op == TAN:
        if cos(u) == 0.0:
            return False
        t = tan(u)
        f0[0] = t; f1[0] = 1.0 + t * t; f2[0] = 2.0 * t * f1[0]
    elif op == SINH:
        f0[0] = sinh(u); f1[0] = cosh(u); f2[0] = f0[0]
    elif op == COSH:
        f0[0] = cosh(u); f1[0] = sinh(u); f2[0] = f0[0]
    elif op == EXP:
        e = exp(u)
        f0[0] = e; f1[0] = e; f2[0] = e
    elif op == LN:
        if u <= 0.0:
            return False
        inv = 1.0 / u
        f0[0] = log(u); f1[0] = inv; f2[0] = -inv * inv
    elif op == SQRT:
        if u <= 0.0:
            return False
        s = sqrt(u)
        f0[0] = s; f1[0] = 0.5 / s; f2[0] = -0.25 / (s * u)
    else:
        return False
    return True


cdef inline bint _powc(double u, double c, double *f0, double *f1, double *f2) nogil:
    if u < 0.0 and c != floor(c):
        return False
    if u == 0.0 and c < 2.0 and c != 0.0 and c != 1.0:
        return False
    f0[0] = pow(u, c)
    f1[0] = 0.0 if c == 0.0 else c * pow(u, c - 1.0)
    f2[0] = 0.0 if (c == 0.0 or c == 1.0) else c * (c - 1.0) * pow(u, c - 2.0)
    return True


def eval_tape(const int[:] ops, const int[:] a, const int[:] b,
              const double[:] consts, const double[:] point):
    """Evaluate a tape; returns ``(bad_slot, value, grad, hess)``."""
    cdef Py_ssize_t n = point.shape[0]
    cdef Py_ssize_t nslots = ops.shape[0]
    cdef Py_ssize_t stride = 1 + n + n * n
    cdef double *buf = <double *> malloc(nslots * stride * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t k, i, j, p, q
    cdef int op
    cdef double *s
    cdef double *x
    cdef double *y
    cdef double u, v, qv, f0 = 0.0, f1 = 0.0, f2 = 0.0
    cdef bint ok
    cdef Py_ssize_t bad = -1
    try:
        with nogil:
            for k in range(nslots):
                op = ops[k]
                s = buf + k * stride
                if op == CONST or op == VAR:
                    for p in range(1, stride):
                        s[p] = 0.0
                    if op == CONST:
                        s[0] = consts[k]
                    else:
                        s[0] = point[a[k]]
                        s[1 + a[k]] = 1.0
                elif op == ADD or op == SUB:
                    x = buf + a[k] * stride
                    y = buf + b[k] * stride
                    if op == ADD:
                        for p in range(stride):
                            s[p] = x[p] + y[p]
                    else:
                        for p in range(stride):
                            s[p] = x[p] - y[p]
                elif op == MUL:
                    x = buf + a[k] * stride
                    y = buf + b[k] * stride
                    u = x[0]; v = y[0]
                    s[0] = u * v
                    for p in range(n):
                        s[1 + p] = u * y[1 + p] + v * x[1 + p]
                    for p in range(n):
                        for q in range(p, n):
                            s[1 + n + p * n + q] = ((u * y[1 + n + p * n + q] + v * x[1 + n + p * n + q])
                                                    + x[1 + p] * y[1 + q]) + y[1 + p] * x[1 + q]
                elif op == DIV:
                    x = buf + a[k] * stride
                    y = buf + b[k] * stride
                    v = y[0]
                    if v == 0.0:
                        bad = k
                        break
                    qv = x[0] / v
                    s[0] = qv
                    for p in range(n):
                        s[1 + p] = (x[1 + p] - qv * y[1 + p]) / v
                    for p in range(n):
                        for q in range(p, n):
                            s[1 + n + p * n + q] = (((x[1 + n + p * n + q] - qv * y[1 + n + p * n + q])
                                                     - s[1 + p] * y[1 + q]) - y[1 + p] * s[1 + q]) / v
                else:
                    x = buf + a[k] * stride
                    u = x[0]
                    if op == POWC:
                        ok = _powc(u, buf[b[k] * stride], &f0, &f1, &f2)
                    else:
                        ok = _unary(op, u, &f0, &f1, &f2)
                    if not ok:
                        bad = k
                        break
                    s[0] = f0
                    for p in range(n):
                        s[1 + p] = f1 * x[1 + p]
                    for p in range(n):
                        for q in range(p, n):
                            s[1 + n + p * n + q] = f1 * x[1 + n + p * n + q] + f2 * (x[1 + p] * x[1 + q])
                if not isfinite(s[0]):
                    bad = k
                    break
        if bad >= 0:
            return bad, 0.0, None, None
        s = buf + (nslots - 1) * stride
        grad = np.empty(n, dtype=np.float64)
        hess = np.empty((n, n), dtype=np.float64)
        for p in range(n):
            grad[p] = s[1 + p]
            for q in range(p, n):
                hess[p, q] = s[1 + n + p * n + q]
                hess[q, p] = s[1 + n + p * n + q]
        return -1, s[0], grad, hess
    finally:
        free(buf)
