"""Compare the compiled and pure-Python jet evaluators.

Usage: python3 benchmarks/bench_jets.py [--repeat N]

Both backends evaluate the same tapes at the same points; the script prints
per-call timings, the speedup, and the largest difference between results.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from slantmap.exprlang import _jet_py, parse

try:
    from slantmap.exprlang import _jetkernel
except ImportError:  # extension not built
    _jetkernel = None

CASES = {
    "ex3_1 component": ("exp(x1)*cos(x3)", 4),
    "ex4_1 component": ("pi^a*(x5*cosh(a) - x4*sinh(a))", 6),
    "sphere metric": ("sin(x1)^2", 2),
    "nested": ("ln(1 + x1^2 + x2^2) * sqrt(2 + sin(x1*x2)) / (3 + cos(x3))^2 + sinh(x1 - x3)", 3),
}


def run(repeat: int) -> list[tuple]:
    rng = np.random.default_rng(0)
    rows = []
    for label, (text, dim) in CASES.items():
        e = parse(text, dim, {"a": 0.3})
        t = e.tape
        p = np.ascontiguousarray(rng.uniform(-0.9, 0.9, dim))
        args = (t.ops, t.a, t.b, t.consts, p)
        py = timeit.timeit(lambda: _jet_py.eval_tape(*args), number=repeat) / repeat
        if _jetkernel is None:
            rows.append((label, py, None, None))
            continue
        cy = timeit.timeit(lambda: _jetkernel.eval_tape(*args), number=repeat) / repeat
        r_py = _jet_py.eval_tape(*args)
        r_cy = _jetkernel.eval_tape(*args)
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(r_py[1:], r_cy[1:]))
        rows.append((label, py, cy, diff))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    print(f"{'case':<18} {'python us':>10} {'compiled us':>12} {'speedup':>8} {'max diff':>10}")
    for label, py, cy, diff in run(args.repeat):
        if cy is None:
            print(f"{label:<18} {py * 1e6:10.2f} {'n/a':>12}")
        else:
            print(f"{label:<18} {py * 1e6:10.2f} {cy * 1e6:12.2f} {py / cy:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
