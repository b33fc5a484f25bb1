"""Shared builders for the test modules."""
from pathlib import Path

import numpy as np
from slantmap.exprlang import eval_jet2, eval_value
from slantmap.geometry import ChartManifold
from slantmap.maps import SmoothMap
from slantmap.scenario import parse_scenario

SCENARIOS = Path(__file__).parent / "scenarios"

J_T = {(1, 3): "cos(t)", (1, 2): "sin(t)", (2, 1): "-sin(t)", (2, 4): "cos(t)",
       (3, 1): "-cos(t)", (3, 4): "-sin(t)", (4, 2): "-cos(t)", (4, 3): "sin(t)"}


def kaehler_r4(t=0.7):
    return ChartManifold.from_entries(4, None, J_T, params={"t": t}, name="K")


def ex31_map(t=0.7):
    return SmoothMap.parse(kaehler_r4(t), ChartManifold.from_entries(4),
                           ["exp(x1)*cos(x3)", "0", "exp(x1)*sin(x3)", "0"])


def ex41_map(t=0.7, a=0.3, b=1.0, metric=None):
    src = ChartManifold.from_entries(6, metric)
    return SmoothMap.parse(src, kaehler_r4(t),
                           ["pi^a*(x3*sinh(a) - x2*cosh(a))", "0",
                            "pi^a*(x5*cosh(a) - x4*sinh(a))", "pi^a*sqrt(2)*cos(b)"],
                           {"a": a, "b": b})


def conformal_ex41(f="0.3*x1 + 0.2*x2*x3"):
    """ex4_1 with the source metric rescaled by exp(2f): lambda varies, SFF is nonzero."""
    return ex41_map(metric={(i, i): f"exp(2*({f}))" for i in range(1, 7)})


def load_test_scenario(name, **over):
    return parse_scenario((SCENARIOS / f"{name}.scn").read_bytes(), name=name, overrides=over or None)


UNARY = ["sin", "cos", "sinh", "cosh", "exp", "tan"]
SAFE_UNARY = {"ln": "ln(2 + {})", "sqrt": "sqrt(3 + {})"}


def random_expr(rng, dim, depth=0):
    """Random expression text that stays inside every function's domain on [-1, 1]^dim."""
    if depth > 3 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return f"x{rng.integers(1, dim + 1)}"
        return f"{rng.uniform(-2, 2):.3f}"
    kind = rng.integers(0, 6)
    a = random_expr(rng, dim, depth + 1)
    if kind == 0:
        f = UNARY[rng.integers(0, len(UNARY))]
        if f == "tan":
            return f"tan(0.4*sin({a}))"
        if f in ("exp", "sinh", "cosh"):
            return f"{f}(0.5*sin({a}))"
        return f"{f}({a})"
    if kind == 1:
        f = list(SAFE_UNARY)[rng.integers(0, 2)]
        return SAFE_UNARY[f].format(f"sin({a})")
    b = random_expr(rng, dim, depth + 1)
    if kind == 2:
        return f"({a}) + ({b})"
    if kind == 3:
        return f"({a}) * ({b})"
    if kind == 4:
        return f"({a}) / (2 + sin({b}))"
    return f"({a})^2 - ({b})"


def _richardson(d, h):
    return (4 * d(h / 2) - d(h)) / 3


def fd_jets(e, p, h=1e-5):
    """Gradient from value differences; Hessian from differences of the AD gradient."""
    n = len(p)
    eye = np.eye(n)
    g = np.array([_richardson(lambda s: (eval_value(e, p + s * eye[i]) - eval_value(e, p - s * eye[i])) / (2 * s), h)
                  for i in range(n)])
    grad = lambda x: eval_jet2(e, x).gradient
    H = np.array([_richardson(lambda s: (grad(p + s * eye[i]) - grad(p - s * eye[i])) / (2 * s), h)
                  for i in range(n)])
    return g, H


#: one (criterion, passed, detail) entry per acceptance criterion, printed at session end
ACCEPTANCE_LINES: list = []
