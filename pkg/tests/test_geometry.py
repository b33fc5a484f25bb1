import math

import numpy as np
import pytest
import sympy as sp

from slantmap.exprlang import parse
from slantmap.geometry import (ChartManifold, MetricError, VectorField, christoffel_at,
                               hermitian_kahler_residuals, lie_bracket_at, nijenhuis_at,
                               riemann_at, space_form_curvature, space_form_value)

from helpers import J_T, kaehler_r4


def sympy_curvature(metric, coords, point):
    """Christoffel symbols and lowered Riemann tensor (same index convention as the package)."""
    n = len(coords)
    g = sp.Matrix(metric)
    gi = g.inv()
    G = [[[sp.simplify(sum(gi[k, l] * (sp.diff(g[j, l], coords[i]) + sp.diff(g[i, l], coords[j])
                                       - sp.diff(g[i, j], coords[l])) for l in range(n)) / 2)
           for j in range(n)] for i in range(n)] for k in range(n)]
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    Rm = [[[[sp.diff(G[a][d][b], coords[c]) - sp.diff(G[a][c][b], coords[d])
             + sum(G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b] for e in range(n))
             for d in range(n)] for c in range(n)] for b in range(n)] for a in range(n)]
    subs = dict(zip(coords, point))
    gnum = np.array(g.subs(subs).evalf(), dtype=float)
    Gnum = np.array([[[float(G[k][i][j].subs(subs).evalf()) for j in range(n)] for i in range(n)]
                     for k in range(n)])
    Rmix = np.array([[[[float(Rm[a][b][c][d].subs(subs).evalf()) for d in range(n)] for c in range(n)]
                      for b in range(n)] for a in range(n)])
    return Gnum, np.einsum("ae,ebcd->abcd", gnum, Rmix)


SYMPY_CASES = [
    ({(1, 1): "1", (2, 2): "x1^2"}, lambda x: [[1, 0], [0, x[0] ** 2]], [2.0, 0.3]),
    ({(1, 1): "exp(2*x1)", (2, 2): "exp(2*x1)"},
     lambda x: [[sp.exp(2 * x[0]), 0], [0, sp.exp(2 * x[0])]], [0.4, -0.2]),
    ({(1, 1): "1 + x2^2", (1, 2): "x1*x2/3", (2, 2): "2 + sin(x1)", (3, 3): "cosh(x2)"},
     lambda x: [[1 + x[1] ** 2, x[0] * x[1] / 3, 0], [x[0] * x[1] / 3, 2 + sp.sin(x[0]), 0],
                [0, 0, sp.cosh(x[1])]], [0.5, 0.7, -0.3]),
]


@pytest.mark.parametrize("entries,symbolic,point", SYMPY_CASES)
def test_christoffel_and_riemann_match_sympy(entries, symbolic, point):
    n = len(point)
    M = ChartManifold.from_entries(n, entries)
    xs = sp.symbols(f"x1:{n + 1}")
    G_ref, R_ref = sympy_curvature(symbolic(xs), xs, point)
    assert np.allclose(christoffel_at(M, point), G_ref, atol=1e-12)
    assert np.allclose(riemann_at(M, point).riemann, R_ref, atol=1e-10)


def test_hand_christoffel_values():
    M = ChartManifold.from_entries(2, {(1, 1): "1", (2, 2): "x1^2"})
    G = christoffel_at(M, [2.0, 0.1])
    assert G[0, 1, 1] == pytest.approx(-2.0)
    assert G[1, 0, 1] == pytest.approx(0.5)
    C = christoffel_at(ChartManifold.from_entries(2, {(1, 1): "exp(2*x1)", (2, 2): "exp(2*x1)"}), [0.3, 0.9])
    assert (C[0, 0, 0], C[0, 1, 1], C[1, 0, 1]) == pytest.approx((1.0, -1.0, 1.0))


def test_christoffel_symmetric_lower_indices(rng):
    M = ChartManifold.from_entries(3, {(1, 1): "2 + sin(x2)", (1, 3): "0.2*x1", (2, 2): "exp(x3)",
                                       (3, 3): "1 + x1^2"})
    for _ in range(20):
        G = christoffel_at(M, rng.uniform(-1, 1, 3))
        assert np.array_equal(G, np.swapaxes(G, 1, 2))


@pytest.mark.parametrize("entries", [None, {(1, 1): "2", (1, 2): "0.5", (2, 2): "3", (3, 3): "1", (4, 4): "7"}])
def test_flat_metrics_have_zero_curvature(entries, rng):
    M = ChartManifold.from_entries(4, entries)
    for _ in range(10):
        assert np.max(np.abs(riemann_at(M, rng.uniform(-1, 1, 4)).riemann)) <= 1e-10


def test_sphere_chart():
    M = ChartManifold.from_entries(2, {(1, 1): "1", (2, 2): "sin(x1)^2"})
    for x1 in (0.4, 1.0, 2.2):
        R = riemann_at(M, [x1, 0.0])
        assert R.riemann[0, 1, 0, 1] == pytest.approx(math.sin(x1) ** 2, abs=1e-6)
        # sectional curvature +1 with g(R(X,Y)Y,X)
        X, Y = np.array([1.0, 0.0]), np.array([0.0, 1.0 / math.sin(x1)])
        assert R.form(X, Y, Y, X) == pytest.approx(1.0, abs=1e-10)


def test_hyperbolic_sign():
    # upper half plane with y = exp(x2): g = exp(-2 x2) dx1^2 + dx2^2
    M = ChartManifold.from_entries(2, {(1, 1): "exp(-2*x2)", (2, 2): "1"})
    p = [0.2, 0.3]
    R = riemann_at(M, p)
    X, Y = np.array([math.exp(p[1]), 0.0]), np.array([0.0, 1.0])
    assert R.form(X, Y, Y, X) == pytest.approx(-1.0, abs=1e-10)


def test_curvature_symmetries_on_curved_metric(rng):
    M = ChartManifold.from_entries(3, {(1, 1): "2 + sin(x2)", (1, 2): "0.1*x3", (2, 2): "exp(x3)",
                                       (3, 3): "1 + x1^2"})
    for _ in range(10):
        res = riemann_at(M, rng.uniform(-1, 1, 3)).symmetry_residuals()
        assert max(res.values()) <= 1e-8


def test_indefinite_metric_rejected():
    M = ChartManifold.from_entries(2, {(1, 1): "x1", (2, 2): "1"})
    with pytest.raises(MetricError):
        christoffel_at(M, [-1.0, 0.0])


def test_lower_triangle_entry_rejected():
    with pytest.raises(ValueError, match="lower-triangle"):
        ChartManifold.from_entries(2, {(2, 1): "0.1"})


def test_odd_dimension_with_J_rejected():
    with pytest.raises(ValueError):
        ChartManifold.from_entries(3, None, {(1, 2): "1"})


def test_lie_bracket_examples():
    X = VectorField.parse(["x2", "0"])
    Y = VectorField.coordinate(1, 2)
    assert np.allclose(lie_bracket_at(X, Y, [0.3, 0.4]), [-1.0, 0.0])
    assert np.allclose(lie_bracket_at(VectorField.coordinate(0, 2), Y, [0.3, 0.4]), 0.0)


def test_lie_bracket_matches_flow_oracle(rng):
    """[X, Y] = d/ds d/dt of the commutator of flows, checked with second differences of Euler steps."""
    X = VectorField.parse(["x1*x2 + 1", "x2^2 - x1"])
    Y = VectorField.parse(["x2", "x1^3 + 0.5"])
    p = np.array([0.3, -0.2])
    # second-order expansion: [X,Y] = DY X - DX Y
    def field(V, q):
        return V.jet1(q)[0]
    h = 1e-5
    ref = np.zeros(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        dY = (field(Y, p + e) - field(Y, p - e)) / (2 * h)
        dX = (field(X, p + e) - field(X, p - e)) / (2 * h)
        ref += dY * field(X, p)[k] - dX * field(Y, p)[k]
    assert np.allclose(lie_bracket_at(X, Y, p), ref, atol=1e-6)


def test_nijenhuis_antisymmetric(rng):
    M = ChartManifold.from_entries(4, None, {(1, 2): "-cos(x3)", (2, 1): "cos(x3)", (1, 4): "-sin(x3)",
                                             (4, 1): "sin(x3)", (3, 4): "-1", (4, 3): "1",
                                             (3, 2): "0", (2, 3): "0"})
    X = VectorField.parse(["x2", "1", "x1*x4", "0"])
    Y = VectorField.parse(["0", "x3^2", "1", "sin(x1)"])
    for _ in range(10):
        p = rng.uniform(-1, 1, 4)
        assert np.max(np.abs(nijenhuis_at(M, X, Y, p) + nijenhuis_at(M, Y, X, p))) <= 1e-12


def test_constant_J_is_integrable_and_kaehler():
    M = kaehler_r4(0.7)
    X = VectorField.parse(["x2", "1", "x1*x4", "0"])
    Y = VectorField.parse(["0", "x3^2", "1", "sin(x1)"])
    assert np.max(np.abs(nijenhuis_at(M, X, Y, [0.1, 0.2, 0.3, 0.4]))) <= 1e-12
    res = hermitian_kahler_residuals(M, [0.1, 0.2, 0.3, 0.4])
    assert max(res.values()) <= 1e-12


def test_coordinate_dependent_t_breaks_kaehler():
    M = ChartManifold.from_entries(4, None, J_T, params={"t": parse("x1", 4)})
    res = hermitian_kahler_residuals(M, [0.3, 0.0, 0.0, 0.0])
    assert res["jsq"] <= 1e-12 and res["compat"] <= 1e-12
    assert res["kahler"] == pytest.approx(1.0, rel=1e-10)


def test_space_form_flat_agrees_with_riemann(rng):
    M = ChartManifold.from_entries(4, None, {(1, 2): "-1", (2, 1): "1", (3, 4): "-1", (4, 3): "1"})
    R = riemann_at(M, np.zeros(4))
    for _ in range(20):
        Ys = rng.standard_normal((4, 4))
        assert space_form_curvature(0.0, M, *Ys, np.zeros(4)) == 0.0
        assert abs(R.form(*Ys)) <= 1e-12


def _random_hermitian(rng, n=4):
    A = rng.standard_normal((n, n))
    g = A @ A.T + n * np.eye(n)
    L = np.linalg.cholesky(g)
    J0 = np.kron(np.eye(n // 2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    Linv = np.linalg.inv(L.T)
    return g, Linv @ J0 @ L.T  # g-orthogonal complex structure


def test_space_form_property_suite(rng):
    worst = 0.0
    for _ in range(500):
        g, J = _random_hermitian(rng)
        v = rng.uniform(-3, 3)
        Y = rng.standard_normal((4, 4))
        f = lambda a, b, c, d: space_form_value(v, g, J, a, b, c, d)
        worst = max(worst,
                    abs(f(Y[0], Y[1], Y[2], Y[3]) + f(Y[1], Y[0], Y[2], Y[3])),
                    abs(f(Y[0], Y[1], Y[2], Y[3]) + f(Y[0], Y[1], Y[3], Y[2])),
                    abs(f(Y[0], Y[1], Y[2], Y[3]) - f(Y[2], Y[3], Y[0], Y[1])),
                    abs(f(Y[0], Y[1], Y[2], Y[3]) + f(Y[1], Y[2], Y[0], Y[3]) + f(Y[2], Y[0], Y[1], Y[3])))
    assert worst <= 1e-10


def test_space_form_holomorphic_sectional_curvature(rng):
    for _ in range(50):
        g, J = _random_hermitian(rng)
        v = rng.uniform(-3, 3)
        X = rng.standard_normal(4)
        X /= np.sqrt(X @ g @ X)
        JX = J @ X
        assert space_form_value(v, g, J, X, JX, JX, X) == pytest.approx(v, abs=1e-10)


def test_space_form_needs_J():
    with pytest.raises(ValueError):
        space_form_curvature(1.0, ChartManifold.from_entries(2), *np.eye(2), *np.eye(2), [0, 0])
