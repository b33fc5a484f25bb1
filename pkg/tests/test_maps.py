import math

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from slantmap.geometry import ChartManifold
from slantmap.maps import (NotProperError, SmoothMap, SubspaceError, adjoint_at, decompose_domain,
                           decompose_range, differential_at, domain_operators, range_operators,
                           slant_at, split_at)

from helpers import ex31_map, ex41_map

R = lambda n: ChartManifold.from_entries(n)


def test_differential_of_ex31_at_origin(ex31):
    A = differential_at(ex31, np.zeros(4))
    ref = np.zeros((4, 4))
    ref[0, 0] = ref[2, 2] = 1.0
    assert np.allclose(A, ref, atol=1e-15)


def test_constant_map_is_rank_zero():
    F = SmoothMap.parse(R(2), R(2), ["1", "2"])
    assert np.array_equal(differential_at(F, [0.3, 0.1]), np.zeros((2, 2)))
    with pytest.raises(NotProperError, match="not a proper"):
        split_at(F, [0.3, 0.1])


def test_identity_is_full_rank():
    F = SmoothMap.parse(R(2), R(2), ["x1", "x2"])
    assert np.array_equal(differential_at(F, [0.3, 0.1]), np.eye(2))
    with pytest.raises(NotProperError):
        split_at(F, [0.3, 0.1])
    s = split_at(F, [0.3, 0.1], allow_full_rank=True)
    assert s.rank == 2 and not s.proper


def test_ex31_split(ex31, rng):
    for _ in range(16):
        p = rng.uniform(-1, 1, 4)
        s = split_at(ex31, p)
        assert s.rank == 2
        ref = np.zeros((4, 2))
        ref[1, 0] = ref[3, 1] = 1.0
        assert np.max(subspace_angles(s.vertical_basis, ref)) <= 1e-8
        assert abs(s.lam - math.exp(p[0])) / math.exp(p[0]) <= 1e-8


def test_split_invariants_on_curved_source(rng):
    F = ex41_map(metric={(i, i): "exp(2*(0.3*x1 + 0.2*x2*x3))" for i in range(1, 7)})
    for _ in range(8):
        s = split_at(F, rng.uniform(-1, 1, 6))
        g, h = s.src.g, s.tgt.g
        V, H, P, Q = s.vertical_basis, s.horizontal_basis, s.range_basis, s.range_perp_basis
        assert np.allclose(V.T @ g @ V, np.eye(V.shape[1]), atol=1e-10)
        assert np.allclose(H.T @ g @ H, np.eye(H.shape[1]), atol=1e-10)
        assert np.max(np.abs(V.T @ g @ H)) <= 1e-10
        assert np.max(np.abs(P.T @ h @ Q)) <= 1e-10
        assert np.max(np.abs(s.differential @ V)) <= 1e-10


@pytest.mark.parametrize("a", [0.3, 0.7])
def test_ex41_split(a, rng):
    F = ex41_map(a=a)
    lam = math.pi ** a * math.sqrt(math.cosh(a) ** 2 + math.sinh(a) ** 2)
    s = split_at(F, rng.uniform(-1, 1, 6))
    assert s.rank == 2 and s.vertical_basis.shape[1] == 4
    assert abs(s.lam - lam) / lam <= 1e-8


def test_projection_is_riemannian():
    F = SmoothMap.parse(R(3), R(2), ["x1", "x2"])
    with pytest.raises(NotProperError):
        split_at(F, np.zeros(3))  # rank 2 = min(3, 2)
    F = SmoothMap.parse(R(3), R(3), ["x1", "x2", "0"])
    s = split_at(F, [0.1, 0.2, 0.3])
    assert s.lam == pytest.approx(1.0, abs=1e-14)
    assert s.conformal_residual <= 1e-12 and s.riemannian_residual <= 1e-12


def test_lambda_invariant_under_horizontal_rotation(rng):
    F = ex41_map(metric={(i, i): "exp(2*(0.3*x1 + 0.2*x2*x3))" for i in range(1, 7)})
    p = rng.uniform(-1, 1, 6)
    base = split_at(F, p).lambda_sq
    for seed in range(5):
        assert abs(split_at(F, p, rotation_seed=seed).lambda_sq - base) <= 1e-12 * base


@pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.2, math.pi / 2])
def test_ex31_slant_angle_is_t(t, rng):
    F = ex31_map(t)
    for _ in range(4):
        s = split_at(F, rng.uniform(-1, 1, 4))
        rep = slant_at(F, s, "domain", seed=1)
        assert abs(rep.theta - t) <= 1e-6 and rep.spread <= 1e-6
        assert rep.is_pointwise_slant()


@pytest.mark.parametrize("t", [0.2, 0.7, 1.4])
def test_ex41_range_slant_angle_is_t(t, rng):
    F = ex41_map(t=t)
    s = split_at(F, rng.uniform(-1, 1, 6))
    rep = slant_at(F, s, "range", seed=3)
    assert abs(rep.theta - t) <= 1e-6 and rep.spread <= 1e-6


def test_slant_requires_J(ex41):
    s = split_at(ex41, np.zeros(6))
    with pytest.raises(ValueError):
        slant_at(ex41, s, "domain")
    with pytest.raises(ValueError):
        slant_at(ex41, s, "sideways")


def test_non_slant_map_has_spread():
    # kernel span{d1, d2, d3}: J d1 = d2 stays vertical, J d3 = d4 is horizontal
    J = {(2, 1): "1", (1, 2): "-1", (4, 3): "1", (3, 4): "-1", (6, 5): "1", (5, 6): "-1"}
    F = SmoothMap.parse(ChartManifold.from_entries(6, None, J), R(6), ["x4", "x5", "x6", "0", "0", "0"])
    s = split_at(F, np.zeros(6))
    rep = slant_at(F, s, "domain", seed=0)
    assert rep.spread > 1.0 and not rep.is_pointwise_slant()


def test_ex31_domain_decomposition():
    t = 0.7
    F = ex31_map(t)
    s = split_at(F, [0.2, 0.1, -0.4, 0.3])
    V = np.array([0, 1.0, 0, 0])
    X = s.horizontal_basis[:, 0]
    parts = decompose_domain(F, s, V, X)
    assert np.allclose(parts.phi, [0, 0, 0, -math.cos(t)], atol=1e-12)
    assert np.allclose(parts.omega, [math.sin(t), 0, 0, 0], atol=1e-12)
    phi, omega, B, C = domain_operators(s)
    assert np.allclose(phi @ phi @ V, -math.cos(t) ** 2 * V, atol=1e-12)
    J = s.src.J
    assert np.allclose(parts.B + parts.C, J @ X, atol=1e-12)
    # mu complements omega(ker) inside the horizontal space
    assert parts.mu_basis.shape[1] == 2 - np.linalg.matrix_rank(omega @ s.vertical_basis, tol=1e-10)


def test_anti_invariant_endpoint():
    F = ex31_map(math.pi / 2)
    s = split_at(F, np.zeros(4))
    phi, omega, _, _ = domain_operators(s)
    V = s.vertical_basis
    assert np.max(np.abs(phi @ V)) <= 1e-12
    assert np.allclose(omega @ V, s.src.J @ V, atol=1e-12)


def test_decompose_rejects_wrong_subspaces(ex31):
    s = split_at(ex31, np.zeros(4))
    with pytest.raises(SubspaceError):
        decompose_domain(ex31, s, [1.0, 0, 0, 0], [1.0, 0, 0, 0])
    with pytest.raises(SubspaceError):
        decompose_domain(ex31, s, [0, 1.0, 0, 0], [0, 1.0, 0, 0])


@pytest.mark.parametrize("t", [0.4, 0.7, math.pi / 2])
def test_ex41_range_decomposition(t, rng):
    F = ex41_map(t=t)
    p = rng.uniform(-1, 1, 6)
    s = split_at(F, p)
    rho, varpi, D, E = range_operators(s)
    for i in range(s.rank):
        X = s.horizontal_basis[:, i]
        W = s.push(X)
        assert np.allclose(rho @ rho @ W, -math.cos(t) ** 2 * W, atol=1e-10)
        assert float((rho @ W) @ s.tgt.g @ (rho @ W)) == pytest.approx(
            s.lambda_sq * math.cos(t) ** 2, abs=1e-10)
        P = s.range_perp_basis[:, 0]
        parts = decompose_range(F, s, W, P)
        assert np.allclose(parts.rho + parts.varpi, s.tgt.J @ W, atol=1e-12)
        assert np.allclose(parts.D + parts.E, s.tgt.J @ P, atol=1e-12)
    if t == math.pi / 2:
        assert np.max(np.abs(rho @ s.range_basis)) <= 1e-12


def test_adjoint(ex41, rng):
    s = split_at(ex41, rng.uniform(-1, 1, 6))
    for i in range(s.rank):
        X = s.horizontal_basis[:, i]
        assert np.allclose(adjoint_at(ex41, s, s.push(X)), s.lambda_sq * X, atol=1e-12)
    for j in range(s.range_perp_basis.shape[1]):
        assert np.max(np.abs(adjoint_at(ex41, s, s.range_perp_basis[:, j]))) <= 1e-12
    F = SmoothMap.parse(R(3), R(3), ["x1", "x2", "x3"])
    s = split_at(F, np.zeros(3), allow_full_rank=True)
    assert np.allclose(adjoint_at(F, s, [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_map_component_count_checked():
    with pytest.raises(ValueError):
        SmoothMap.parse(R(2), R(3), ["x1", "x2"])
