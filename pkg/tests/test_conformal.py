import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinspec import conformal as C, disk, fem
from robinspec.geometry import ConformalImage, polygonize
from robinspec.specfun import J01, J11_PRIME, bessel_j

QUAD = C.PowerSeriesMap([0.0, 1.0, 0.2])
IDENT = C.PowerSeriesMap.identity()


def test_disk_quadrature():
    q = C.disk_quadrature()
    assert q.z.shape == (48, 256)
    assert q.integrate(np.ones_like(q.weights)) == pytest.approx(math.pi, abs=1e-12)
    r2 = np.abs(q.z) ** 2
    for k in range(1, 10):
        assert q.integrate(r2**k).real == pytest.approx(math.pi / (k + 1), abs=1e-12)
    assert abs(q.integrate(q.z**3)) < 1e-14


def test_map_area_examples():
    assert C.map_area(IDENT) == pytest.approx(math.pi)
    assert C.map_area(C.PowerSeriesMap([0, 2])) == pytest.approx(4 * math.pi)
    assert C.map_area(QUAD) == pytest.approx(1.08 * math.pi)


@pytest.mark.parametrize("coeffs", [[0, 1, 0.2], [0, 1, 0.1 + 0.1j, 0.05], [0.3, 2, 0, 0, 0.1], [0, 1j]])
def test_area_identity_by_quadrature(coeffs):
    f = C.PowerSeriesMap(coeffs)
    q = C.disk_quadrature()
    quad_area = q.integrate(np.abs(f.derivative(q.z)) ** 2).real
    assert quad_area == pytest.approx(C.map_area(f), rel=1e-8)


def test_map_perimeter(oracles):
    assert C.map_perimeter(IDENT) == pytest.approx(2 * math.pi)
    assert C.map_perimeter(C.PowerSeriesMap([0, 3.0])) == pytest.approx(6 * math.pi)
    p = C.map_perimeter(QUAD)
    assert p == pytest.approx(oracles["quadratic_map_perimeter"], abs=1e-6)
    assert p >= 2 * math.sqrt(math.pi * C.map_area(QUAD))


def test_mean_value():
    r = np.linspace(0.01, 1.0, 100)
    assert np.allclose(C.mean_value(IDENT, r), 1.0)
    assert np.allclose(C.mean_value(QUAD, r), 1 + 0.08 * r**2)
    f = C.PowerSeriesMap([0, 1, 0.1 + 0.1j, 0.05])
    assert np.all(np.diff(C.mean_value(f, r)) > 0)
    assert C.mean_value(f, 1.0) == pytest.approx(f.area() / math.pi)


def test_mobius():
    z = np.exp(1j * C.disk_quadrature().theta)
    assert np.allclose(C.mobius(0.0, z), z)
    assert C.mobius(0.3 + 0.2j, 0.0) == 0.3 + 0.2j
    assert np.abs(np.abs(C.mobius(0.3, z)) - 1).max() < 1e-14
    inner = C.disk_quadrature().z
    assert np.abs(C.mobius(0.5j, inner)).max() < 1
    with pytest.raises(ValueError):
        C.MobiusParameter(1.0)


def test_compose_inverse_mobius_roundtrip():
    zeta = 0.25 - 0.1j
    f = C.compose_inverse_mobius(QUAD, zeta)
    w = 0.7 * np.exp(1j * np.linspace(0, 6, 17))
    assert np.allclose(f(C.mobius(zeta, w)), QUAD(w), atol=1e-12)
    assert f.area() == pytest.approx(QUAD.area(), rel=1e-12)


def test_json_roundtrip_and_validation():
    f = C.PowerSeriesMap([0, 1, 0.1 + 0.2j])
    g = C.PowerSeriesMap.from_json(f.to_json())
    assert np.array_equal(f.coeffs, g.coeffs)
    with pytest.raises(ValueError):
        C.PowerSeriesMap([1.0])
    with pytest.raises(ValueError):
        C.PowerSeriesMap([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        C.PowerSeriesMap(np.ones(70))


def test_univalence_screen():
    assert QUAD.screen_univalence()
    assert not C.PowerSeriesMap([0, 1, 0.6]).screen_univalence()  # f' vanishes inside
    assert not C.PowerSeriesMap([0, 1, 0, 0, 0, 0, 0, 0, 0, 0.3]).screen_univalence()


def test_boundary_speed_stddev():
    assert C.boundary_speed_stddev(C.PowerSeriesMap([0, 2j])) < 1e-14
    assert C.boundary_speed_stddev(QUAD) > 0.1


@pytest.mark.parametrize("alpha", [-2 * math.pi, -3.0, 0.0, 1.0, 2 * math.pi])
def test_lambda2_bound_exact_for_identity(alpha):
    assert C.lambda2_upper_bound(IDENT, alpha) == pytest.approx(disk.lambda2(alpha / (2 * math.pi)), abs=1e-8)


def test_lambda2_bound_identity_examples():
    assert C.lambda2_upper_bound(IDENT, 0.0) == pytest.approx(J11_PRIME**2, abs=1e-8)
    assert C.lambda2_upper_bound(IDENT, -2 * math.pi) == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(ValueError):
        C.lambda2_upper_bound(IDENT, 7.0)


def test_areabound():
    f = C.PowerSeriesMap([0, 1 / math.sqrt(1.08), 0.2 / math.sqrt(1.08)])
    for alpha in (0.0, math.pi, 2 * math.pi, -3.0):
        lhs, rhs, ok = C.areabound_check(f, alpha)
        assert ok and lhs < rhs
    lhs, rhs, ok = C.areabound_check(IDENT, 1.0)
    assert ok and abs(lhs - rhs) <= 1e-10 * lhs
    # normalisation is applied internally
    assert C.areabound_check(QUAD, 1.0)[:2] == pytest.approx(C.areabound_check(f, 1.0)[:2])


@given(st.lists(st.complex_numbers(max_magnitude=0.05, allow_nan=False, allow_infinity=False), min_size=1, max_size=4), st.sampled_from([0.0, math.pi, 2 * math.pi]))
def test_areabound_strict_for_nonlinear(tail, alpha):
    f = C.PowerSeriesMap([0, 1] + tail)
    if f.is_linear(1e-3):
        return
    lhs, rhs, ok = C.areabound_check(f, alpha)
    assert ok


@pytest.mark.parametrize("alpha", [1.0, math.pi, 2 * math.pi])
def test_g_one_identity(alpha):
    x = math.sqrt(disk.lambda2(alpha / (2 * math.pi)))
    quad = C.g_function(alpha, [1.0])[0]
    assert quad == pytest.approx(C.g_one_closed_form(alpha), abs=1e-9)
    # antiderivative J0 J2 r^2 evaluated at sqrt(lambda_2), divided back by lambda_2
    assert quad * x * x / math.pi == pytest.approx(bessel_j(0, x) * bessel_j(2, x) * x * x, abs=1e-9)
    assert quad >= -1e-9


def test_g_one_vanishes_at_two_pi():
    assert C.g_one_closed_form(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert math.sqrt(disk.lambda2(1.0)) == pytest.approx(J01, abs=1e-12)


@pytest.mark.parametrize("r", [0.25, 0.5, 0.75, 1.0])
def test_cauchy_schwarz_step(r):
    for f in (IDENT, QUAD, C.PowerSeriesMap([0, 1, 0.1j, 0.05])):
        th = 2 * math.pi * np.arange(512) / 512
        mean = np.mean(np.abs(f.derivative(r * np.exp(1j * th))) ** 2)
        assert mean == pytest.approx(C.circle_mean_sq_derivative(f, r), rel=1e-12)
        if f.is_linear():
            assert abs(f.coeffs[1]) ** 2 == pytest.approx(mean)
        else:
            assert abs(f.coeffs[1]) ** 2 < mean


def _unit_weight(F):
    q = C.disk_quadrature()
    return np.abs(F.derivative(q.z)) ** 2


def test_recenter_identity_constant_v1():
    mode = C.radial_g(1.0)
    z = C.hersch_recenter(IDENT, mode, _unit_weight(IDENT))
    assert abs(z.zeta) < 1e-12


def test_recenter_mobius_map_constant_v1():
    # F = M_0.3 makes F o M_0.3^{-1} the identity
    F = C.compose_inverse_mobius(C.PowerSeriesMap.identity(), -0.3)
    assert np.allclose(F(C.disk_quadrature().z), C.mobius(0.3, C.disk_quadrature().z), atol=1e-12)
    mode = C.radial_g(0.0)
    w = _unit_weight(F)
    z = C.hersch_recenter(F, mode, w)
    assert z.zeta == pytest.approx(0.3, abs=1e-6)
    # brute-force grid of |V| agrees on the location
    grid = [complex(x, y) for x in np.linspace(-0.6, 0.6, 25) for y in np.linspace(-0.6, 0.6, 25)]
    best = min(grid, key=lambda g: abs(C.hersch_field(mode, w, g)))
    assert abs(best - 0.3) <= 0.05 + 1e-12


def test_recenter_rejects_nonpositive_weight():
    with pytest.raises(ValueError):
        C.hersch_recenter(IDENT, C.radial_g(0.0), -_unit_weight(IDENT))


def test_recenter_with_fem_v1_and_bound_chain():
    alpha = 1.0
    weight, lam1, _ = C.first_eigenfunction_weight(QUAD, alpha, 64, 3)
    mode = C.radial_g(alpha)
    z = C.hersch_recenter(QUAD, mode, weight)
    assert z.residual <= 1e-8
    assert abs(z.zeta.imag) < 1e-10  # real coefficients: symmetric about the real axis
    # Jacobian: central differences at two step sizes agree within 5 %
    field = lambda s: C.hersch_field(mode, weight, s)
    j1 = C._jacobian(field, z.zeta, 1e-6)
    j2 = C._jacobian(field, z.zeta, 1e-4)
    assert np.abs(j1 - j2).max() <= 0.05 * np.abs(j1).max()

    f = C.compose_inverse_mobius(QUAD, z)
    bound = C.lambda2_upper_bound(f, alpha)
    poly = polygonize(ConformalImage(QUAD), 64)
    study = fem.robin_level_study(poly, alpha / poly.perimeter, 2, (2, 3))
    assert bound >= study.extrapolated[1] - study.error[1]
    assert bound * QUAD.area() <= math.pi * disk.lambda2(alpha / (2 * math.pi)) + 1e-6


def test_p1_interpolant_reproduces_linear_field():
    from robinspec.geometry import mesh_convex_polygon, regular_polygon

    mesh = mesh_convex_polygon(regular_polygon(8), 2)
    vals = 2 * mesh.nodes[:, 0] - mesh.nodes[:, 1] + 0.5
    interp = C.P1Interpolant(mesh, vals)
    pts = np.array([0.1 + 0.2j, -0.3 - 0.4j, 0.0])
    assert np.allclose(interp(pts), 2 * pts.real - pts.imag + 0.5, atol=1e-12)
    # outside points take the nearest boundary value
    far = interp(np.array([5.0 + 0j]))
    assert far[0] == pytest.approx(2 * 1.0 + 0.5, abs=1e-12)


def test_theorem_e_bound():
    rep = C.lambda1_conformal_bound(IDENT, 1.0)
    assert abs(rep.lhs - rep.rhs) <= rep.error_estimate and rep.passed
    rep = C.lambda1_conformal_bound(QUAD, 1.0)
    assert rep.rhs - rep.lhs > 3 * rep.error_estimate and rep.passed
    with pytest.raises(ValueError):
        C.lambda1_conformal_bound(QUAD, 0.0)


def test_recenter_grid_report():
    mode = C.radial_g(1.0)
    w = _unit_weight(IDENT)
    z = C.hersch_recenter(IDENT, mode, w, report_grid=True)
    assert z.grid.shape == (20, 36)
    # radius-0 row is the origin, where V vanishes for the identity
    assert np.all(z.grid[0] < 1e-12)
    assert np.all(z.grid[1:] > 1e-3)
    assert C.hersch_recenter(IDENT, mode, w).grid is None
