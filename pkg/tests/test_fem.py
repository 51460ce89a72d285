import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robinspec import fem, rectangle
from robinspec.geometry import Disk, Rectangle, mesh_convex_polygon, polygonize, regular_polygon
from robinspec.specfun import J11_PRIME

SQUARE = polygonize(Rectangle(1.0, 1.0))


def test_assembly_identities():
    mesh = mesh_convex_polygon(regular_polygon(5), 2)
    f = fem.assemble(mesh)
    one = np.ones(mesh.n_nodes)
    assert np.abs(f.stiffness @ one).max() < 1e-12
    assert one @ f.mass @ one == pytest.approx(mesh.area, rel=1e-13)
    assert one @ f.boundary_mass @ one == pytest.approx(mesh.perimeter, rel=1e-13)
    # P1 reproduces linear fields exactly
    x = mesh.nodes[:, 0]
    assert x @ f.stiffness @ x == pytest.approx(mesh.area, rel=1e-12)
    assert np.allclose((f.stiffness - f.stiffness.T).toarray(), 0.0)


@pytest.mark.parametrize("beta", [-1.0, 0.0, 1.0])
def test_square_matches_tensor_solve(beta):
    study = fem.robin_level_study(SQUARE, beta, 4, (3, 4))
    exact = rectangle.rectangle_spectrum(1.0, 1.0, beta, 4).values
    for j in range(4):
        assert study.extrapolated[j] == pytest.approx(exact[j], rel=5e-3, abs=1e-10)
        assert abs(study.extrapolated[j] - exact[j]) <= max(study.error[j], 1e-10) * 3


def test_disk_neumann_mu1():
    poly = polygonize(Disk(1.0), 64)
    study = fem.robin_level_study(poly, 0.0, 2, (2, 3))
    assert study.extrapolated[1] * poly.area == pytest.approx(math.pi * J11_PRIME**2, rel=1e-2)


def test_p1_eigenvalues_are_upper_bounds():
    exact = rectangle.rectangle_spectrum(1.0, 1.0, 0.5, 3).values
    for level in (2, 3):
        vals = fem.robin_eigs(mesh_convex_polygon(SQUARE, level), 0.5, 3).eigenvalues
        assert np.all(vals >= exact - 1e-12)


def test_eigenvectors_m_orthonormal_and_residuals():
    mesh = mesh_convex_polygon(regular_polygon(6), 3)
    res = fem.robin_eigs(mesh, -0.7, 6)
    f = fem.assemble(mesh)
    gram = res.eigenvectors.T @ (f.mass @ res.eigenvectors)
    assert np.abs(gram - np.eye(6)).max() <= 1e-8
    assert np.all(res.residuals <= 1e-8)
    assert res.eigenvectors[:, 0].sum() > 0
    assert set(res.diagnostics()) >= {"level", "eigenvalues", "residuals"}


def test_scale_invariance_matrix_level():
    mesh = mesh_convex_polygon(regular_polygon(5), 3)
    for t in (0.5, 3.0):
        big = mesh.scaled(t)
        for beta in (-1.3, 0.0, 2.0):
            a = fem.robin_eigs(mesh, beta, 4).eigenvalues
            b = fem.robin_eigs(big, beta / t, 4).eigenvalues
            assert np.allclose(b, a / t**2, rtol=1e-10, atol=1e-10)


@given(st.floats(-5, 5), st.floats(0.05, 3))
def test_alpha_monotone(beta, step):
    mesh = mesh_convex_polygon(regular_polygon(5), 2)
    a = fem.robin_eigs(mesh, beta, 4).eigenvalues
    b = fem.robin_eigs(mesh, beta + step, 4).eigenvalues
    assert np.all(b > a - 1e-12)
    assert b[0] > a[0]


def test_beta_derivative_matches_finite_difference():
    mesh = mesh_convex_polygon(regular_polygon(6), 2)
    d = fem.beta_derivative(mesh, 0.3, 2)
    h = 1e-6
    fd = (fem.robin_eigs(mesh, 0.3 + h, 2).eigenvalues - fem.robin_eigs(mesh, 0.3 - h, 2).eigenvalues) / (2 * h)
    assert d[0] == pytest.approx(fd[0], rel=1e-6)


def test_steklov_schur_vs_robin():
    mesh = mesh_convex_polygon(SQUARE, 3)
    st_res = fem.steklov_schur(mesh, 3)
    assert st_res.eigenvalues[0] == pytest.approx(0.0, abs=1e-10)
    sigma1 = st_res.eigenvalues[1]
    via = fem.steklov_via_robin(mesh)
    assert via == pytest.approx(sigma1, rel=1e-9)
    # zero crossing: lambda_2 vanishes at beta = -sigma_1
    assert fem.robin_eigs(mesh, -sigma1, 2).eigenvalues[1] == pytest.approx(0.0, abs=1e-8)


def test_steklov_disk_polygon():
    poly = polygonize(Disk(1.0), 64)
    study = fem.steklov_level_study(poly, 3, (2, 3))
    assert study.extrapolated[1] * poly.perimeter == pytest.approx(2 * math.pi, rel=1.5e-2)
    assert study.extrapolated[1] == pytest.approx(study.extrapolated[2], rel=1e-6)


def test_richardson_algebra():
    v, e = fem.richardson([(0.5, 1.4), (0.25, 1.1)])
    assert v == pytest.approx(1.0) and e == pytest.approx(0.1)
    # non-monotone sequence falls back to the finest value
    v, e = fem.richardson([(1.0, 1.0), (0.5, 1.2), (0.25, 1.1)])
    assert v == 1.1 and e == pytest.approx(0.1)
    with pytest.raises(ValueError):
        fem.richardson([(0.5, 1.0)])
    with pytest.raises(ValueError):
        fem.richardson([(0.5, 1.0), (0.3, 1.0)])


@given(st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
def test_richardson_exact_for_quadratic_error(c, v0):
    vals = [(h, v0 + c * h * h) for h in (0.5, 0.25)]
    v, _ = fem.richardson(vals)
    assert v == pytest.approx(v0, abs=1e-12)


def test_level_study_json():
    study = fem.robin_level_study(SQUARE, 0.0, 2, (2, 3))
    js = study.to_json()
    assert js["levels"] == [2, 3] and len(js["n_nodes"]) == 2


def test_errors():
    mesh = mesh_convex_polygon(SQUARE, 1)
    with pytest.raises(ValueError):
        fem.robin_eigs(mesh, 0.0, 11)
    big = mesh_convex_polygon(polygonize(Disk(1.0), 256), 3)
    with pytest.raises(ValueError):
        fem.robin_eigs(big, 0.0, 2)
