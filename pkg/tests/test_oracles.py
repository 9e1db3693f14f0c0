import numpy as np
import pytest

from hweno_sn import (DiffusionProblem, Mesh1D, Mesh2D, assemble_global, catalog, diffusion_boundary_values,
                      diffusion_exact_constant, diffusion_solve, direct_solve, gauss_legendre, product_quadrature,
                      solve_1d, solve_2d)
from hweno_sn.oracles import SystemTooLarge, ghost_coefficients


def test_boundary_values():
    q = gauss_legendre(12)
    z = np.zeros(12)
    assert diffusion_boundary_values(q, z, z) == (0.0, 0.0)
    half = np.full(12, 0.5)
    left, right = diffusion_boundary_values(q, half, half)
    assert left == pytest.approx(1.0, abs=1e-14) and right == pytest.approx(1.0, abs=1e-14)


def test_boundary_value_example_3_regression():
    q = gauss_legendre(12)
    left, _ = catalog(3).boundary.resolve(q.ordinates)
    phi_left, phi_right = diffusion_boundary_values(q, left, np.zeros(12))
    assert phi_right == 0.0
    assert phi_left == pytest.approx(5.2225015756, rel=1e-9)


def const(v):
    return lambda x: np.full(np.shape(x), float(v))


def test_diffusion_solve_pure_scattering():
    xc, phi = diffusion_solve(DiffusionProblem(const(1), const(0), const(1), 1.0), 200)
    assert np.max(np.abs(phi - 1.5 * xc * (1 - xc))) < 1e-4
    assert np.interp(0.5, xc, phi) == pytest.approx(0.375, abs=1e-4)


def test_diffusion_solve_example_2_midpoint():
    xc, phi = diffusion_solve(DiffusionProblem(const(1), const(0.8), const(1), 1.0), 200)
    assert np.interp(0.5, xc, phi) == pytest.approx(0.2997, abs=2e-4)


@pytest.mark.parametrize("st,sa,q,bc", [(1.0, 0.8, 1.0, (0.0, 0.0)), (2.0, 0.1, 3.0, (1.0, 0.5)),
                                        (0.5, 0.0, 1.0, (0.2, 0.0))])
def test_diffusion_solve_second_order(st, sa, q, bc):
    exact = diffusion_exact_constant(st, sa, q, 1.0, bc)
    errs = []
    for n in (100, 200):
        xc, phi = diffusion_solve(DiffusionProblem(const(st), const(sa), const(q), 1.0, *bc), n)
        errs.append(np.max(np.abs(phi - exact(xc))))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_closed_form_properties():
    f = diffusion_exact_constant(1.0, 0.0, 2.0, 3.0)
    assert f(1.5) == pytest.approx(3 * 2.0 * 9 / 8)
    g = diffusion_exact_constant(1.0, 0.8, 1.0, 1.0)
    assert g(0.0) == pytest.approx(0.0, abs=1e-14)
    x = np.random.default_rng(0).uniform(0, 1, 20)
    assert np.allclose(g(x), g(1 - x), atol=1e-14)
    # ODE residual -phi''/3 + 0.8 phi - 1 by a high-order difference
    h = 1e-3
    d2 = (-g(x + 2 * h) + 16 * g(x + h) - 30 * g(x) + 16 * g(x - h) - g(x - 2 * h)) / (12 * h * h)
    assert np.max(np.abs(-d2 / 3 + 0.8 * g(x) - 1)) < 1e-7


def test_ghost_coefficients_reproduce_quintics():
    ca, cm = ghost_coefficients()
    assert [float(c) for c in ca] == [5, -10, 10, -5, 1]
    assert [float(c) for c in cm] == [5, -10, 10, -5, 1]


def test_dense_zero_problem():
    p = catalog(2)
    from dataclasses import replace

    from hweno_sn.problems import constant, isotropic_source

    p = replace(p, source=isotropic_source(constant(0.0)))
    x = direct_solve(assemble_global(p, Mesh1D.uniform(1.0, 6), gauss_legendre(2)))
    assert np.all(x == 0)


def test_dense_sizes_and_residual():
    p = catalog(2, 0.5)
    sys1 = assemble_global(p, Mesh1D.uniform(1.0, 7), gauss_legendre(4))
    assert sys1.matrix.shape == (2 * 7 * 4,) * 2
    x = direct_solve(sys1)
    assert np.max(np.abs(sys1.matrix @ x.ravel() - sys1.rhs)) < 1e-11
    sys2 = assemble_global(catalog(7), Mesh2D.uniform(2.0, 2.0, 5), product_quadrature(2))
    assert sys2.matrix.shape == (4 * 25 * 4,) * 2


def test_dense_cap():
    with pytest.raises(SystemTooLarge):
        assemble_global(catalog(2), Mesh1D.uniform(1.0, 300), gauss_legendre(12))


def test_fsm_matches_dense_1d_example_2():
    p = catalog(2, 0.3)
    m, q = Mesh1D.uniform(1.0, 5), gauss_legendre(2)
    dense = np.einsum("m,mjk->jk", q.weights, direct_solve(assemble_global(p, m, q)))
    r = solve_1d(p, mesh=m, quad=q, mode="always-linear")
    assert r.converged
    assert np.max(np.abs(r.phi - dense[:, 0])) < 1e-10
    assert np.max(np.abs(r.phi_moments[0] - dense[:, 1])) < 1e-10


def test_fsm_matches_dense_2d():
    p = catalog(8, 0.5)
    m, q = Mesh2D.uniform(1.0, 1.0, 5), product_quadrature(2)
    dense = np.einsum("d,dijk->ijk", q.weights, direct_solve(assemble_global(p, m, q)))
    r = solve_2d(p, mesh=m, quad=q, mode="always-linear", tol=1e-15, max_iter=20000)
    assert r.converged
    assert np.max(np.abs(r.phi - dense[..., 0])) < 1e-9
