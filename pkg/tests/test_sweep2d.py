from dataclasses import replace

import numpy as np
import pytest

from hweno_sn import Mesh2D, catalog, cell_moments, local_solve4, product_quadrature, reconstruct_face_moments, relax, solve_2d
from hweno_sn.problems import constant, isotropic_source
from hweno_sn.sweep2d import QUADRANTS, update_source_2d
from hweno_sn.sweep1d import ConfigurationError


def test_relax_examples():
    old, new = np.zeros(3), np.ones(3)
    assert np.array_equal(relax(old, new, 1.0), new)
    assert np.array_equal(relax(new, new, 0.3), new)
    assert np.allclose(relax(old, new, 0.85), 0.85)
    with pytest.raises(ValueError):
        relax(old, new, 0.0)


def fields_of(f, n, L=1.0):
    m = Mesh2D.uniform(L, L, n)
    return m, np.stack(cell_moments(f, m))


def test_face_moments_of_constant():
    _, P = fields_of(lambda x, y: np.full(np.broadcast(x, y).shape, 3.0), 6)
    for face in "xy":
        for sign in (1, -1):
            a, b = reconstruct_face_moments(P, 2, 3, face, sign)
            assert a == pytest.approx(3.0, abs=1e-14) and b == pytest.approx(0.0, abs=1e-14)


def test_face_moments_of_linear_field():
    m, P = fields_of(lambda x, y: x + 0 * y, 6)
    i, j = 2, 3
    a, b = reconstruct_face_moments(P, i, j, "x", 1)
    assert a == pytest.approx(m.x.edges[i + 1], abs=1e-13) and b == pytest.approx(0.0, abs=1e-13)
    a, b = reconstruct_face_moments(P, i, j, "x", -1)
    assert a == pytest.approx(m.x.edges[i], abs=1e-13)
    a, b = reconstruct_face_moments(P, i, j, "y", 1)
    # the y-face first moment is the x-moment of the trace, h/12 for psi = x
    assert a == pytest.approx(m.x.centers[i], abs=1e-13) and b == pytest.approx(m.x.dx[i] / 12, abs=1e-13)


def test_face_moments_of_separable_quintic():
    px = np.polynomial.Polynomial([0.3, -1.0, 0.5, 2.0, -1.5, 0.7])
    ry = np.polynomial.Polynomial([1.0, 0.2, -0.8, 0.1, 0.9, -0.4])
    m, P = fields_of(lambda x, y: px(x) * ry(y), 40)
    ravg, rmom = cell_moments(lambda y: ry(y), m.y)
    pavg, pmom = cell_moments(lambda x: px(x), m.x)
    worst = 0.0
    for i, j in [(5, 7), (20, 20), (33, 12)]:
        a, b = reconstruct_face_moments(P, i, j, "x", 1)
        worst = max(worst, abs(a - px(m.x.edges[i + 1]) * ravg[j]), abs(b - px(m.x.edges[i + 1]) * rmom[j]))
        a, b = reconstruct_face_moments(P, i, j, "y", -1)
        worst = max(worst, abs(a - ry(m.y.edges[j]) * pavg[i]), abs(b - ry(m.y.edges[j]) * pmom[i]))
    assert worst < 1e-10


def test_local_solve4_zero():
    x = local_solve4(0.5, 0.3, 0.1, 0.1, 1.0, (0.0,) * 4, np.zeros((4, 3)), np.zeros(4))
    assert not x.any()


def test_local_solve4_balance():
    mu, eta, h, sig = 0.6, -0.4, 0.1, 2.0
    clos = np.array([[0.5, 1.0, 0.1], [0.2, 0.0, 0.0], [0.6, -1.0, 0.05], [0.0, 0.0, 0.0]])
    src = np.array([1.0, 0.02, -0.01, 0.001])
    x = local_solve4(mu, eta, h, h, sig, (0.3, 0.01, 0.2, 0.02), clos, src)
    assert np.all(np.isfinite(x))


def test_mesh_preconditions():
    with pytest.raises(ConfigurationError):
        solve_2d(catalog(8), n=4)
    with pytest.raises(ConfigurationError):
        solve_2d(catalog(8), n=10, omega=1.5)


def test_zero_state_is_fixed():
    p = replace(catalog(8), source=isotropic_source(constant(0.0)))
    r = solve_2d(p, n=6, quad=product_quadrature(2))
    assert r.converged and r.iterations == 1 and not r.phi.any()


def test_one_iteration_is_positive():
    r = solve_2d(catalog(8, 0.1), n=8, quad=product_quadrature(4), max_iter=1)
    assert np.all(r.phi > 0)


def test_example_7_iterations():
    r = solve_2d(catalog(7), n=10, tol=1e-12)
    assert r.converged and abs(r.iterations - 43) <= 0.3 * 43
    assert r.errors["L1"] < 3 * 2.07e-3


def test_quadrant_order_invariance():
    base = solve_2d(catalog(8, 0.5), n=10, quad=product_quadrature(4), tol=1e-14)
    perm = solve_2d(catalog(8, 0.5), n=10, quad=product_quadrature(4), tol=1e-14, order=QUADRANTS[[3, 1, 2, 0]])
    assert base.converged and perm.converged
    assert np.max(np.abs(base.phi - perm.phi)) <= 1e-10


def test_relaxation_safety():
    # the unrelaxed sweep is allowed to stall but must say so; the default relaxation converges
    plain = solve_2d(catalog(8), n=10, tol=1e-12, omega=1.0, max_iter=3000)
    assert not plain.converged and plain.stalled and "stalled" in plain.message
    relaxed = solve_2d(catalog(8), n=10, tol=1e-12, omega=0.85, max_iter=3000)
    assert relaxed.converged and not relaxed.stalled


def test_phi_moments_reported():
    r = solve_2d(catalog(7), n=6, quad=product_quadrature(4), tol=1e-12)
    assert len(r.phi_moments) == 3 and all(m.shape == (6, 6) for m in r.phi_moments)


def test_krylov_matches_plain():
    p = catalog(8, 0.3)
    a = solve_2d(p, n=8, quad=product_quadrature(4), tol=1e-13)
    b = solve_2d(p, n=8, quad=product_quadrature(4), tol=1e-13, accel="krylov")
    assert b.converged and np.max(np.abs(a.phi - b.phi)) < 1e-9


def test_source_update_2d():
    n = 5
    Q = np.ones((2, 4, n, n))
    S = np.empty_like(Q)
    phi = np.zeros((4, n, n))
    phi[0] = 4.0
    update_source_2d(phi, np.full((n, n), 0.2), 1.0, Q, S)
    assert np.allclose(S[:, 0], 0.25 * 0.2 * 4 + 0.25) and np.allclose(S[:, 1:], 0.25)
