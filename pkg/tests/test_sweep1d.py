from dataclasses import replace

import numpy as np
import pytest

from hweno_sn import Mesh1D, catalog, gauss_legendre, ghost_fill, local_solve, solve_1d
from hweno_sn.problems import constant, isotropic_source
from hweno_sn.sweep1d import ConfigurationError, Setup1D, scalar_moments, sweep_direction, update_source

from helpers import cell_data


def test_local_solve_zero():
    assert local_solve(0.5, 1.0, 1.0, 0.1, 0.0, (0.0, 0.0, 0.0, 0.0), (0.0, 0.0), 0.0, 0.0) == (0.0, 0.0, 0.0)


def test_local_solve_rejects_zero_ordinate():
    with pytest.raises(ValueError):
        local_solve(0.0, 1.0, 1.0, 0.1, 0.0, (0.0,) * 4, (0.0, 0.0), 0.0, 0.0)


def test_local_solve_balance():
    # the cell average equation: mu (out - in)/dx + sig a = S
    mu, st, eps, dx, fin, S = 0.7, 2.0, 0.5, 0.1, 0.3, 1.2
    a, b, out = local_solve(mu, st, eps, dx, fin, (0.2, 0.01, 0.4, -0.02), (0.3, 0.0), S, 0.05)
    assert mu * (out - fin) / dx + st / eps * a == pytest.approx(S, rel=1e-13)


def test_ghost_fill_constant_and_quartic():
    a, b = ghost_fill(np.full(6, 2.5), np.zeros(6), "left")
    assert a == pytest.approx(2.5, abs=1e-14) and b == pytest.approx(0.0, abs=1e-14)
    coef = [0, 0, 0, 0, 1.0]
    centers = np.arange(6) + 0.5
    avg, mom = cell_data(coef, centers)
    ga, gm = cell_data(coef, [-0.5])
    la, lm = ghost_fill(np.array(avg), np.array(mom), "left")
    assert la == pytest.approx(ga[0], abs=1e-11) and lm == pytest.approx(gm[0], abs=1e-11)
    ra, rm = ghost_fill(np.array(avg), np.array(mom), "right")
    ea, em = cell_data(coef, [6.5])
    assert ra == pytest.approx(ea[0], abs=1e-9) and rm == pytest.approx(em[0], abs=1e-10)


def test_ghost_fill_needs_five_cells():
    with pytest.raises(ConfigurationError):
        ghost_fill(np.ones(4), np.zeros(4), "left")


def test_solver_needs_five_cells():
    with pytest.raises(ConfigurationError):
        solve_1d(catalog(2), n=4)


def test_update_source_values():
    n = 4
    S, Sh = np.empty((2, n)), np.empty((2, n))
    phi = np.full(n, 2.0)  # psi = 1 in both directions
    scat = np.full(n, 1.0 - 0.8)
    update_source(phi, np.zeros(n), scat, 1.0, np.ones((2, n)), np.full((2, n), 0.3), S, Sh)
    assert np.allclose(S, 0.7) and np.allclose(Sh, 0.15)
    update_source(np.zeros(n), np.zeros(n), scat, 1.0, np.zeros((2, n)), np.zeros((2, n)), S, Sh)
    assert not S.any() and not Sh.any()


def zero_problem():
    return replace(catalog(2), source=isotropic_source(constant(0.0)))


def test_zero_is_a_fixed_point():
    r = solve_1d(zero_problem(), n=10)
    assert r.converged and r.iterations == 1 and not r.phi.any()


def test_infinite_tol_stops_after_one_iteration():
    r = solve_1d(catalog(1), n=10, tol=np.inf)
    assert r.iterations == 1 and r.converged


def _setup(problem, n, M=4):
    q = gauss_legendre(M)
    s = Setup1D.build(problem, problem.mesh(n), q)
    return s, q


def test_sweep_visits_first_cell_positive_with_inflow():
    s, q = _setup(catalog(3, 0.1), 10, 12)
    A, B, E, W = s.state()
    S = np.zeros((12, 10))
    m = int(np.argmax(q.ordinates))
    st, _ = sweep_direction(m, q.ordinates[m], A, B, E, W, False, s.mesh.dx, s.sig, S, S, s.fin[m], s.tau, s.unif,
                            s.mode, s.eps_tilde)
    assert st == 0 and A[m, 1] > 0


def test_direction_order_independence():
    s, q = _setup(catalog(4, 0.1), 10)
    rng = np.random.default_rng(0)
    S, Sh = rng.uniform(0, 1, (2, q.count, 10))
    results = []
    for order in (range(q.count), rng.permutation(q.count)):
        A, B, E, W = s.state()
        for m in order:
            sweep_direction(m, q.ordinates[m], A, B, E, W, False, s.mesh.dx, s.sig, S, Sh, s.fin[m], s.tau, s.unif,
                            s.mode, s.eps_tilde)
        results.append((A.copy(), B.copy(), E.copy()))
    for x, y in zip(*results):
        assert np.max(np.abs(x - y)) <= 1e-15


def test_scalar_flux_consistency():
    r = solve_1d(catalog(2), n=10)
    q = gauss_legendre(12)
    assert np.max(np.abs(r.phi - q.weights @ r.psi)) <= 1e-13
    phi, _ = scalar_moments(np.pad(r.psi, ((0, 0), (1, 1))), np.zeros((12, 12)), q.weights)
    assert np.allclose(phi, r.phi, atol=1e-13)


def test_example_1_iteration_count():
    r = solve_1d(catalog(1), n=10)
    assert r.converged and abs(r.iterations - 60) <= 12
    assert r.history[-1] < 1e-14 and np.all(np.isfinite(r.history))


@pytest.mark.parametrize("idx,eps", [(1, 1.0), (2, 0.3), (3, 0.3), (4, 0.3)])
def test_geometric_tail(idx, eps):
    r = solve_1d(catalog(idx, eps), n=20)
    tail = r.history[-21:]
    ratios = tail[1:] / tail[:-1]
    assert r.converged and np.all(ratios < 1)


def test_absolute_norm_option():
    rel = solve_1d(catalog(2, 0.5), n=10)
    ab = solve_1d(catalog(2, 0.5), n=10, norm="absolute", tol=1e-14)
    assert ab.converged and np.max(np.abs(rel.phi - ab.phi)) < 1e-12
    with pytest.raises(ConfigurationError):
        solve_1d(catalog(2), n=10, norm="weird")


def test_max_iter_flags_non_convergence():
    r = solve_1d(catalog(2, 0.1), n=10, max_iter=3)
    assert not r.converged and r.iterations == 3 and "not converged" in r.message


def test_krylov_matches_plain():
    plain = solve_1d(catalog(2, 0.3), n=20)
    kry = solve_1d(catalog(2, 0.3), n=20, accel="krylov")
    assert kry.converged and np.max(np.abs(plain.phi - kry.phi)) < 1e-11


def test_edges_reported():
    r = solve_1d(catalog(3, 0.5), n=10)
    assert r.phi_edge.shape == (11,) and np.array_equal(r.edges, Mesh1D.uniform(1.0, 10).edges)
    assert np.all(np.isfinite(r.phi_edge))


def test_fifth_order_residual_of_exact_moments():
    # sweep once from the exact state with exact scattering sources: the change shrinks at >= 5th order
    from hweno_sn.problems import cell_moments

    p = catalog(1)
    changes = []
    for n in (20, 40, 80):
        s, q = _setup(p, n, 4)
        A, B, E, W = s.state()
        a, b = cell_moments(lambda x: x**3 * (1 - x) ** 3, s.mesh)
        A[:, 1:-1], B[:, 1:-1] = a, b
        S, Sh = np.empty((4, n)), np.empty((4, n))
        update_source(2 * a, 2 * b, s.scat, p.epsilon, s.Q0, s.Q1, S, Sh)
        for m in range(4):
            sweep_direction(m, q.ordinates[m], A, B, E, W, False, s.mesh.dx, s.sig, S, Sh, s.fin[m], s.tau, s.unif,
                            s.mode, s.eps_tilde)
        changes.append(np.max(np.abs(A[:, 1:-1] - a)))
    orders = np.log2(np.array(changes[:-1]) / np.array(changes[1:]))
    assert np.all(orders >= 4.8)
