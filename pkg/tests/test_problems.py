import numpy as np
import pytest
from scipy.integrate import quad as adaptive

from hweno_sn import Mesh1D, Mesh2D, catalog, cell_moments, exact_solution, with_epsilon
from hweno_sn.problems import EvaluationError, source_moments

from helpers import cell_data


def test_catalog_example_2():
    p = catalog(2)
    x = np.linspace(0.05, 0.95, 7)
    assert p.domain == (1.0,) and p.epsilon == 1.0
    assert np.all(p.material.sigma_t(x) == 1) and np.all(p.material.sigma_a(x) == 0.8)
    assert np.all(p.source.q(x, 0.3) == 1)
    left, right = p.boundary.resolve(np.array([-0.5, 0.5]))
    assert not left.any() and not right.any()


def test_catalog_example_10():
    p = catalog(10)
    x = np.array([0.5, 2.0, 4.0])
    y = np.full(3, 2.5)
    assert np.array_equal(p.material.sigma_t(x, y), [1, 100, 1])
    assert np.array_equal(p.material.sigma_a(x, y), [0.05, 95, 0.05])
    assert np.all(p.source.q(x, y, 0.1, 0.2) == 1) and p.epsilon == 1.0
    assert p.mesh_hint.shape == (50, 50)


def test_catalog_example_4():
    eps = 0.01
    p = catalog(4, eps)
    x = np.array([0.5, 1.5])
    assert np.allclose(p.material.sigma_t(x), [eps, 1.0])
    assert np.allclose(p.material.sigma_a(x), [1 / eps, 0.8])
    assert np.array_equal(p.source.q(x, 0.5), [0, 1])
    assert p.domain == (2.0,)


def test_example_3_ramp_inflow():
    from hweno_sn import gauss_legendre

    mu = gauss_legendre(12).ordinates
    left, _ = catalog(3).boundary.resolve(mu)
    assert np.array_equal(left[mu > 0], [0, 1, 2, 3, 4, 5])


def test_example_5_mesh_hint():
    m = catalog(5).mesh_hint
    assert m.n == 20 and np.allclose(m.dx[:10], 0.1) and np.allclose(m.dx[10:], 1.0)


@pytest.mark.parametrize("bad", [0, 11, -1])
def test_unknown_example(bad):
    with pytest.raises(ValueError):
        catalog(bad)


@pytest.mark.parametrize("idx", range(1, 11))
@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01, 0.001])
def test_effective_scattering_nonnegative(idx, eps):
    p = catalog(idx, eps)
    mesh = p.mesh_hint or p.mesh(30)
    p.check_mesh(mesh)


def test_material_interface_must_be_on_mesh():
    with pytest.raises(ValueError):
        catalog(4).check_mesh(Mesh1D.uniform(2.0, 7))


def test_epsilon_must_be_positive():
    with pytest.raises(ValueError):
        catalog(1, 0.0)


def test_cell_moments_basic():
    m = Mesh1D.uniform(1.0, 1)
    a, b = cell_moments(lambda x: x, m)
    assert a[0] == pytest.approx(0.5, abs=1e-15) and b[0] == pytest.approx(1 / 12, abs=1e-15)
    a, b = cell_moments(lambda x: np.ones_like(x), Mesh1D.uniform(3.0, 6))
    assert np.allclose(a, 1) and np.allclose(b, 0, atol=1e-15)


def test_cell_moments_exactness():
    # 5-point Gauss: averages exact to degree 9, moments (one extra power) to degree 8
    rng = np.random.default_rng(3)
    m = Mesh1D.uniform(2.0, 7)
    for deg, which in ((9, 0), (8, 1)):
        coef = rng.normal(size=deg + 1)
        got = cell_moments(lambda x: np.polynomial.polynomial.polyval(x, coef), m)[which]
        ref = cell_data(coef, m.centers, m.dx[0])[which]
        assert np.allclose(got, ref, atol=1e-13, rtol=1e-13)


def test_cell_moments_2d_separable():
    m = Mesh2D.uniform(1.0, 2.0, 4)
    avg, mx, my, mxy = cell_moments(lambda x, y: x * y, m)
    X, Y = np.meshgrid(m.x.centers, m.y.centers, indexing="ij")
    assert np.allclose(avg, X * Y)
    assert np.allclose(mx, Y * m.x.dx[0] / 12)
    assert np.allclose(my, X * m.y.dx[0] / 12)
    assert np.allclose(mxy, m.x.dx[0] * m.y.dx[0] / 144)


def test_cell_moments_vs_adaptive_oracle():
    p = catalog(1, 0.1)
    m = p.mesh(10)
    mu = 0.7
    a, b = cell_moments(lambda x: p.source.q(x, mu), m)
    for j, (lo, hi) in enumerate(zip(m.edges[:-1], m.edges[1:])):
        h, c = hi - lo, 0.5 * (lo + hi)
        ra = adaptive(lambda x: p.source.q(x, mu), lo, hi, epsabs=1e-15, epsrel=1e-15)[0] / h
        rb = adaptive(lambda x: p.source.q(x, mu) * (x - c) / h, lo, hi, epsabs=1e-15, epsrel=1e-15)[0] / h
        assert abs(a[j] - ra) < 1e-12 and abs(b[j] - rb) < 1e-12


def test_cell_moments_non_finite():
    with pytest.raises(EvaluationError, match="cell 2"):
        cell_moments(lambda x: np.where(x > 0.5, np.nan, 1.0), Mesh1D.uniform(1.0, 4))


def test_exact_solutions():
    assert exact_solution(1)(0.5) == pytest.approx(0.03125, abs=1e-16)
    assert exact_solution(7)(1.0, 1.0) == 4.0
    assert exact_solution(5).kind == "self-reference"
    assert exact_solution(2)(0.0) == pytest.approx(0.0, abs=1e-14)


def _u1(x):
    return x**3 * (1 - x) ** 3, 3 * x**2 * (1 - x) ** 3 - 3 * x**3 * (1 - x) ** 2


@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
def test_manufactured_residual_1d(eps):
    p = catalog(1, eps)
    rng = np.random.default_rng(0)
    x, mu = rng.uniform(0, 1, 50), rng.uniform(-1, 1, 50)
    u, du = _u1(x)
    st, sa = 1.0, 0.8
    # mu psi_x + (st/eps) psi = (st/eps - eps sa) phi/2 + eps q/2
    res = mu * du + st / eps * u - (st / eps - eps * sa) * u - eps * p.source.q(x, mu) / 2
    assert np.max(np.abs(res)) < 1e-12


@pytest.mark.parametrize("eps", [1.0, 0.1])
def test_manufactured_residual_2d(eps):
    p = catalog(7, eps)
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 2, (2, 40))
    mu, eta = rng.uniform(-1, 1, (2, 40))
    ux, uy = x**3 * (2 - x) ** 3, y**3 * (2 - y) ** 3
    dux = 3 * x**2 * (2 - x) ** 3 - 3 * x**3 * (2 - x) ** 2
    duy = 3 * y**2 * (2 - y) ** 3 - 3 * y**3 * (2 - y) ** 2
    psi = ux * uy
    res = mu * dux * uy + eta * ux * duy + psi / eps - (1 / eps - 0.8 * eps) * psi - eps * p.source.q(x, y, mu, eta) / 4
    assert np.max(np.abs(res)) < 1e-11


def test_with_epsilon_rebuilds_catalog_entries():
    p = with_epsilon(catalog(4, 1.0), 0.01)
    assert p.epsilon == 0.01 and p.material.sigma_t(np.array([0.5]))[0] == pytest.approx(0.01)


def test_source_moments_shapes():
    p = catalog(7)
    m = p.mesh(5)
    mu, eta = np.array([0.3, -0.3]), np.array([0.5, 0.5])
    out = source_moments(p, m, mu, eta)
    assert len(out) == 4 and out[0].shape == (2, 5, 5)
