import numpy as np
import pytest

from hweno_sn import gauss_legendre, moment, product_quadrature


@pytest.mark.parametrize("M", [2, 4, 8, 12, 16, 32, 64])
def test_gauss_legendre_invariants(M):
    q = gauss_legendre(M)
    mu, w = q.ordinates, q.weights
    assert q.count == M
    assert np.all(np.diff(mu) > 0)
    assert np.all(w > 0)
    assert np.all(mu != 0)
    assert np.array_equal(mu, -mu[::-1])
    assert np.array_equal(w, w[::-1])
    assert abs(w.sum() - 2) < 1e-13
    for k in range(2 * M):
        expected = 0.0 if k % 2 else 2.0 / (k + 1)
        assert abs(moment(q, k) - expected) < (1e-13 if k % 2 else 1e-12)


def test_matches_numpy_reference():
    x, w = np.polynomial.legendre.leggauss(12)
    q = gauss_legendre(12)
    assert np.allclose(q.ordinates, x, atol=1e-14)
    assert np.allclose(q.weights, w, atol=1e-14)


def test_s2_nodes():
    q = gauss_legendre(2)
    assert np.allclose(q.ordinates, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    assert np.allclose(q.weights, [1, 1])


@pytest.mark.parametrize("M", [0, 3, 66, -2, 2.0, True])
def test_invalid_orders(M):
    with pytest.raises(ValueError):
        gauss_legendre(M)


def test_negative_moment_order():
    with pytest.raises(ValueError):
        moment(gauss_legendre(4), -1)


@pytest.mark.parametrize("M", [2, 4, 12])
def test_product_rule(M):
    q = product_quadrature(M)
    assert q.count == M * M
    assert abs(q.weights.sum() - 4) < 1e-12
    assert abs(np.sum(q.weights * q.mu)) < 1e-13
    assert abs(np.sum(q.weights * q.mu**2) - 4 / 3) < 1e-12
    assert abs(np.sum(q.weights * q.mu * q.eta)) < 1e-13
    assert np.all(q.mu != 0) and np.all(q.eta != 0)
