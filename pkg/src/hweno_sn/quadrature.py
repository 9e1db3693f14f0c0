"""Angular quadrature sets for the discrete-ordinates discretization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AngularQuadrature1D:
    """Symmetric Gauss-Legendre ordinates and weights on [-1, 1]."""

    ordinates: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.ordinates)

    @property
    def positive(self) -> np.ndarray:
        return self.ordinates > 0

    @property
    def gamma(self) -> float:
        """Twice the half-range first moment, 2 * sum over mu > 0 of mu * w."""
        pos = self.positive
        return float(2.0 * np.sum(self.ordinates[pos] * self.weights[pos]))


@dataclass(frozen=True)
class AngularQuadrature2D:
    """Tensor product of a 1D rule with itself; direction d = m * M + n."""

    base: AngularQuadrature1D

    @property
    def count(self) -> int:
        return self.base.count ** 2

    @property
    def mu(self) -> np.ndarray:
        return np.repeat(self.base.ordinates, self.base.count)

    @property
    def eta(self) -> np.ndarray:
        return np.tile(self.base.ordinates, self.base.count)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.base.weights, self.base.weights).ravel()


def _legendre(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # three-term recurrence; returns P_n(x) and P_n'(x)
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(M: int) -> AngularQuadrature1D:
    """M-point Gauss-Legendre rule for even M in [2, 64].

    Nodes come from Newton iteration on P_M started at the Chebyshev
    asymptotic guesses; ordinates are returned in increasing order.
    """
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)):
        raise ValueError(f"quadrature order must be an integer, got {M!r}")
    if M % 2 or not 2 <= M <= 64:
        raise ValueError(f"quadrature order must be even and in [2, 64], got {M}")
    k = np.arange(1, M + 1)
    x = np.cos(np.pi * (k - 0.25) / (M + 0.5))
    for _ in range(100):
        p, dp = _legendre(M, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre(M, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return AngularQuadrature1D(ordinates=x, weights=w)


def moment(quad: AngularQuadrature1D, k: int) -> float:
    """Return sum_m mu_m**k * w_m."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    return float(np.sum(quad.ordinates ** k * quad.weights))


def product_quadrature(M: int) -> AngularQuadrature2D:
    return AngularQuadrature2D(gauss_legendre(M))
