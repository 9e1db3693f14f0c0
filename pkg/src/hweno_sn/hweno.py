"""Fifth-order Hermite WENO interface reconstruction.

All stencil data are ``(am, a0, ap)`` cell averages and ``(bm, b0, bp)`` first
moments on cells ``j-1, j, j+1`` of a uniform mesh.  The jitted kernels are the
ones the sweeps call; the functions at the bottom wrap them for interactive
use and testing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numba import njit

LEFT = 0  # value at x_{j-1/2}^+
RIGHT = 1  # value at x_{j+1/2}^-

HYBRID = 0
NONLINEAR = 1
LINEAR = 2

MODES = {"hybrid": HYBRID, "always-nonlinear": NONLINEAR, "always-linear": LINEAR}

# linear weights, indexed [side][k]
GAMMA = np.array([[14 / 27, 25 / 189, 22 / 63], [25 / 189, 14 / 27, 22 / 63]])

# own-cell coefficients (of a0 and b0) of the candidates p0, p1, p2, indexed [side][k]
CAND_A0 = np.array([[1 / 2, 1 / 4, 5 / 6], [1 / 4, 1 / 2, 5 / 6]])
CAND_B0 = np.array([[-2.0, -23 / 2, -60 / 11], [23 / 2, 2.0, 60 / 11]])

# own-cell coefficients of the quintic q
BIG_A0 = 7 / 12
BIG_B0 = np.array([-241 / 54, 241 / 54])


@njit(cache=True)
def candidates(am, a0, ap, bm, b0, bp, side):
    if side == LEFT:
        p0 = 0.5 * am + 0.5 * a0 + 2.0 * bm - 2.0 * b0
        p1 = 0.25 * a0 + 0.75 * ap - 11.5 * b0 - 3.5 * bp
        p2 = (7.0 / 66.0) * am + (5.0 / 6.0) * a0 + (2.0 / 33.0) * ap - (60.0 / 11.0) * b0
    else:
        p0 = 0.75 * am + 0.25 * a0 + 3.5 * bm + 11.5 * b0
        p1 = 0.5 * a0 + 0.5 * ap + 2.0 * b0 - 2.0 * bp
        p2 = (2.0 / 33.0) * am + (5.0 / 6.0) * a0 + (7.0 / 66.0) * ap + (60.0 / 11.0) * b0
    return p0, p1, p2


@njit(cache=True)
def big(am, a0, ap, bm, b0, bp, side):
    if side == LEFT:
        return ((8.0 / 27.0) * am + (7.0 / 12.0) * a0 + (13.0 / 108.0) * ap
                + (28.0 / 27.0) * bm - (241.0 / 54.0) * b0 - (25.0 / 54.0) * bp)
    return ((13.0 / 108.0) * am + (7.0 / 12.0) * a0 + (8.0 / 27.0) * ap
            + (25.0 / 54.0) * bm + (241.0 / 54.0) * b0 - (28.0 / 27.0) * bp)


@njit(cache=True)
def smoothness(am, a0, ap, bm, b0, bp):
    t1 = a0 - am - 54.0 * b0 - 6.0 * bm
    t2 = -5.0 * am + 5.0 * a0 - 38.0 * b0 - 22.0 * bm
    t3 = -am + a0 - 6.0 * b0 - 6.0 * bm
    beta0 = t1 * t1 / 16.0 + 39.0 / 16.0 * t2 * t2 + 3905.0 / 16.0 * t3 * t3
    t1 = a0 - ap + 54.0 * b0 + 6.0 * bp
    t2 = -5.0 * ap + 5.0 * a0 + 38.0 * b0 + 22.0 * bp
    t3 = -ap + a0 + 6.0 * b0 + 6.0 * bp
    beta1 = t1 * t1 / 16.0 + 39.0 / 16.0 * t2 * t2 + 3905.0 / 16.0 * t3 * t3
    t1 = -am + ap + 240.0 * b0
    t2 = -am + 2.0 * a0 - ap
    t3 = -ap + am + 24.0 * b0
    beta2 = t1 * t1 / 484.0 + 13.0 / 12.0 * t2 * t2 + 355.0 / 44.0 * t3 * t3
    return beta0, beta1, beta2


@njit(cache=True)
def weights(g0, g1, g2, bp0, bp1, bp2, eps_tilde):
    w0 = g0 / ((bp0 + eps_tilde) * (bp0 + eps_tilde))
    w1 = g1 / ((bp1 + eps_tilde) * (bp1 + eps_tilde))
    w2 = g2 / ((bp2 + eps_tilde) * (bp2 + eps_tilde))
    s = w0 + w1 + w2
    return w0 / s, w1 / s, w2 / s


@njit(cache=True)
def closure(am, a0, ap, bm, b0, bp, side, t0, t1, t2, mode, eps_tilde, uniform, wfix, use_fixed):
    """Interface value as an affine function of the own-cell unknowns.

    Returns ``(value, ca, cb, w0, w1, w2)`` with ``value = ca*a0 + cb*b0 + rest``.
    Non-uniform stencils fall back to the single-cell linear profile a0 +- 6 b0.
    When ``use_fixed`` is set the nonlinear weights are taken from ``wfix``.
    """
    if not uniform:
        if side == LEFT:
            return a0 - 6.0 * b0, 1.0, -6.0, 0.0, 0.0, 1.0
        return a0 + 6.0 * b0, 1.0, 6.0, 0.0, 0.0, 1.0
    if side == LEFT:
        g0, g1, g2 = 14.0 / 27.0, 25.0 / 189.0, 22.0 / 63.0
    else:
        g0, g1, g2 = 25.0 / 189.0, 14.0 / 27.0, 22.0 / 63.0
    if mode == LINEAR or (mode == HYBRID and t2 == 0.0):
        sb = -1.0 if side == LEFT else 1.0
        return big(am, a0, ap, bm, b0, bp, side), 7.0 / 12.0, sb * 241.0 / 54.0, g0, g1, g2
    if use_fixed:
        w0, w1, w2 = wfix[0], wfix[1], wfix[2]
    else:
        s0, s1, s2 = smoothness(am, a0, ap, bm, b0, bp)
        w0, w1, w2 = weights(g0, g1, g2, t0 * s0, t1 * s1, t2 * s2, eps_tilde)
    p0, p1, p2 = candidates(am, a0, ap, bm, b0, bp, side)
    if side == LEFT:
        ca = 0.5 * w0 + 0.25 * w1 + (5.0 / 6.0) * w2
        cb = -2.0 * w0 - 11.5 * w1 - (60.0 / 11.0) * w2
    else:
        ca = 0.25 * w0 + 0.5 * w1 + (5.0 / 6.0) * w2
        cb = 11.5 * w0 + 2.0 * w1 + (60.0 / 11.0) * w2
    return w0 * p0 + w1 * p1 + w2 * p2, ca, cb, w0, w1, w2


def tau_factors(sig_t: np.ndarray, sig_s: np.ndarray, dx: np.ndarray, pairing: str = "printed") -> np.ndarray:
    """Heterogeneity factors per cell along one axis, shape (n, 3).

    ``sig_t``/``sig_s``/``dx`` include one ghost value at each end (ghosts copy
    their neighbor so boundary cells see no jump from outside).
    """
    right = np.maximum(np.abs(sig_t[2:] - sig_t[1:-1]), np.abs(sig_s[2:] - sig_s[1:-1])) * dx[1:-1]
    left = np.maximum(np.abs(sig_t[1:-1] - sig_t[:-2]), np.abs(sig_s[1:-1] - sig_s[:-2])) * dx[1:-1]
    if pairing == "printed":
        t0, t1 = right, left
    elif pairing == "swapped":
        t0, t1 = left, right
    else:
        raise ValueError(f"unknown tau pairing {pairing!r}")
    return np.stack([t0, t1, np.maximum(t0, t1)], axis=1)


# ----------------------------------------------------------- public wrappers


class InterfaceSide(enum.Enum):
    LeftEdgePlus = LEFT
    RightEdgeMinus = RIGHT


@dataclass(frozen=True)
class StencilData:
    avg: tuple[float, float, float]
    mom: tuple[float, float, float]
    dx: float = 1.0

    def __post_init__(self):
        vals = np.asarray(self.avg + self.mom, dtype=float)
        if vals.shape != (6,) or not np.all(np.isfinite(vals)):
            raise ValueError("stencil needs three finite averages and three finite moments")
        if not self.dx > 0:
            raise ValueError("dx must be positive")

    @property
    def args(self):
        return tuple(float(v) for v in self.avg + self.mom)


@dataclass(frozen=True)
class MaterialStencil:
    sigma_t: tuple[float, float, float]
    sigma_s: tuple[float, float, float]
    dx: float = 1.0

    def __post_init__(self):
        if min(self.sigma_t) <= 0:
            raise ValueError("sigma_t must be positive")


def candidate_values(s: StencilData, side: InterfaceSide) -> tuple[float, float, float]:
    return candidates(*s.args, side.value)


def big_value(s: StencilData, side: InterfaceSide) -> float:
    return big(*s.args, side.value)


def smoothness_indicators(s: StencilData) -> tuple[float, float, float]:
    return smoothness(*s.args)


def heterogeneity_factors(m: MaterialStencil, pairing: str = "printed") -> tuple[float, float, float]:
    st = np.asarray(m.sigma_t, dtype=float)
    ss = np.asarray(m.sigma_s, dtype=float)
    dx = np.full(3, m.dx)
    t = tau_factors(st, ss, dx, pairing)[0]
    return float(t[0]), float(t[1]), float(t[2])


def nonlinear_weights(gamma, beta_prime, eps_tilde: float = 1e-6) -> tuple[float, float, float]:
    return weights(*map(float, gamma), *map(float, beta_prime), float(eps_tilde))


def reconstruct(s: StencilData, m: MaterialStencil, side: InterfaceSide, mode: str = "hybrid",
                eps_tilde: float = 1e-6, pairing: str = "printed") -> tuple[float, tuple[float, float, float]]:
    """Interface value and the weights used to form it."""
    t0, t1, t2 = heterogeneity_factors(m, pairing)
    out = closure(*s.args, side.value, t0, t1, t2, MODES[mode], eps_tilde, True, np.zeros(3), False)
    return out[0], (out[3], out[4], out[5])
