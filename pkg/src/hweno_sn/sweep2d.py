"""Two-dimensional four-moment fast sweeping.

Per direction ``d`` the array ``P[d, k]`` stores, with one ghost layer, the
cell average (k=0), x-moment (1), y-moment (2) and cross moment (3).  Face
traces live in ``FX[d, t, i, j]`` (x-face ``i-1/2`` of row ``j``) and
``FY[d, t, i, j]`` (y-face ``j-1/2`` of column ``i``), where ``t=0`` is the
face average and ``t=1`` the face first moment.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import hweno
from .hweno import LEFT, RIGHT, closure
from .problems import Mesh2D, ProblemSpec, cell_moments, source_moments
from .quadrature import AngularQuadrature2D, product_quadrature
from .report import Divergence, NumericalBreakdown, RunReport, error_norms
from .sweep1d import MAXITER, NONFINITE, OK, SINGULAR, ConfigurationError

STALLED = 4
DET_FLOOR = 1e-300
GHOST_SELF = 5.0  # weight of the adjacent cell in the ghost extrapolation
QUADRANTS = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]], dtype=np.int64)


@njit(cache=True)
def ghost_fill_2d(P, d):
    nx = P.shape[2] - 2
    ny = P.shape[3] - 2
    for k in range(4):
        for j in range(1, ny + 1):
            P[d, k, 0, j] = 5.0 * P[d, k, 1, j] - 10.0 * P[d, k, 2, j] + 10.0 * P[d, k, 3, j] \
                - 5.0 * P[d, k, 4, j] + P[d, k, 5, j]
            P[d, k, nx + 1, j] = 5.0 * P[d, k, nx, j] - 10.0 * P[d, k, nx - 1, j] + 10.0 * P[d, k, nx - 2, j] \
                - 5.0 * P[d, k, nx - 3, j] + P[d, k, nx - 4, j]
        for i in range(1, nx + 1):
            P[d, k, i, 0] = 5.0 * P[d, k, i, 1] - 10.0 * P[d, k, i, 2] + 10.0 * P[d, k, i, 3] \
                - 5.0 * P[d, k, i, 4] + P[d, k, i, 5]
            P[d, k, i, ny + 1] = 5.0 * P[d, k, i, ny] - 10.0 * P[d, k, i, ny - 1] + 10.0 * P[d, k, i, ny - 2] \
                - 5.0 * P[d, k, i, ny - 3] + P[d, k, i, ny - 4]


@njit(cache=True)
def solve4(mat, rhs, x):
    """Gaussian elimination with partial pivoting; returns False if singular."""
    n = 4
    for col in range(n):
        piv = col
        big = abs(mat[col, col])
        for r in range(col + 1, n):
            if abs(mat[r, col]) > big:
                big = abs(mat[r, col])
                piv = r
        if big < DET_FLOOR:
            return False
        if piv != col:
            for c in range(n):
                t = mat[col, c]
                mat[col, c] = mat[piv, c]
                mat[piv, c] = t
            t = rhs[col]
            rhs[col] = rhs[piv]
            rhs[piv] = t
        for r in range(col + 1, n):
            f = mat[r, col] / mat[col, col]
            if f != 0.0:
                for c in range(col, n):
                    mat[r, c] -= f * mat[col, c]
                rhs[r] -= f * rhs[col]
    for r in range(n - 1, -1, -1):
        s = rhs[r]
        for c in range(r + 1, n):
            s -= mat[r, c] * x[c]
        x[r] = s / mat[r, r]
    return True


@njit(cache=True)
def cell_system(hx, hy, sx, sy, s, co, Xia, Xim, Yia, Yim, src, mat, rhs):
    """Fill the 4x4 system of one cell.

    ``co[r] = (ca, cb, rest)`` describes the outflow traces: r=0 x-face
    average (in a, b), r=1 x-face moment (c, d), r=2 y-face average (a, c),
    r=3 y-face moment (b, d).  ``sx``/``sy`` are the direction signs.
    """
    ca1, cb1, r1 = co[0, 0], co[0, 1], co[0, 2]
    ca2, cb2, r2 = co[1, 0], co[1, 1], co[1, 2]
    ca3, cb3, r3 = co[2, 0], co[2, 1], co[2, 2]
    ca4, cb4, r4 = co[3, 0], co[3, 1], co[3, 2]
    gx = hx * sx
    gy = hy * sy
    mat[0, 0] = gx * ca1 + gy * ca3 + s
    mat[0, 1] = gx * cb1
    mat[0, 2] = gy * cb3
    mat[0, 3] = 0.0
    rhs[0] = src[0] - gx * (r1 - Xia) - gy * (r3 - Yia)
    mat[1, 0] = 0.5 * hx * ca1 - hx
    mat[1, 1] = 0.5 * hx * cb1 + gy * ca4 + s
    mat[1, 2] = 0.0
    mat[1, 3] = gy * cb4
    rhs[1] = src[1] - 0.5 * hx * (r1 + Xia) - gy * (r4 - Yim)
    mat[2, 0] = 0.5 * hy * ca3 - hy
    mat[2, 1] = 0.0
    mat[2, 2] = gx * ca2 + 0.5 * hy * cb3 + s
    mat[2, 3] = gx * cb2
    rhs[2] = src[2] - gx * (r2 - Xim) - 0.5 * hy * (r3 + Yia)
    mat[3, 0] = 0.0
    mat[3, 1] = 0.5 * hy * ca4 - hy
    mat[3, 2] = 0.5 * hx * ca2 - hx
    mat[3, 3] = 0.5 * hx * cb2 + 0.5 * hy * cb4 + s
    rhs[3] = src[3] - 0.5 * hx * (r2 + Xim) - 0.5 * hy * (r4 + Yim)


@njit(cache=True)
def _line(P, d, k, ci, cj, alongx):
    if alongx:
        return P[d, k, ci - 1, cj], P[d, k, ci, cj], P[d, k, ci + 1, cj]
    return P[d, k, ci, cj - 1], P[d, k, ci, cj], P[d, k, ci, cj + 1]


@njit(cache=True)
def face_closures(P, d, ci, cj, sidex, sidey, taux, tauy, i, j, mode, eps_t, W, use_fixed, co, wout):
    """Affine outflow-trace closures (and weights) of cell (i, j) for direction d.

    On the inflow boundary the ghost neighbour is an extrapolation whose
    leading term is 5x the cell itself; that term is kept implicit so the
    ghost uses the newest cell value (the lagged form makes the sweep of
    oblique directions unstable).
    """
    nx = P.shape[2] - 2
    ny = P.shape[3] - 2
    for r in range(4):
        if r == 0:
            ka, kb, alongx = 0, 1, True
        elif r == 1:
            ka, kb, alongx = 2, 3, True
        elif r == 2:
            ka, kb, alongx = 0, 2, False
        else:
            ka, kb, alongx = 1, 3, False
        am, a0, ap = _line(P, d, ka, ci, cj, alongx)
        bm, b0, bp = _line(P, d, kb, ci, cj, alongx)
        if alongx:
            side, c, n = sidex, ci, nx
            t0, t1, t2 = taux[i, j, 0], taux[i, j, 1], taux[i, j, 2]
        else:
            side, c, n = sidey, cj, ny
            t0, t1, t2 = tauy[i, j, 0], tauy[i, j, 1], tauy[i, j, 2]
        out = closure(am, a0, ap, bm, b0, bp, side, t0, t1, t2, mode, eps_t, True, W[d, r, i, j], use_fixed)
        ca = out[1]
        cb = out[2]
        wout[r, 0] = out[3]
        wout[r, 1] = out[4]
        wout[r, 2] = out[5]
        if side == RIGHT and c == 1:
            # upwind ghost on the low side; the closure is linear for frozen weights
            da = closure(am + 1.0, a0, ap, bm, b0, bp, side, t0, t1, t2, mode, eps_t, True, wout[r], True)[0] - out[0]
            db = closure(am, a0, ap, bm + 1.0, b0, bp, side, t0, t1, t2, mode, eps_t, True, wout[r], True)[0] - out[0]
            ca += GHOST_SELF * da
            cb += GHOST_SELF * db
        elif side == LEFT and c == n:
            da = closure(am, a0, ap + 1.0, bm, b0, bp, side, t0, t1, t2, mode, eps_t, True, wout[r], True)[0] - out[0]
            db = closure(am, a0, ap, bm, b0, bp + 1.0, side, t0, t1, t2, mode, eps_t, True, wout[r], True)[0] - out[0]
            ca += GHOST_SELF * da
            cb += GHOST_SELF * db
        co[r, 0] = ca
        co[r, 1] = cb
        co[r, 2] = out[0] - ca * a0 - cb * b0


@njit(cache=True)
def sweep_direction_2d(d, mu, eta, P, FX, FY, W, use_fixed, dx, dy, sig, S, fx, fy, taux, tauy, mode, eps_t):
    """Sweep every cell of direction ``d`` in its causal order; returns (status, i, j)."""
    nx = dx.shape[0]
    ny = dy.shape[0]
    mat = np.empty((4, 4))
    rhs = np.empty(4)
    x = np.empty(4)
    co = np.empty((4, 3))
    wout = np.empty((4, 3))
    src = np.empty(4)
    ghost_fill_2d(P, d)
    sx = 1.0 if mu > 0 else -1.0
    sy = 1.0 if eta > 0 else -1.0
    sidex = RIGHT if mu > 0 else LEFT
    sidey = RIGHT if eta > 0 else LEFT
    bx = 0 if mu > 0 else nx
    by = 0 if eta > 0 else ny
    for j in range(ny):
        FX[d, 0, bx, j] = fx
        FX[d, 1, bx, j] = 0.0
    for i in range(nx):
        FY[d, 0, i, by] = fy
        FY[d, 1, i, by] = 0.0
    for ii in range(nx):
        i = ii if mu > 0 else nx - 1 - ii
        fin_i = i if mu > 0 else i + 1
        fout_i = i + 1 if mu > 0 else i
        hx = mu / dx[i]
        for jj in range(ny):
            j = jj if eta > 0 else ny - 1 - jj
            fin_j = j if eta > 0 else j + 1
            fout_j = j + 1 if eta > 0 else j
            hy = eta / dy[j]
            ci = i + 1
            cj = j + 1
            face_closures(P, d, ci, cj, sidex, sidey, taux, tauy, i, j, mode, eps_t, W, use_fixed, co, wout)
            for k in range(4):
                src[k] = S[d, k, i, j]
            cell_system(hx, hy, sx, sy, sig[i, j], co, FX[d, 0, fin_i, j], FX[d, 1, fin_i, j],
                        FY[d, 0, i, fin_j], FY[d, 1, i, fin_j], src, mat, rhs)
            if not solve4(mat, rhs, x):
                return SINGULAR, i, j
            for k in range(4):
                if not np.isfinite(x[k]):
                    return NONFINITE, i, j
                P[d, k, ci, cj] = x[k]
            FX[d, 0, fout_i, j] = co[0, 0] * x[0] + co[0, 1] * x[1] + co[0, 2]
            FX[d, 1, fout_i, j] = co[1, 0] * x[2] + co[1, 1] * x[3] + co[1, 2]
            FY[d, 0, i, fout_j] = co[2, 0] * x[0] + co[2, 1] * x[2] + co[2, 2]
            FY[d, 1, i, fout_j] = co[3, 0] * x[1] + co[3, 1] * x[3] + co[3, 2]
            if not use_fixed:
                for r in range(4):
                    for t in range(3):
                        W[d, r, i, j, t] = wout[r, t]
    ghost_fill_2d(P, d)
    return OK, -1, -1


@njit(cache=True)
def scalar_moments_2d(P, w):
    D = P.shape[0]
    nx = P.shape[2] - 2
    ny = P.shape[3] - 2
    phi = np.zeros((4, nx, ny))
    for d in range(D):
        for k in range(4):
            phi[k] += w[d] * P[d, k, 1:-1, 1:-1]
    return phi


@njit(cache=True)
def update_source_2d(phi, scat, eps, Q, S):
    D = S.shape[0]
    for d in range(D):
        for k in range(4):
            S[d, k] = 0.25 * scat * phi[k] + 0.25 * eps * Q[d, k]


@njit(cache=True)
def sweep_all(P, FX, FY, W, use_fixed, mu, eta, dx, dy, sig, S, fx, fy, taux, tauy, mode, eps_t, order):
    """One pass over the four quadrants in ``order``; returns (status, direction, i, j)."""
    D = mu.shape[0]
    for q in range(4):
        for d in range(D):
            if (mu[d] > 0) == (order[q, 0] > 0) and (eta[d] > 0) == (order[q, 1] > 0):
                st, i, j = sweep_direction_2d(d, mu[d], eta[d], P, FX, FY, W, use_fixed, dx, dy, sig, S,
                                              fx[d], fy[d], taux, tauy, mode, eps_t)
                if st != OK:
                    return st, d, i, j
    return OK, -1, -1, -1


@njit(cache=True)
def plain_iteration_2d(P, FX, FY, W, mu, eta, w, dx, dy, sig, scat, eps, Q, fx, fy, taux, tauy, mode, eps_t,
                       omega, tol, max_iter, hist, relative, order, window, stall_rtol):
    """Relaxed source iteration; returns (status, iterations, direction, i, j)."""
    D = mu.shape[0]
    nx = dx.shape[0]
    ny = dy.shape[0]
    S = np.empty((D, 4, nx, ny))
    Pold = np.empty_like(P)
    phi = scalar_moments_2d(P, w)
    update_source_2d(phi, scat, eps, Q, S)
    for it in range(max_iter):
        if omega != 1.0:
            Pold[:] = P
        st, d, i, j = sweep_all(P, FX, FY, W, False, mu, eta, dx, dy, sig, S, fx, fy, taux, tauy, mode, eps_t, order)
        if st != OK:
            return st, it + 1, d, i, j
        if omega != 1.0:
            for d in range(D):
                for k in range(4):
                    P[d, k] = omega * P[d, k] + (1.0 - omega) * Pold[d, k]
        new = scalar_moments_2d(P, w)
        delta = 0.0
        size = 0.0
        for i in range(nx):
            for j in range(ny):
                vol = dx[i] * dy[j]
                delta += vol * abs(new[0, i, j] - phi[0, i, j])
                size += vol * abs(new[0, i, j])
        if relative and size > 0.0:
            delta /= size
        hist[it] = delta
        phi = new
        update_source_2d(phi, scat, eps, Q, S)
        if not np.isfinite(delta):
            return NONFINITE, it + 1, -1, -1, -1
        if delta < tol:
            return OK, it + 1, -1, -1, -1
        if window > 0 and it >= window:
            ref = hist[it - window]
            if abs(ref - delta) < stall_rtol * ref:
                return STALLED, it + 1, -1, -1, -1
    return MAXITER, max_iter, -1, -1, -1


@njit(cache=True)
def transport_solve_2d(P, FX, FY, W, mu, eta, dx, dy, sig, S, fx, fy, taux, tauy, mode, eps_t, inner_tol, max_inner,
                       omega):
    """Per-direction relaxed inner sweeps to convergence with frozen weights and sources."""
    D = mu.shape[0]
    sweeps = 0
    old = np.empty((4, P.shape[2], P.shape[3]))
    for d in range(D):
        for _ in range(max_inner):
            old[:] = P[d]
            st, i, j = sweep_direction_2d(d, mu[d], eta[d], P, FX, FY, W, True, dx, dy, sig, S, fx[d], fy[d],
                                          taux, tauy, mode, eps_t)
            sweeps += 1
            if st != OK:
                return st, sweeps, d, i, j
            if omega != 1.0:
                P[d] = omega * P[d] + (1.0 - omega) * old
            change = np.max(np.abs(P[d, :, 1:-1, 1:-1] - old[:, 1:-1, 1:-1]))
            scale = np.max(np.abs(P[d, :, 1:-1, 1:-1]))
            if change <= inner_tol * scale:
                break
    return OK, sweeps, -1, -1, -1


@njit(cache=True)
def freeze_weights_2d(P, W, mu, eta, taux, tauy, mode, eps_t):
    D = mu.shape[0]
    nx = P.shape[2] - 2
    ny = P.shape[3] - 2
    co = np.empty((4, 3))
    wout = np.empty((4, 3))
    for d in range(D):
        ghost_fill_2d(P, d)
        sidex = RIGHT if mu[d] > 0 else LEFT
        sidey = RIGHT if eta[d] > 0 else LEFT
        for i in range(nx):
            for j in range(ny):
                face_closures(P, d, i + 1, j + 1, sidex, sidey, taux, tauy, i, j, mode, eps_t, W, False, co, wout)
                for r in range(4):
                    for t in range(3):
                        W[d, r, i, j, t] = wout[r, t]


# --------------------------------------------------------------- python API


def relax(old: np.ndarray, new: np.ndarray, omega: float = 0.85) -> np.ndarray:
    """Blend ``omega*new + (1-omega)*old``."""
    if not 0 < omega <= 1:
        raise ValueError("omega must lie in (0, 1]")
    return omega * np.asarray(new) + (1.0 - omega) * np.asarray(old)


def reconstruct_face_moments(P: np.ndarray, i: int, j: int, face: str, sign: int, tau_x=(0.0, 0.0, 0.0),
                             tau_y=(0.0, 0.0, 0.0), mode: str = "hybrid", eps_tilde: float = 1e-6) -> tuple[float, float]:
    """Upwind (face average, face first moment) on one face of interior cell (i, j).

    ``P`` has shape (4, nx, ny) (no ghosts, cell must not touch the boundary);
    ``face`` is ``"x"`` or ``"y"`` and ``sign`` the sign of the matching
    direction cosine, which selects the outflow side.
    """
    side = RIGHT if sign > 0 else LEFT
    m = hweno.MODES[mode]
    wf = np.zeros(3)
    if face == "x":
        pairs, tau = ((0, 1), (2, 3)), tau_x
        line = lambda k: (P[k, i - 1, j], P[k, i, j], P[k, i + 1, j])  # noqa: E731
    elif face == "y":
        pairs, tau = ((0, 2), (1, 3)), tau_y
        line = lambda k: (P[k, i, j - 1], P[k, i, j], P[k, i, j + 1])  # noqa: E731
    else:
        raise ValueError("face must be 'x' or 'y'")
    vals = []
    for ka, kb in pairs:
        vals.append(closure(*line(ka), *line(kb), side, *tau, m, eps_tilde, True, wf, False)[0])
    return vals[0], vals[1]


def local_solve4(mu: float, eta: float, dx: float, dy: float, removal: float, inflow: tuple[float, float, float, float],
                 closures: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Solve one cell given inflow traces ``(Xa, Xm, Ya, Ym)`` and outflow closures (4x3)."""
    mat = np.empty((4, 4))
    rhs = np.empty(4)
    x = np.empty(4)
    cell_system(mu / dx, eta / dy, np.sign(mu), np.sign(eta), removal, np.asarray(closures, dtype=float),
                *inflow, np.asarray(src, dtype=float), mat, rhs)
    if not solve4(mat, rhs, x):
        raise NumericalBreakdown(f"singular cell system for direction ({mu}, {eta})")
    return x


@dataclass
class Setup2D:
    problem: ProblemSpec
    mesh: Mesh2D
    quad: AngularQuadrature2D
    mode: int
    eps_tilde: float
    sig: np.ndarray
    scat: np.ndarray
    Q: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    taux: np.ndarray
    tauy: np.ndarray

    @classmethod
    def build(cls, problem: ProblemSpec, mesh: Mesh2D, quad: AngularQuadrature2D, mode: str = "hybrid",
              eps_tilde: float = 1e-6, pairing: str = "printed") -> "Setup2D":
        if problem.dimension != 2:
            raise ConfigurationError("problem is not two-dimensional")
        nx, ny = mesh.shape
        if min(nx, ny) < 5:
            raise ConfigurationError("the 2D solver needs at least 5 cells per axis")
        if not (mesh.x.is_uniform and mesh.y.is_uniform):
            raise ConfigurationError("the 2D solver needs a uniform mesh along each axis")
        if mode not in hweno.MODES:
            raise ConfigurationError(f"unknown mode {mode!r}")
        if not eps_tilde > 0:
            raise ConfigurationError("eps_tilde must be positive")
        problem.check_mesh(mesh)
        eps = problem.epsilon
        X, Y = np.meshgrid(mesh.x.centers, mesh.y.centers, indexing="ij")
        st = problem.material.sigma_t(X, Y) * np.ones((nx, ny))
        sa = problem.material.sigma_a(X, Y) * np.ones((nx, ny))
        ss = st - eps**2 * sa
        taux = np.empty((nx, ny, 3))
        tauy = np.empty((nx, ny, 3))
        pad = lambda v: np.concatenate([v[:1], v, v[-1:]])  # noqa: E731
        for j in range(ny):
            taux[:, j] = hweno.tau_factors(pad(st[:, j]), pad(ss[:, j]), pad(mesh.x.dx), pairing)
        for i in range(nx):
            tauy[i] = hweno.tau_factors(pad(st[i]), pad(ss[i]), pad(mesh.y.dx), pairing)
        mu, eta = quad.mu, quad.eta
        Q = np.stack(source_moments(problem, mesh, mu, eta), axis=1)
        bc = problem.boundary.resolve(mu, eta)
        fx = np.where(mu > 0, bc["left"], bc["right"])
        fy = np.where(eta > 0, bc["bottom"], bc["top"])
        return cls(problem, mesh, quad, hweno.MODES[mode], float(eps_tilde), st / eps, st / eps - eps * sa,
                   Q, fx, fy, taux, tauy)

    def state(self):
        D = self.quad.count
        nx, ny = self.mesh.shape
        return (np.zeros((D, 4, nx + 2, ny + 2)), np.zeros((D, 2, nx + 1, ny)), np.zeros((D, 2, nx, ny + 1)),
                np.zeros((D, 4, nx, ny, 3)))


def _raise_status(status, d, i, j, where=""):
    if status == SINGULAR:
        raise NumericalBreakdown(f"singular cell system at cell ({i}, {j}), direction {d}{where}")
    if status == NONFINITE:
        raise Divergence(f"non-finite values at cell ({i}, {j}), direction {d}{where}")


def solve_2d(problem: ProblemSpec, mesh: Mesh2D | None = None, quad: AngularQuadrature2D | None = None,
             tol: float = 1e-14, max_iter: int = 200000, mode: str = "hybrid", omega: float = 0.85,
             eps_tilde: float = 1e-6, accel: str = "none", pairing: str = "printed", n: int | None = None,
             norm: str = "relative", order=None, stall_window: int = 200, stall_rtol: float = 1e-3) -> RunReport:
    """Solve a 2D problem with the four-quadrant fast sweeping iteration."""
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    if not 0 < omega <= 1:
        raise ConfigurationError("omega must lie in (0, 1]")
    if norm not in ("relative", "absolute"):
        raise ConfigurationError(f"unknown norm {norm!r}")
    if mesh is None:
        mesh = problem.mesh_hint if n is None else problem.mesh(n)
        if mesh is None:
            raise ConfigurationError("no mesh given and the problem has no mesh hint")
    quad = product_quadrature(problem.quad_order) if quad is None else quad
    order = QUADRANTS if order is None else np.asarray(order, dtype=np.int64)
    setup = Setup2D.build(problem, mesh, quad, mode, eps_tilde, pairing)
    P, FX, FY, W = setup.state()
    relative = norm == "relative"
    t0 = time.perf_counter()
    stalled = False
    if accel == "none":
        hist = np.zeros(max_iter)
        status, iters, d, i, j = plain_iteration_2d(P, FX, FY, W, quad.mu, quad.eta, quad.weights, mesh.x.dx,
                                                    mesh.y.dx, setup.sig, setup.scat, problem.epsilon, setup.Q,
                                                    setup.fx, setup.fy, setup.taux, setup.tauy, setup.mode,
                                                    setup.eps_tilde, float(omega), float(tol), int(max_iter), hist,
                                                    relative, order, int(stall_window), float(stall_rtol))
        _raise_status(status, d, i, j)
        history = hist[:iters].copy()
        sweeps = iters * quad.count
        converged = status == OK
        stalled = status == STALLED
        if stalled:
            message = f"stalled: change plateaued over {stall_window} iterations at {history[-1]:.3e}"
        elif not converged:
            message = f"not converged after {iters} iterations"
        else:
            message = ""
    elif accel == "krylov":
        converged, iters, sweeps, history, message = krylov_2d(setup, P, FX, FY, W, tol, max_iter, relative, order,
                                                               float(omega))
    else:
        raise ConfigurationError(f"unknown acceleration {accel!r}")
    seconds = time.perf_counter() - t0
    phi = scalar_moments_2d(P, quad.weights)
    rep = RunReport(problem.name, 2, mesh.shape[0], problem.epsilon, {v: k for k, v in hweno.MODES.items()}[setup.mode],
                    accel, bool(converged), int(iters), seconds, np.asarray(history, dtype=float), phi[0],
                    (mesh.x.centers, mesh.y.centers), (phi[1], phi[2], phi[3]), stalled=stalled, message=message,
                    sweeps=int(sweeps))
    if problem.exact.available:
        exact = cell_moments(problem.exact.scalar, mesh)[0]
        rep.errors = error_norms(phi[0], exact, np.outer(mesh.x.dx, mesh.y.dx))
    return rep


INNER_TOL = 1e-15
MAX_INNER = 2000
COARSE_ORDER = 2  # Gauss points per axis of the preconditioning quadrature


def krylov_2d(setup: Setup2D, P, FX, FY, W, tol, max_iter, relative, order, omega=0.85):
    """GMRES on the four scalar moments inside a frozen-weight fixed-point loop (see ``krylov_1d``).

    The preconditioner is the same scheme on a 2x2 Gauss product quadrature.
    """
    from .krylov import coarse_angle_preconditioner, fixed_point_gmres

    quad, mesh, problem = setup.quad, setup.mesh, setup.problem
    mu, eta, w = quad.mu, quad.eta, quad.weights
    dx, dy = mesh.x.dx, mesh.y.dx
    nx, ny = mesh.shape
    D = quad.count
    eps = problem.epsilon
    S = np.zeros((D, 4, nx, ny))
    zQ = np.zeros_like(setup.Q)
    zin = np.zeros(D)
    counter = {"sweeps": 0, "matvec": 0}

    def transport(x, with_data):
        P[:] = 0.0
        update_source_2d(x.reshape(4, nx, ny), setup.scat, eps, setup.Q if with_data else zQ, S)
        st, sw, d, i, j = transport_solve_2d(P, FX, FY, W, mu, eta, dx, dy, setup.sig, S,
                                             setup.fx if with_data else zin, setup.fy if with_data else zin,
                                             setup.taux, setup.tauy, setup.mode, setup.eps_tilde,
                                             INNER_TOL, MAX_INNER, omega)
        counter["sweeps"] += sw
        _raise_status(st, d, i, j, " during transport solve")
        return scalar_moments_2d(P, w).ravel()

    def apply_k(x):
        counter["matvec"] += 1
        return transport(x, False)

    qc = product_quadrature(min(COARSE_ORDER, quad.base.count))
    precond = coarse_angle_preconditioner(setup.sig, setup.scat, dx, dy, qc.mu, qc.eta, qc.weights)
    history = []
    x = np.zeros(4 * nx * ny)
    one = np.zeros(1)
    for _ in range(max(1, max_iter)):
        freeze_weights_2d(P, W, mu, eta, setup.taux, setup.tauy, setup.mode, setup.eps_tilde)
        rhs = transport(np.zeros_like(x), True)
        x = fixed_point_gmres(apply_k, rhs, x, precond)
        transport(x, True)
        st, _, d, i, j = plain_iteration_2d(P, FX, FY, W, mu, eta, w, dx, dy, setup.sig, setup.scat, eps, setup.Q,
                                            setup.fx, setup.fy, setup.taux, setup.tauy, setup.mode, setup.eps_tilde,
                                            omega, np.inf, 1, one, relative, order, 0, 0.0)
        counter["sweeps"] += D
        _raise_status(st, d, i, j)
        history.append(one[0])
        x = scalar_moments_2d(P, w).ravel()
        if one[0] < tol:
            break
    converged = history[-1] < tol
    iters = counter["matvec"] + len(history)
    msg = "" if converged else f"fixed-point change {history[-1]:.3e} above tol after {len(history)} outer passes"
    return converged, iters, counter["sweeps"], np.array(history), msg
