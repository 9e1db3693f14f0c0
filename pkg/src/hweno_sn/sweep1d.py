"""One-dimensional fast-sweeping source iteration.

Storage per direction ``m`` holds cell averages ``A[m]`` and first moments
``B[m]`` with one ghost cell at each end (interior cells are ``1..n``).
``E[m, j]`` keeps the upwind value on interface ``x_{j-1/2}`` (``j = 0..n``).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import hweno
from .hweno import LEFT, RIGHT, closure
from .problems import Mesh1D, ProblemSpec, cell_moments, source_moments
from .quadrature import AngularQuadrature1D, gauss_legendre
from .report import Divergence, NumericalBreakdown, RunReport, error_norms

OK, SINGULAR, NONFINITE, MAXITER = 0, 1, 2, 3
DET_FLOOR = 1e-300
GHOST = np.array([5.0, -10.0, 10.0, -5.0, 1.0])


class ConfigurationError(ValueError):
    pass


@njit(cache=True)
def ghost_fill_row(a, n):
    a[0] = 5.0 * a[1] - 10.0 * a[2] + 10.0 * a[3] - 5.0 * a[4] + a[5]
    a[n + 1] = 5.0 * a[n] - 10.0 * a[n - 1] + 10.0 * a[n - 2] - 5.0 * a[n - 3] + a[n - 4]


@njit(cache=True)
def local2(k, s, inflow, ca, cb, r, src, src_hat, outflow_right):
    """Solve the two moment equations of one cell.

    The outflow edge is ``ca*a + cb*b + r``; ``k = mu/dx`` and ``s`` is the
    removal coefficient.  Returns ``(status, a, b, outflow)``.
    """
    if outflow_right:
        m11 = k * ca + s
        m12 = k * cb
        r1 = src + k * inflow - k * r
    else:
        m11 = s - k * ca
        m12 = -k * cb
        r1 = src - k * inflow + k * r
    m21 = k * (0.5 * ca - 1.0)
    m22 = 0.5 * k * cb + s
    r2 = src_hat - 0.5 * k * (r + inflow)
    det = m11 * m22 - m12 * m21
    if abs(det) < DET_FLOOR:
        return SINGULAR, 0.0, 0.0, 0.0
    a = (r1 * m22 - m12 * r2) / det
    b = (m11 * r2 - m21 * r1) / det
    out = ca * a + cb * b + r
    if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(out)):
        return NONFINITE, a, b, out
    return OK, a, b, out


@njit(cache=True)
def sweep_direction(m, mu, A, B, E, W, use_fixed, dx, sig, S, Sh, inflow, tau, unif, mode, eps_t):
    """One Gauss-Seidel pass of direction ``m`` in its upwind order.

    Returns ``(status, cell)``; ``cell`` names the failing cell on error.
    """
    n = dx.shape[0]
    ghost_fill_row(A[m], n)
    ghost_fill_row(B[m], n)
    if mu > 0:
        edge = inflow
        for j in range(n):
            c = j + 1
            a0 = A[m, c]
            b0 = B[m, c]
            val, ca, cb, w0, w1, w2 = closure(A[m, c - 1], a0, A[m, c + 1], B[m, c - 1], b0, B[m, c + 1], RIGHT,
                                              tau[j, 0], tau[j, 1], tau[j, 2], mode, eps_t, unif[j], W[m, j], use_fixed)
            r = val - ca * a0 - cb * b0
            st, a, b, out = local2(mu / dx[j], sig[j], edge, ca, cb, r, S[m, j], Sh[m, j], True)
            if st != OK:
                return st, j
            A[m, c] = a
            B[m, c] = b
            E[m, j] = edge
            edge = out
            if not use_fixed:
                W[m, j, 0] = w0
                W[m, j, 1] = w1
                W[m, j, 2] = w2
        E[m, n] = edge
    else:
        edge = inflow
        for j in range(n - 1, -1, -1):
            c = j + 1
            a0 = A[m, c]
            b0 = B[m, c]
            val, ca, cb, w0, w1, w2 = closure(A[m, c - 1], a0, A[m, c + 1], B[m, c - 1], b0, B[m, c + 1], LEFT,
                                              tau[j, 0], tau[j, 1], tau[j, 2], mode, eps_t, unif[j], W[m, j], use_fixed)
            r = val - ca * a0 - cb * b0
            st, a, b, out = local2(mu / dx[j], sig[j], edge, ca, cb, r, S[m, j], Sh[m, j], False)
            if st != OK:
                return st, j
            A[m, c] = a
            B[m, c] = b
            E[m, j + 1] = edge
            edge = out
            if not use_fixed:
                W[m, j, 0] = w0
                W[m, j, 1] = w1
                W[m, j, 2] = w2
        E[m, 0] = edge
    ghost_fill_row(A[m], n)
    ghost_fill_row(B[m], n)
    return OK, -1


@njit(cache=True)
def scalar_moments(A, B, w):
    M, n2 = A.shape
    phi = np.zeros(n2 - 2)
    phih = np.zeros(n2 - 2)
    for m in range(M):
        phi += w[m] * A[m, 1:-1]
        phih += w[m] * B[m, 1:-1]
    return phi, phih


@njit(cache=True)
def update_source(phi, phih, scat, eps, Q0, Q1, S, Sh):
    M = S.shape[0]
    for m in range(M):
        S[m] = 0.5 * scat * phi + 0.5 * eps * Q0[m]
        Sh[m] = 0.5 * scat * phih + 0.5 * eps * Q1[m]


@njit(cache=True)
def plain_iteration(A, B, E, W, mu, w, dx, sig, scat, eps, Q0, Q1, fin, tau, unif, mode, eps_t, tol, max_iter, hist,
                    relative):
    """Source iteration from the current state; returns (status, iterations, cell, direction).

    The change measure is the dx-weighted L1 norm of the scalar-flux update,
    divided by the L1 norm of the new flux when ``relative`` is set.
    """
    M = mu.shape[0]
    n = dx.shape[0]
    S = np.empty((M, n))
    Sh = np.empty((M, n))
    phi, phih = scalar_moments(A, B, w)
    update_source(phi, phih, scat, eps, Q0, Q1, S, Sh)
    for it in range(max_iter):
        for m in range(M):
            st, cell = sweep_direction(m, mu[m], A, B, E, W, False, dx, sig, S, Sh, fin[m], tau, unif, mode, eps_t)
            if st != OK:
                return st, it + 1, cell, m
        new, newh = scalar_moments(A, B, w)
        delta = 0.0
        size = 0.0
        for j in range(n):
            delta += dx[j] * abs(new[j] - phi[j])
            size += dx[j] * abs(new[j])
        if relative and size > 0.0:
            delta /= size
        hist[it] = delta
        phi = new
        phih = newh
        update_source(phi, phih, scat, eps, Q0, Q1, S, Sh)
        if not np.isfinite(delta):
            return NONFINITE, it + 1, -1, -1
        if delta < tol:
            return OK, it + 1, -1, -1
    return MAXITER, max_iter, -1, -1


@njit(cache=True)
def transport_solve(A, B, E, W, mu, dx, sig, S, Sh, fin, tau, unif, mode, eps_t, inner_tol, max_inner):
    """Invert the streaming-plus-removal operator for fixed sources and weights.

    Each direction is swept until its own moments stop changing.  Returns
    ``(status, sweeps, cell, direction)``.
    """
    M, n2 = A.shape
    sweeps = 0
    oldA = np.empty(n2)
    oldB = np.empty(n2)
    for m in range(M):
        for _ in range(max_inner):
            oldA[:] = A[m]
            oldB[:] = B[m]
            st, cell = sweep_direction(m, mu[m], A, B, E, W, True, dx, sig, S, Sh, fin[m], tau, unif, mode, eps_t)
            sweeps += 1
            if st != OK:
                return st, sweeps, cell, m
            change = 0.0
            scale = 0.0
            for c in range(1, n2 - 1):
                change = max(change, abs(A[m, c] - oldA[c]), abs(B[m, c] - oldB[c]))
                scale = max(scale, abs(A[m, c]), abs(B[m, c]))
            if change <= inner_tol * scale:
                break
    return OK, sweeps, -1, -1


@njit(cache=True)
def freeze_weights(A, B, W, mu, tau, unif, mode, eps_t):
    """Nonlinear weights of every outflow reconstruction from the current state."""
    M, n2 = A.shape
    for m in range(M):
        side = RIGHT if mu[m] > 0 else LEFT
        ghost_fill_row(A[m], n2 - 2)
        ghost_fill_row(B[m], n2 - 2)
        for j in range(n2 - 2):
            c = j + 1
            out = closure(A[m, c - 1], A[m, c], A[m, c + 1], B[m, c - 1], B[m, c], B[m, c + 1], side,
                          tau[j, 0], tau[j, 1], tau[j, 2], mode, eps_t, unif[j], W[m, j], False)
            W[m, j, 0] = out[3]
            W[m, j, 1] = out[4]
            W[m, j, 2] = out[5]


# --------------------------------------------------------------- python API


def ghost_fill(avg: np.ndarray, mom: np.ndarray, side: str) -> tuple[float, float]:
    """Ghost-cell (average, moment) extrapolated from the five nearest cells."""
    avg = np.asarray(avg, dtype=float)
    mom = np.asarray(mom, dtype=float)
    if avg.size < 5 or mom.size < 5:
        raise ConfigurationError("ghost extrapolation needs at least 5 interior cells")
    if side == "left":
        return float(GHOST @ avg[:5]), float(GHOST @ mom[:5])
    if side == "right":
        return float(GHOST @ avg[::-1][:5]), float(GHOST @ mom[::-1][:5])
    raise ValueError("side must be 'left' or 'right'")


def local_solve(mu: float, sigma_t: float, eps: float, dx: float, inflow_edge: float,
                neighbors: tuple[float, float, float, float], own_old: tuple[float, float],
                S: float, S_hat: float, weights=None, tau=(0.0, 0.0, 0.0), mode: str = "hybrid",
                eps_tilde: float = 1e-6) -> tuple[float, float, float]:
    """Cell solve for one direction with frozen neighbors and weights.

    ``neighbors`` is ``(a_prev, b_prev, a_next, b_next)`` in x order and
    ``own_old`` the cell's previous (average, moment), used only to evaluate
    weights when none are supplied.
    """
    if mu == 0:
        raise ValueError("ordinate must be nonzero")
    am, bm, ap, bp = neighbors
    a0, b0 = own_old
    side = RIGHT if mu > 0 else LEFT
    fixed = weights is not None
    wfix = np.asarray(weights if fixed else (0.0, 0.0, 0.0), dtype=float)
    val, ca, cb, *_ = closure(am, a0, ap, bm, b0, bp, side, *tau, hweno.MODES[mode], eps_tilde, True, wfix, fixed)
    r = val - ca * a0 - cb * b0
    st, a, b, out = local2(mu / dx, sigma_t / eps, inflow_edge, ca, cb, r, S, S_hat, mu > 0)
    if st == SINGULAR:
        raise NumericalBreakdown(f"singular cell system (mu={mu})")
    if st == NONFINITE:
        raise Divergence(f"non-finite cell solution (mu={mu})")
    return a, b, out


@dataclass
class Setup1D:
    """Arrays shared by the sweeping kernels for one problem, mesh and quadrature."""

    problem: ProblemSpec
    mesh: Mesh1D
    quad: AngularQuadrature1D
    mode: int
    eps_tilde: float
    sig: np.ndarray
    scat: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray
    fin: np.ndarray
    tau: np.ndarray
    unif: np.ndarray

    @classmethod
    def build(cls, problem: ProblemSpec, mesh: Mesh1D, quad: AngularQuadrature1D, mode: str = "hybrid",
              eps_tilde: float = 1e-6, pairing: str = "printed") -> "Setup1D":
        if problem.dimension != 1:
            raise ConfigurationError("problem is not one-dimensional")
        if mesh.n < 5:
            raise ConfigurationError("the 1D solver needs at least 5 cells")
        if mode not in hweno.MODES:
            raise ConfigurationError(f"unknown mode {mode!r}")
        if not eps_tilde > 0:
            raise ConfigurationError("eps_tilde must be positive")
        problem.check_mesh(mesh)
        eps = problem.epsilon
        mu = quad.ordinates
        xc = mesh.centers
        st = problem.material.sigma_t(xc) * np.ones(mesh.n)
        sa = problem.material.sigma_a(xc) * np.ones(mesh.n)
        ss = st - eps**2 * sa
        pad = lambda v: np.concatenate([v[:1], v, v[-1:]])  # noqa: E731
        dx = mesh.dx
        dxp = pad(dx)
        tau = hweno.tau_factors(pad(st), pad(ss), dxp, pairing)
        rel = lambda u, v: np.abs(u - v) <= 1e-12 * np.maximum(u, v)  # noqa: E731
        unif = rel(dxp[:-2], dxp[1:-1]) & rel(dxp[2:], dxp[1:-1])
        Q0, Q1 = source_moments(problem, mesh, mu)
        left, right = problem.boundary.resolve(mu)
        fin = np.where(mu > 0, left, right)
        return cls(problem, mesh, quad, hweno.MODES[mode], float(eps_tilde), st / eps, st / eps - eps * sa,
                   Q0, Q1, fin, tau, unif)

    def state(self):
        M, n = self.quad.count, self.mesh.n
        return np.zeros((M, n + 2)), np.zeros((M, n + 2)), np.zeros((M, n + 1)), np.zeros((M, n, 3))


def _raise_status(status: int, cell: int, m: int, where: str = "") -> None:
    if status == SINGULAR:
        raise NumericalBreakdown(f"singular cell system at cell {cell}, direction {m}{where}")
    if status == NONFINITE:
        raise Divergence(f"non-finite values at cell {cell}, direction {m}{where}")


def solve_1d(problem: ProblemSpec, mesh: Mesh1D | None = None, quad: AngularQuadrature1D | None = None,
             tol: float = 1e-14, max_iter: int = 200000, mode: str = "hybrid", eps_tilde: float = 1e-6,
             accel: str = "none", pairing: str = "printed", n: int | None = None,
             norm: str = "relative") -> RunReport:
    """Solve a 1D problem with the fast-sweeping iteration.

    ``accel="krylov"`` replaces plain source iteration by GMRES on the scalar
    moments (see ``krylov_1d``); the discrete fixed point is the same.
    ``norm`` selects the stopping measure: ``relative`` (change over size of
    the flux, both dx-weighted L1) or ``absolute``.
    """
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    if norm not in ("relative", "absolute"):
        raise ConfigurationError(f"unknown norm {norm!r}")
    relative = norm == "relative"
    if mesh is None:
        mesh = problem.mesh_hint if n is None else problem.mesh(n)
        if mesh is None:
            raise ConfigurationError("no mesh given and the problem has no mesh hint")
    quad = gauss_legendre(problem.quad_order) if quad is None else quad
    setup = Setup1D.build(problem, mesh, quad, mode, eps_tilde, pairing)
    A, B, E, W = setup.state()
    t0 = time.perf_counter()
    if accel == "none":
        hist = np.zeros(max_iter)
        status, iters, cell, m = plain_iteration(A, B, E, W, quad.ordinates, quad.weights, mesh.dx, setup.sig,
                                                 setup.scat, problem.epsilon, setup.Q0, setup.Q1, setup.fin,
                                                 setup.tau, setup.unif, setup.mode, setup.eps_tilde,
                                                 float(tol), int(max_iter), hist, relative)
        _raise_status(status, cell, m)
        history = hist[:iters].copy()
        sweeps = iters * quad.count
        converged = status == OK
        message = "" if converged else f"not converged after {iters} iterations"
    elif accel == "krylov":
        converged, iters, sweeps, history, message = krylov_1d(setup, A, B, E, W, tol, max_iter, relative)
    else:
        raise ConfigurationError(f"unknown acceleration {accel!r}")
    seconds = time.perf_counter() - t0
    return _report(setup, A, B, E, converged, iters, sweeps, seconds, history, message, mode, accel)


def _report(setup, A, B, E, converged, iters, sweeps, seconds, history, message, mode, accel) -> RunReport:
    quad, mesh, problem = setup.quad, setup.mesh, setup.problem
    phi, phih = scalar_moments(A, B, quad.weights)
    rep = RunReport(problem.name, 1, mesh.n, problem.epsilon, mode, accel, bool(converged), int(iters), seconds,
                    np.asarray(history, dtype=float), phi, (mesh.centers,), (phih,), mesh.edges.copy(),
                    quad.weights @ E, message=message, sweeps=int(sweeps), psi=A[:, 1:-1].copy())
    if problem.exact.available:
        exact = cell_moments(problem.exact.scalar, mesh)[0]
        rep.errors = error_norms(phi, exact, mesh.dx)
    return rep


# ------------------------------------------------------------ Krylov solver


INNER_TOL = 1e-15
MAX_INNER = 2000


def krylov_1d(setup: Setup1D, A, B, E, W, tol: float, max_iter: int, relative: bool = True):
    """GMRES on (phi, phi_hat) wrapped in a frozen-weight fixed-point loop.

    Every outer pass freezes the reconstruction weights at the current state,
    solves the resulting linear problem, then takes one plain sweep; the
    change of that sweep is the convergence measure, identical to the plain
    iteration's.
    """
    from .krylov import diffusion_preconditioner, fixed_point_gmres

    quad, mesh, problem = setup.quad, setup.mesh, setup.problem
    mu, w, dx = quad.ordinates, quad.weights, mesh.dx
    n, M = mesh.n, quad.count
    eps = problem.epsilon
    S = np.zeros((M, n))
    Sh = np.zeros((M, n))
    zeros_in = np.zeros(M)
    zQ = np.zeros((M, n))
    counter = {"sweeps": 0, "matvec": 0}

    def transport(x, with_data):
        A[:] = 0.0
        B[:] = 0.0
        update_source(x[:n], x[n:], setup.scat, eps, setup.Q0 if with_data else zQ,
                      setup.Q1 if with_data else zQ, S, Sh)
        st, sw, cell, m = transport_solve(A, B, E, W, mu, dx, setup.sig, S, Sh, setup.fin if with_data else zeros_in,
                                          setup.tau, setup.unif, setup.mode, setup.eps_tilde, INNER_TOL, MAX_INNER)
        counter["sweeps"] += sw
        _raise_status(st, cell, m, " during transport solve")
        phi, phih = scalar_moments(A, B, w)
        return np.concatenate([phi, phih])

    def apply_k(x):
        counter["matvec"] += 1
        return transport(x, False)

    precond = diffusion_preconditioner(setup.sig, setup.scat, dx)
    history = []
    x = np.zeros(2 * n)
    one = np.zeros(1)
    for _ in range(max(1, max_iter)):
        freeze_weights(A, B, W, mu, setup.tau, setup.unif, setup.mode, setup.eps_tilde)
        rhs = transport(np.zeros(2 * n), True)
        x = fixed_point_gmres(apply_k, rhs, x, precond)
        transport(x, True)
        st, _, cell, m = plain_iteration(A, B, E, W, mu, w, dx, setup.sig, setup.scat, eps, setup.Q0, setup.Q1,
                                         setup.fin, setup.tau, setup.unif, setup.mode, setup.eps_tilde,
                                         np.inf, 1, one, relative)
        counter["sweeps"] += M
        _raise_status(st, cell, m)
        history.append(one[0])
        phi, phih = scalar_moments(A, B, w)
        x = np.concatenate([phi, phih])
        if one[0] < tol:
            break
    converged = history[-1] < tol
    iters = counter["matvec"] + len(history)
    msg = "" if converged else f"fixed-point change {history[-1]:.3e} above tol after {len(history)} outer passes"
    return converged, iters, counter["sweeps"], np.array(history), msg
