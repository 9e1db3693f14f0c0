"""Independent references: diffusion-limit solutions and a dense assembled solve.

Nothing here imports the reconstruction kernels.  The dense system derives its
stencil coefficients from scratch with exact rational arithmetic so that
agreement with the sweeping solver is a real check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .quadrature import AngularQuadrature1D
from .report import NumericalBreakdown


class SystemTooLarge(ValueError):
    pass


# ------------------------------------------------------------ diffusion limit


def diffusion_boundary_values(quad: AngularQuadrature1D, f: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """Leading-order Dirichlet values of the limit diffusion problem.

    ``f`` and ``g`` are indexed like the quadrature (entries on outgoing
    directions are ignored).
    """
    mu, w = quad.ordinates, quad.weights
    gamma = quad.gamma
    pos, neg = mu > 0, mu < 0
    left = 4.0 / gamma * float(np.sum(mu[pos] * np.asarray(f)[pos] * w[pos]))
    right = 4.0 / gamma * float(np.sum(np.abs(mu[neg]) * np.asarray(g)[neg] * w[neg]))
    return left, right


@dataclass(frozen=True)
class DiffusionProblem:
    sigma_t: Callable
    sigma_a: Callable
    q: Callable
    length: float
    phi_left: float = 0.0
    phi_right: float = 0.0


def diffusion_solve(problem: DiffusionProblem, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell-centered finite volumes for -(phi'/(3 sigma_t))' + sigma_a phi = Q.

    Returns cell centers and cell values.  Face diffusivities are harmonic
    means; the Dirichlet data sit on the boundary faces, half a cell away.
    """
    if n_cells < 4:
        raise ValueError("diffusion_solve needs at least 4 cells")
    h = problem.length / n_cells
    xc = (np.arange(n_cells) + 0.5) * h
    D = 1.0 / (3.0 * np.asarray(problem.sigma_t(xc), dtype=float) * np.ones(n_cells))
    sa = np.asarray(problem.sigma_a(xc), dtype=float) * np.ones(n_cells)
    rhs = np.asarray(problem.q(xc), dtype=float) * np.ones(n_cells) * h
    Dface = 2.0 * D[1:] * D[:-1] / (D[1:] + D[:-1])
    c_in = Dface / h
    c_l = 2.0 * D[0] / h
    c_r = 2.0 * D[-1] / h
    diag = sa * h
    diag[1:] += c_in
    diag[:-1] += c_in
    diag[0] += c_l
    diag[-1] += c_r
    rhs[0] += c_l * problem.phi_left
    rhs[-1] += c_r * problem.phi_right
    ab = np.zeros((3, n_cells))
    ab[0, 1:] = -c_in
    ab[1] = diag
    ab[2, :-1] = -c_in
    try:
        phi = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"tridiagonal diffusion system is singular: {exc}") from exc
    return xc, phi


def diffusion_exact_constant(sigma_t: float, sigma_a: float, q: float, length: float,
                             bc: tuple[float, float] = (0.0, 0.0)) -> Callable:
    """Closed-form solution of the constant-coefficient limit diffusion equation."""
    D = 1.0 / (3.0 * sigma_t)
    a, b = bc
    L = length
    if sigma_a == 0:
        def phi(x):
            x = np.asarray(x, dtype=float)
            return q / (2 * D) * x * (L - x) + a + (b - a) * x / L
        return phi
    k = np.sqrt(sigma_a / D)
    p = q / sigma_a

    def phi(x):
        x = np.asarray(x, dtype=float)
        # sinh ratios written with decaying exponentials to avoid overflow
        e = np.exp(-2 * k * L)
        left = (np.exp(-k * x) - np.exp(-k * (2 * L - x))) / (1 - e)
        right = (np.exp(-k * (L - x)) - np.exp(-k * (L + x))) / (1 - e)
        return p + (a - p) * left + (b - p) * right

    return phi


def diffusion_exact_square(sigma_t: float, sigma_a: float, q: float, length: float, terms: int = 4000) -> Callable:
    """Series solution on [0, L]^2 with zero Dirichlet data and a uniform source."""
    D = 1.0 / (3.0 * sigma_t)
    L = length
    n = np.arange(1, 2 * terms, 2, dtype=float)
    kn = n * np.pi / L
    lam = sigma_a + D * kn**2
    kap = np.sqrt(lam / D)
    coef = 4.0 * q / (n * np.pi) / lam

    def phi(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        out = np.zeros(x.shape)
        flat_x, flat_y, flat = x.ravel(), y.ravel(), out.ravel()
        for s in range(0, flat_x.size, 256):
            xs = flat_x[s:s + 256, None]
            ys = flat_y[s:s + 256, None]
            r = np.abs(xs - L / 2)
            ratio = (np.exp(kap * (r - L / 2)) + np.exp(-kap * (r + L / 2))) / (1 + np.exp(-kap * L))
            flat[s:s + 256] = np.sum(coef * (1 - ratio) * np.sin(kn * ys), axis=1)
        return flat.reshape(x.shape)

    return phi


# -------------------------------------------------- exact stencil coefficients


def _poly_avg(k: int, c: Fraction) -> Fraction:
    # average of x^k over [c - 1/2, c + 1/2]
    a, b = c - Fraction(1, 2), c + Fraction(1, 2)
    return (b ** (k + 1) - a ** (k + 1)) / (k + 1)


def _poly_mom(k: int, c: Fraction) -> Fraction:
    # average of x^k (x - c) over the same cell
    return _poly_avg(k + 1, c) - c * _poly_avg(k, c)


def _solve_exact(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    a = [row[:] + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


@lru_cache(maxsize=None)
def quintic_edge_coefficients(side: str) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Weights on (avg_{-1}, avg_0, avg_1) and (mom_{-1}, mom_0, mom_1) giving the
    edge value of the unique quintic matching three unit cells' averages and moments."""
    centers = [Fraction(-1), Fraction(0), Fraction(1)]
    # rows: data functionals, columns: monomials
    rows = [[_poly_avg(k, c) for k in range(6)] for c in centers]
    rows += [[_poly_mom(k, c) for k in range(6)] for c in centers]
    x = Fraction(1, 2) if side == "right" else Fraction(-1, 2)
    point = [x**k for k in range(6)]
    # coefficients w with sum_i w_i rows[i][k] = point[k] for every monomial k
    trans = [[rows[i][k] for i in range(6)] for k in range(6)]
    w = _solve_exact(trans, point)
    return tuple(w[:3]), tuple(w[3:])


@lru_cache(maxsize=None)
def ghost_coefficients() -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    """Extrapolation weights from cells at offsets 1..5 to the ghost at offset 0.

    Averages reproduce x^0..x^4; moments reproduce x^1..x^5.
    """
    cells = [Fraction(i) for i in range(1, 6)]
    ga = _solve_exact([[_poly_avg(k, c) for c in cells] for k in range(5)],
                      [_poly_avg(k, Fraction(0)) for k in range(5)])
    gm = _solve_exact([[_poly_mom(k, c) for c in cells] for k in range(1, 6)],
                      [_poly_mom(k, Fraction(0)) for k in range(1, 6)])
    return tuple(ga), tuple(gm)


# ------------------------------------------------------------ dense assembly


@dataclass
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    shape: tuple[int, ...]  # unknown array shape, e.g. (M, J, 2)

    def index(self, *key) -> int:
        return int(np.ravel_multi_index(key, self.shape))


MAX_UNKNOWNS = 4000


def _linear_1d_functional(n: int, side: str):
    """Edge trace of cell j as a dict {(cell, moment): weight} including ghosts."""
    wa, wb = (tuple(float(v) for v in t) for t in quintic_edge_coefficients(side))
    ga, gm = (tuple(float(v) for v in t) for t in ghost_coefficients())

    def expand(cell: int, k: int) -> list[tuple[int, int, float]]:
        coeffs = ga if k == 0 else gm
        if cell < 0:
            return [(i, k, coeffs[i]) for i in range(5)]
        if cell >= n:
            return [(n - 1 - i, k, coeffs[i]) for i in range(5)]
        return [(cell, k, 1.0)]

    def trace(j: int) -> dict:
        out: dict = {}
        for off, (ca, cb) in zip((-1, 0, 1), zip(wa, wb)):
            for cell, k, w in expand(j + off, 0):
                out[(cell, k)] = out.get((cell, k), 0.0) + ca * w
            for cell, k, w in expand(j + off, 1):
                out[(cell, k)] = out.get((cell, k), 0.0) + cb * w
        return out

    return trace


def assemble_global(problem, mesh, quad, dimension: int | None = None) -> DenseSystem:
    """Dense linear system of the scheme with the linear (quintic) reconstruction."""
    from .problems import source_moments

    dim = problem.dimension if dimension is None else dimension
    if dim == 1:
        return _assemble_1d(problem, mesh, quad, source_moments)
    return _assemble_2d(problem, mesh, quad, source_moments)


def _assemble_1d(problem, mesh, quad, source_moments) -> DenseSystem:
    J, M = mesh.n, quad.count
    shape = (M, J, 2)
    size = int(np.prod(shape))
    if size > MAX_UNKNOWNS:
        raise SystemTooLarge(f"{size} unknowns exceeds the dense cap of {MAX_UNKNOWNS}")
    if J < 5:
        raise ValueError("dense assembly needs at least 5 cells for the boundary extrapolation")
    if not mesh.is_uniform:
        raise ValueError("dense assembly supports uniform meshes only")
    eps = problem.epsilon
    mu, w = quad.ordinates, quad.weights
    xc = mesh.centers
    st = problem.material.sigma_t(xc) * np.ones(J)
    sa = problem.material.sigma_a(xc) * np.ones(J)
    scat = st / eps - eps * sa
    q0, q1 = source_moments(problem, mesh, mu)
    fl, fr = problem.boundary.resolve(mu)
    dx = mesh.dx
    A = np.zeros((size, size))
    b = np.zeros(size)
    idx = lambda m, j, k: (m * J + j) * 2 + k  # noqa: E731
    right = _linear_1d_functional(J, "right")
    left = _linear_1d_functional(J, "left")
    for m in range(M):
        k = mu[m] / dx
        for j in range(J):
            r1, r2 = idx(m, j, 0), idx(m, j, 1)
            # edge at j+1/2 and j-1/2 as ({unknown: weight}, constant)
            if mu[m] > 0:
                e_hi = (right(j), 0.0)
                e_lo = (right(j - 1), 0.0) if j > 0 else ({}, fl[m])
            else:
                e_lo = (left(j), 0.0)
                e_hi = (left(j + 1), 0.0) if j < J - 1 else ({}, fr[m])
            for (cell, mom), c in e_hi[0].items():
                A[r1, idx(m, cell, mom)] += k[j] * c
                A[r2, idx(m, cell, mom)] += 0.5 * k[j] * c
            for (cell, mom), c in e_lo[0].items():
                A[r1, idx(m, cell, mom)] -= k[j] * c
                A[r2, idx(m, cell, mom)] += 0.5 * k[j] * c
            b[r1] -= k[j] * (e_hi[1] - e_lo[1])
            b[r2] -= 0.5 * k[j] * (e_hi[1] + e_lo[1])
            A[r1, r1] += st[j] / eps
            A[r2, r1] -= k[j]
            A[r2, r2] += st[j] / eps
            for mm in range(M):
                A[r1, idx(mm, j, 0)] -= 0.5 * scat[j] * w[mm]
                A[r2, idx(mm, j, 1)] -= 0.5 * scat[j] * w[mm]
            b[r1] += 0.5 * eps * q0[m, j]
            b[r2] += 0.5 * eps * q1[m, j]
    return DenseSystem(A, b, shape)


def _assemble_2d(problem, mesh, quad2, source_moments) -> DenseSystem:
    nx, ny = mesh.shape
    mu, eta, w = quad2.mu, quad2.eta, quad2.weights
    D = quad2.count
    shape = (D, nx, ny, 4)
    size = int(np.prod(shape))
    if size > MAX_UNKNOWNS:
        raise SystemTooLarge(f"{size} unknowns exceeds the dense cap of {MAX_UNKNOWNS}")
    if min(nx, ny) < 5:
        raise ValueError("dense assembly needs at least 5 cells per axis")
    eps = problem.epsilon
    X, Y = np.meshgrid(mesh.x.centers, mesh.y.centers, indexing="ij")
    st = problem.material.sigma_t(X, Y) * np.ones((nx, ny))
    sa = problem.material.sigma_a(X, Y) * np.ones((nx, ny))
    scat = st / eps - eps * sa
    qs = source_moments(problem, mesh, mu, eta)
    bc = problem.boundary.resolve(mu, eta)
    hx_all = mu / mesh.x.dx[0]
    hy_all = eta / mesh.y.dx[0]
    A = np.zeros((size, size))
    b = np.zeros(size)
    idx = lambda d, i, j, k: ((d * nx + i) * ny + j) * 4 + k  # noqa: E731
    tr_x = {s: _linear_1d_functional(nx, s) for s in ("left", "right")}
    tr_y = {s: _linear_1d_functional(ny, s) for s in ("left", "right")}
    # which cell moments play (avg, first moment) along each axis, for the
    # face-average trace and the face-moment trace
    xpairs = ((0, 1), (2, 3))
    ypairs = ((0, 2), (1, 3))

    def x_face(d, i, j, face):
        """Face traces on x-face i+1/2 (face='hi') or i-1/2 ('lo') of cell (i, j)."""
        pos = mu[d] > 0
        src = i if face == "hi" else i - 1
        if not pos:
            src += 1
        if src < 0 or src >= nx:
            val = bc["left" if pos else "right"][d]
            return [({}, val), ({}, 0.0)]
        fn = tr_x["right" if pos else "left"](src)
        out = []
        for pa, pb in xpairs:
            terms = {}
            for (cell, mom), c in fn.items():
                terms[idx(d, cell, j, pa if mom == 0 else pb)] = c
            out.append((terms, 0.0))
        return out

    def y_face(d, i, j, face):
        pos = eta[d] > 0
        src = j if face == "hi" else j - 1
        if not pos:
            src += 1
        if src < 0 or src >= ny:
            val = bc["bottom" if pos else "top"][d]
            return [({}, val), ({}, 0.0)]
        fn = tr_y["right" if pos else "left"](src)
        out = []
        for pa, pb in ypairs:
            terms = {}
            for (cell, mom), c in fn.items():
                terms[idx(d, i, cell, pa if mom == 0 else pb)] = c
            out.append((terms, 0.0))
        return out

    def add(row, trace, coef):
        terms, const = trace
        for col, c in terms.items():
            A[row, col] += coef * c
        b[row] -= coef * const

    for d in range(D):
        hx, hy = hx_all[d], hy_all[d]
        for i in range(nx):
            for j in range(ny):
                rows = [idx(d, i, j, k) for k in range(4)]
                xr, xl = x_face(d, i, j, "hi"), x_face(d, i, j, "lo")
                yt, yb = y_face(d, i, j, "hi"), y_face(d, i, j, "lo")
                # eq 1
                add(rows[0], xr[0], hx)
                add(rows[0], xl[0], -hx)
                add(rows[0], yt[0], hy)
                add(rows[0], yb[0], -hy)
                # eq 2
                add(rows[1], xr[0], 0.5 * hx)
                add(rows[1], xl[0], 0.5 * hx)
                A[rows[1], rows[0]] -= hx
                add(rows[1], yt[1], hy)
                add(rows[1], yb[1], -hy)
                # eq 3
                add(rows[2], xr[1], hx)
                add(rows[2], xl[1], -hx)
                add(rows[2], yt[0], 0.5 * hy)
                add(rows[2], yb[0], 0.5 * hy)
                A[rows[2], rows[0]] -= hy
                # eq 4
                add(rows[3], xr[1], 0.5 * hx)
                add(rows[3], xl[1], 0.5 * hx)
                A[rows[3], rows[2]] -= hx
                add(rows[3], yt[1], 0.5 * hy)
                add(rows[3], yb[1], 0.5 * hy)
                A[rows[3], rows[1]] -= hy
                for k in range(4):
                    A[rows[k], rows[k]] += st[i, j] / eps
                    for dd in range(D):
                        A[rows[k], idx(dd, i, j, k)] -= 0.25 * scat[i, j] * w[dd]
                    b[rows[k]] += 0.25 * eps * qs[k][d, i, j]
    return DenseSystem(A, b, shape)


def direct_solve(system: DenseSystem) -> np.ndarray:
    """Solve the dense system; returns the unknowns reshaped to ``system.shape``."""
    try:
        x = np.linalg.solve(system.matrix, system.rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"dense system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalBreakdown("dense solve produced non-finite values")
    return x.reshape(system.shape)
