"""GMRES for the scalar-moment fixed point x = K x + b.

``K`` maps scalar-flux moments to the moments obtained after one transport
solve with the corresponding scattering source.  A diffusion preconditioner
(the synthetic-acceleration correction) acts on the cell averages; the
higher moments pass through unchanged.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix, csc_matrix, diags
from scipy.sparse.linalg import LinearOperator, gmres, splu

# residual target relative to the size of the solution; in the diffusive
# regime b is O(eps^2) while x is O(1), so a target relative to b is unreachable
XTOL = 1e-14
PASS_RTOL = 1e-8  # reduction asked of one GMRES cycle before the residual is recomputed
MAX_PASSES = 12


def fixed_point_gmres(apply_k: Callable[[np.ndarray], np.ndarray], b: np.ndarray, x0: np.ndarray,
                      precond: Optional[Callable[[np.ndarray], np.ndarray]] = None, xtol: float | None = None,
                      restart: int = 100, maxiter: int = 1) -> np.ndarray:
    """Solve (I - K) x = b with right preconditioning and iterative refinement.

    Each pass runs ``maxiter`` GMRES cycles on the explicitly recomputed
    residual; passes stop at the target ``xtol * |x|`` or when a pass fails to
    halve the residual (the rounding floor of the preconditioned operator).
    """
    xtol = XTOL if xtol is None else xtol
    n = b.size
    P = precond if precond is not None else (lambda v: v)
    op = LinearOperator((n, n), matvec=lambda v: v - apply_k(v), dtype=float)
    opP = LinearOperator((n, n), matvec=lambda v: op.matvec(P(v)), dtype=float)
    if np.linalg.norm(b) == 0 and np.linalg.norm(x0) == 0:
        return np.zeros(n)
    x = np.array(x0, dtype=float)
    restart = min(n, restart)
    best = np.inf
    for _ in range(MAX_PASSES):
        r = b - op.matvec(x)
        rn = np.linalg.norm(r)
        target = xtol * np.linalg.norm(x)
        if rn <= target or rn >= 0.5 * best:
            break
        best = rn
        dy, _ = gmres(opP, r, rtol=0.0, atol=max(target, PASS_RTOL * rn), restart=restart, maxiter=maxiter)
        x = x + P(dy)
    return x


def _face_couplings(D: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior face conductances along the last axis and the vacuum boundary ones."""
    inner = 2.0 / (h[..., :-1] / D[..., :-1] + h[..., 1:] / D[..., 1:])
    # Marshak-type vacuum condition: phi = 2 D dphi/dn at the boundary face
    left = 1.0 / (h[..., 0] / (2 * D[..., 0]) + 2.0)
    right = 1.0 / (h[..., -1] / (2 * D[..., -1]) + 2.0)
    return inner, np.stack([left, right], axis=-1)


def diffusion_preconditioner(removal: np.ndarray, scat: np.ndarray, dx: np.ndarray,
                             dy: Optional[np.ndarray] = None) -> Callable[[np.ndarray], np.ndarray]:
    """Synthetic-acceleration preconditioner on the cell-average block.

    ``removal`` and ``scat`` are the scaled total and scattering coefficients
    per cell (1D array, or (nx, ny) in 2D).  Returns ``v -> v + f`` where
    ``(-div D grad + absorption) f = scat * v_avg`` on the averages.
    """
    D = 1.0 / (3.0 * removal)
    absorb = removal - scat
    if dy is None:
        n = removal.size
        inner, bnd = _face_couplings(D, dx)
        diag = absorb * dx
        diag[:-1] += inner
        diag[1:] += inner
        diag[0] += bnd[0]
        diag[-1] += bnd[1]
        mat = diags([diag, -inner, -inner], [0, 1, -1], format="csc")
        vol = dx
    else:
        nx, ny = removal.shape
        n = nx * ny
        vol = np.outer(dx, dy)
        diag = absorb * vol
        idx = np.arange(n).reshape(nx, ny)
        rows, cols, vals = [], [], []
        # x faces: conductance per unit length times face length dy
        cin, cb = _face_couplings(D.T, np.broadcast_to(dx, (ny, nx)))
        cin = cin.T * dy[None, :]
        cb = cb.T * dy[None, :]
        diag[:-1, :] += cin
        diag[1:, :] += cin
        diag[0, :] += cb[0]
        diag[-1, :] += cb[1]
        rows += [idx[:-1, :].ravel(), idx[1:, :].ravel()]
        cols += [idx[1:, :].ravel(), idx[:-1, :].ravel()]
        vals += [-cin.ravel(), -cin.ravel()]
        # y faces
        cin, cb = _face_couplings(D, np.broadcast_to(dy, (nx, ny)))
        cin = cin * dx[:, None]
        cb = cb * dx[:, None]
        diag[:, :-1] += cin
        diag[:, 1:] += cin
        diag[:, 0] += cb[:, 0]
        diag[:, -1] += cb[:, 1]
        rows += [idx[:, :-1].ravel(), idx[:, 1:].ravel(), idx.ravel()]
        cols += [idx[:, 1:].ravel(), idx[:, :-1].ravel(), idx.ravel()]
        vals += [-cin.ravel(), -cin.ravel(), diag.ravel()]
        mat = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    lu = splu(csc_matrix(mat))
    weight = (scat * vol).ravel()

    def apply(v: np.ndarray) -> np.ndarray:
        out = np.array(v, dtype=float)
        out[:n] += lu.solve(weight * v[:n])
        return out

    return apply


def _edge_weights(side: int) -> np.ndarray:
    """Linear-reconstruction weights on (a_-1, a_0, a_1, b_-1, b_0, b_1) for one edge."""
    from .hweno import LINEAR, closure

    out = np.empty(6)
    for k in range(6):
        e = np.zeros(6)
        e[k] = 1.0
        out[k] = closure(*e, side, 0.0, 0.0, 0.0, LINEAR, 1e-6, True, np.zeros(3), False)[0]
    return out


def _trace_terms(n: int, c: int, side: int, wts: np.ndarray, ghost: np.ndarray) -> list[tuple[int, int, float]]:
    """Outflow trace of cell ``c`` along one axis as (cell, pair slot, weight); ghosts expanded."""
    terms: dict = {}
    for off in (-1, 0, 1):
        cell = c + off
        for slot in (0, 1):
            w = wts[slot * 3 + off + 1]
            if cell < 0:
                expand = [(i, g) for i, g in enumerate(ghost)]
            elif cell >= n:
                expand = [(n - 1 - i, g) for i, g in enumerate(ghost)]
            else:
                expand = [(cell, 1.0)]
            for cc, g in expand:
                terms[(cc, slot)] = terms.get((cc, slot), 0.0) + w * g
    return [(cc, slot, w) for (cc, slot), w in terms.items()]


def coarse_angle_preconditioner(removal: np.ndarray, scat: np.ndarray, dx: np.ndarray, dy: np.ndarray,
                                mu: np.ndarray, eta: np.ndarray, weights: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Right preconditioner ``v -> (I - K_c)^{-1} v`` from a few-direction copy of the 2D scheme.

    ``K_c`` is the scalar-moment transport operator for the coarse quadrature
    (``mu``, ``eta``, ``weights``) with the linear reconstruction and vacuum
    inflow.  It shares the spatial discretization with the fine operator, so
    the diffusive modes that make source iteration slow are treated
    consistently.  The coupled system keeps the four scalar moments as
    auxiliary unknowns and is factored once.
    """
    from .hweno import LEFT, RIGHT
    from .sweep1d import GHOST

    ghost = np.asarray(GHOST, dtype=float)
    nx, ny = removal.shape
    D = len(mu)
    ncell = nx * ny
    base = 4 * D * ncell
    size = base + 4 * ncell
    pid = lambda d, k, i, j: ((d * 4 + k) * nx + i) * ny + j  # noqa: E731
    fid = lambda k, i, j: base + (k * nx + i) * ny + j  # noqa: E731
    wr, wl = _edge_weights(RIGHT), _edge_weights(LEFT)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    xpairs = ((0, 1), (2, 3))
    ypairs = ((0, 2), (1, 3))
    for d in range(D):
        pos_x, pos_y = mu[d] > 0, eta[d] > 0
        for i in range(nx):
            hx = mu[d] / dx[i]
            for j in range(ny):
                hy = eta[d] / dy[j]
                r = [pid(d, k, i, j) for k in range(4)]

                def xface(face):
                    # upwind cell for the face i+1/2 (hi) or i-1/2 (lo)
                    src = (i if face else i - 1) if pos_x else (i + 1 if face else i)
                    if src < 0 or src >= nx:
                        return None
                    return _trace_terms(nx, src, RIGHT if pos_x else LEFT, wr if pos_x else wl, ghost)

                def yface(face):
                    src = (j if face else j - 1) if pos_y else (j + 1 if face else j)
                    if src < 0 or src >= ny:
                        return None
                    return _trace_terms(ny, src, RIGHT if pos_y else LEFT, wr if pos_y else wl, ghost)

                def add_x(row, terms, t, coef):
                    if terms is None:
                        return
                    for cell, slot, w in terms:
                        put(row, pid(d, xpairs[t][slot], cell, j), coef * w)

                def add_y(row, terms, t, coef):
                    if terms is None:
                        return
                    for cell, slot, w in terms:
                        put(row, pid(d, ypairs[t][slot], i, cell), coef * w)

                xr, xl, yt, yb = xface(True), xface(False), yface(True), yface(False)
                add_x(r[0], xr, 0, hx)
                add_x(r[0], xl, 0, -hx)
                add_y(r[0], yt, 0, hy)
                add_y(r[0], yb, 0, -hy)
                add_x(r[1], xr, 0, 0.5 * hx)
                add_x(r[1], xl, 0, 0.5 * hx)
                put(r[1], r[0], -hx)
                add_y(r[1], yt, 1, hy)
                add_y(r[1], yb, 1, -hy)
                add_x(r[2], xr, 1, hx)
                add_x(r[2], xl, 1, -hx)
                add_y(r[2], yt, 0, 0.5 * hy)
                add_y(r[2], yb, 0, 0.5 * hy)
                put(r[2], r[0], -hy)
                add_x(r[3], xr, 1, 0.5 * hx)
                add_x(r[3], xl, 1, 0.5 * hx)
                put(r[3], r[2], -hx)
                add_y(r[3], yt, 1, 0.5 * hy)
                add_y(r[3], yb, 1, 0.5 * hy)
                put(r[3], r[1], -hy)
                for k in range(4):
                    put(r[k], r[k], removal[i, j])
                    put(r[k], fid(k, i, j), -0.25 * scat[i, j])
                    put(fid(k, i, j), r[k], -weights[d])
    for k in range(4):
        for i in range(nx):
            for j in range(ny):
                put(fid(k, i, j), fid(k, i, j), 1.0)
    mat = coo_matrix((vals, (rows, cols)), shape=(size, size))
    lu = splu(csc_matrix(mat))

    def apply(v: np.ndarray) -> np.ndarray:
        rhs = np.zeros(size)
        rhs[base:] = v
        return lu.solve(rhs)[base:]

    return apply
