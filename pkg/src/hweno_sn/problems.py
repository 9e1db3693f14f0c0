"""Problem data model, meshes, cell moments and the built-in benchmark catalog."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

# 5-point Gauss-Legendre rule on [-1/2, 1/2]
_GX, _GW = np.polynomial.legendre.leggauss(5)
_GX = 0.5 * _GX
_GW = 0.5 * _GW


class EvaluationError(ValueError):
    pass


# --------------------------------------------------------------------- meshes


@dataclass(frozen=True)
class Mesh1D:
    edges: np.ndarray

    @classmethod
    def uniform(cls, length: float, n: int, start: float = 0.0) -> "Mesh1D":
        if n < 1:
            raise ValueError("mesh needs at least one cell")
        return cls(np.linspace(start, start + length, n + 1))

    @classmethod
    def piecewise(cls, segments: Sequence[tuple[float, float, float]]) -> "Mesh1D":
        """Concatenate uniform segments given as (start, stop, dx)."""
        pieces = []
        for a, b, h in segments:
            n = int(round((b - a) / h))
            if n < 1 or abs(n * h - (b - a)) > 1e-9 * max(1.0, abs(b - a)):
                raise ValueError(f"segment [{a}, {b}] is not divisible by dx={h}")
            pts = np.linspace(a, b, n + 1)
            pieces.append(pts if not pieces else pts[1:])
        return cls(np.concatenate(pieces))

    @property
    def n(self) -> int:
        return len(self.edges) - 1

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def is_uniform(self) -> bool:
        h = self.dx
        return bool(np.allclose(h, h[0], rtol=1e-12, atol=0.0))


@dataclass(frozen=True)
class Mesh2D:
    x: Mesh1D
    y: Mesh1D

    @classmethod
    def uniform(cls, lx: float, ly: float, nx: int, ny: Optional[int] = None) -> "Mesh2D":
        return cls(Mesh1D.uniform(lx, nx), Mesh1D.uniform(ly, nx if ny is None else ny))

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.n, self.y.n


# ------------------------------------------------------------------ materials


@dataclass(frozen=True)
class Region:
    """Axis-aligned box [x0, x1) (x [y0, y1) in 2D) carrying piecewise values."""

    x0: float
    x1: float
    value: float
    y0: float = -np.inf
    y1: float = np.inf

    def contains(self, x, y=None):
        inside = (x >= self.x0) & (x < self.x1)
        if y is not None:
            inside = inside & (y >= self.y0) & (y < self.y1)
        return inside


@dataclass(frozen=True)
class Piecewise:
    """Piecewise-constant field; later regions override earlier ones."""

    default: float
    regions: tuple[Region, ...] = ()

    def __call__(self, x, y=None):
        x = np.asarray(x, dtype=float)
        out = np.full(np.broadcast(x, x if y is None else y).shape, float(self.default))
        for r in self.regions:
            out = np.where(r.contains(x, y), r.value, out)
        return out

    def breakpoints(self) -> tuple[list[float], list[float]]:
        xs, ys = set(), set()
        for r in self.regions:
            xs.update(v for v in (r.x0, r.x1) if np.isfinite(v))
            ys.update(v for v in (r.y0, r.y1) if np.isfinite(v))
        return sorted(xs), sorted(ys)


def constant(value: float) -> Piecewise:
    return Piecewise(float(value))


def bands(pieces: Sequence[tuple[float, float, float]]) -> Piecewise:
    """Piecewise constant in x from (x0, x1, value) triples."""
    return Piecewise(float(pieces[0][2]), tuple(Region(a, b, v) for a, b, v in pieces))


@dataclass(frozen=True)
class MaterialField:
    sigma_t: Piecewise
    sigma_a: Piecewise

    def breakpoints(self) -> tuple[list[float], list[float]]:
        tx, ty = self.sigma_t.breakpoints()
        ax, ay = self.sigma_a.breakpoints()
        return sorted(set(tx) | set(ax)), sorted(set(ty) | set(ay))


# -------------------------------------------------------------------- sources


@dataclass(frozen=True)
class SourceField:
    """External source q.

    In 1D ``q(x, mu)``, in 2D ``q(x, y, mu, eta)``; ``isotropic`` sources
    ignore the direction arguments so their moments are computed once.
    """

    q: Callable
    isotropic: bool = True


def isotropic_source(values: Piecewise) -> SourceField:
    def q(*args):
        if len(args) >= 4:
            return values(args[0], args[1])
        return values(args[0])

    return SourceField(q, isotropic=True)


# ----------------------------------------------------------------- boundaries


Inflow = Callable[..., np.ndarray]


def vacuum(*dirs) -> np.ndarray:
    return np.zeros_like(np.asarray(dirs[0], dtype=float))


def constant_inflow(value: float) -> Inflow:
    def f(*dirs):
        return np.full(np.shape(dirs[0]), float(value))

    return f


def ramp_inflow(lo: float, hi: float) -> Inflow:
    """Linear ramp over the incoming ordinates sorted by increasing |mu|."""

    def f(mu):
        mu = np.asarray(mu, dtype=float)
        n = mu.size
        vals = np.linspace(lo, hi, n) if n > 1 else np.array([float(lo)])
        order = np.argsort(np.abs(mu))
        out = np.empty(n)
        out[order] = vals
        return out

    return f


def table_inflow(values: Sequence[float]) -> Inflow:
    """Explicit values, one per incoming ordinate sorted by increasing |mu|."""

    def f(mu):
        mu = np.asarray(mu, dtype=float)
        if mu.size != len(values):
            raise ValueError(f"inflow table has {len(values)} entries, quadrature has {mu.size} incoming directions")
        order = np.argsort(np.abs(mu))
        out = np.empty(mu.size)
        out[order] = np.asarray(values, dtype=float)
        return out

    return f


@dataclass(frozen=True)
class BoundarySpec1D:
    left: Inflow = vacuum
    right: Inflow = vacuum

    def resolve(self, mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Inflow arrays indexed by direction; zero on outgoing directions."""
        left = np.zeros(len(mu))
        right = np.zeros(len(mu))
        pos, neg = mu > 0, mu < 0
        left[pos] = self.left(mu[pos])
        right[neg] = self.right(mu[neg])
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("inflow values must be finite")
        return left, right


@dataclass(frozen=True)
class BoundarySpec2D:
    """Face-constant inflow, each face a function of the incoming (mu, eta)."""

    left: Inflow = vacuum
    right: Inflow = vacuum
    bottom: Inflow = vacuum
    top: Inflow = vacuum

    def resolve(self, mu: np.ndarray, eta: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for face, mask in (("left", mu > 0), ("right", mu < 0), ("bottom", eta > 0), ("top", eta < 0)):
            vals = np.zeros(len(mu))
            vals[mask] = getattr(self, face)(mu[mask], eta[mask])
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"inflow on {face} face must be finite")
            out[face] = vals
        return out


# ------------------------------------------------------------------- problems


@dataclass(frozen=True)
class ExactSolution:
    """Reference descriptor: ``closed``, ``diffusion-limit`` or ``self-reference``."""

    kind: str
    scalar: Optional[Callable] = None
    angular: Optional[Callable] = None

    @property
    def available(self) -> bool:
        return self.scalar is not None


SELF_REFERENCE = ExactSolution("self-reference")


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dimension: int
    domain: tuple[float, ...]
    material: MaterialField
    source: SourceField
    boundary: BoundarySpec1D | BoundarySpec2D
    epsilon: float = 1.0
    exact: ExactSolution = SELF_REFERENCE
    mesh_hint: Optional[Mesh1D | Mesh2D] = None
    quad_order: int = 12
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.dimension not in (1, 2) or len(self.domain) != self.dimension:
            raise ValueError("domain must list one length per dimension")
        if any(not d > 0 for d in self.domain):
            raise ValueError("domain lengths must be positive")

    def mesh(self, n: int) -> Mesh1D | Mesh2D:
        if self.dimension == 1:
            return Mesh1D.uniform(self.domain[0], n)
        return Mesh2D.uniform(self.domain[0], self.domain[1], n)

    def effective_scattering(self, *centers) -> np.ndarray:
        """sigma_t / eps - eps * sigma_a evaluated at the given points."""
        st = self.material.sigma_t(*centers)
        sa = self.material.sigma_a(*centers)
        return st / self.epsilon - self.epsilon * sa

    def check_mesh(self, mesh: Mesh1D | Mesh2D) -> None:
        """Material breakpoints must fall on cell interfaces."""
        bx, by = self.material.breakpoints()
        axes = [(mesh, bx)] if self.dimension == 1 else [(mesh.x, bx), (mesh.y, by)]
        for m, pts in axes:
            for p in pts:
                if m.edges[0] < p < m.edges[-1] and np.min(np.abs(m.edges - p)) > 1e-10:
                    raise ValueError(f"material interface at {p} does not lie on a cell interface")
        centers = (mesh.centers,) if self.dimension == 1 else np.meshgrid(mesh.x.centers, mesh.y.centers, indexing="ij")
        st = self.material.sigma_t(*centers)
        if np.any(st <= 0):
            raise ValueError("sigma_t must be positive")
        if np.any(self.material.sigma_a(*centers) < 0):
            raise ValueError("sigma_a must be nonnegative")
        if np.any(self.effective_scattering(*centers) < -1e-12 * st / self.epsilon):
            raise ValueError("effective scattering sigma_t/eps - eps*sigma_a is negative")


# --------------------------------------------------------------- cell moments


def cell_moments(f: Callable, mesh: Mesh1D | Mesh2D) -> tuple[np.ndarray, ...]:
    """Cell average and first moments of ``f`` with a 5-point Gauss rule per axis.

    Returns ``(avg, xmom)`` in 1D and ``(avg, xmom, ymom, xymom)`` in 2D, with
    moments taken against the scaled offsets (x - x_c)/dx and (y - y_c)/dy.
    """
    if isinstance(mesh, Mesh1D):
        xq = mesh.centers[:, None] + mesh.dx[:, None] * _GX[None, :]
        vals = np.asarray(f(xq), dtype=float) * np.ones_like(xq)
        _check_finite(vals, lambda idx: f"cell {idx[0]}")
        return vals @ _GW, vals @ (_GW * _GX)
    xm, ym = mesh.x, mesh.y
    xq = xm.centers[:, None] + xm.dx[:, None] * _GX[None, :]
    yq = ym.centers[:, None] + ym.dx[:, None] * _GX[None, :]
    X = xq[:, None, :, None]
    Y = yq[None, :, None, :]
    vals = np.asarray(f(X, Y), dtype=float) * np.ones((xm.n, ym.n, 5, 5))
    _check_finite(vals, lambda idx: f"cell ({idx[0]}, {idx[1]})")
    wx, wy = _GW, _GW
    avg = np.einsum("ijab,a,b->ij", vals, wx, wy)
    xmom = np.einsum("ijab,a,b->ij", vals, wx * _GX, wy)
    ymom = np.einsum("ijab,a,b->ij", vals, wx, wy * _GX)
    xymom = np.einsum("ijab,a,b->ij", vals, wx * _GX, wy * _GX)
    return avg, xmom, ymom, xymom


def _check_finite(vals: np.ndarray, where: Callable) -> None:
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise EvaluationError(f"source is not finite in {where(idx)}")


def source_moments(problem: ProblemSpec, mesh, mu, eta=None) -> tuple[np.ndarray, ...]:
    """Per-direction external source moments, shape (ndir, ...) for each moment."""
    src = problem.source
    if problem.dimension == 1:
        if src.isotropic:
            mom = cell_moments(lambda x: src.q(x, 0.0), mesh)
            return tuple(np.broadcast_to(m, (len(mu),) + m.shape).copy() for m in mom)
        per = [cell_moments(lambda x, mm=mm: src.q(x, mm), mesh) for mm in mu]
    else:
        if src.isotropic:
            mom = cell_moments(lambda x, y: src.q(x, y, 0.0, 0.0), mesh)
            return tuple(np.broadcast_to(m, (len(mu),) + m.shape).copy() for m in mom)
        per = [cell_moments(lambda x, y, a=a, b=b: src.q(x, y, a, b), mesh) for a, b in zip(mu, eta)]
    return tuple(np.stack(ms) for ms in zip(*per))


# -------------------------------------------------------------------- catalog


def _ex1(eps: float) -> ProblemSpec:
    sa = 0.8

    def q(x, mu):
        return (2.0 / eps) * (3 * x**2 - 12 * x**3 + 15 * x**4 - 6 * x**5) * mu + 2 * sa * x**3 * (1 - x) ** 3

    def psi(x, mu=None):
        return x**3 * (1 - x) ** 3

    exact = ExactSolution("closed", scalar=lambda x: 2.0 * psi(x), angular=psi)
    return ProblemSpec("example-1", 1, (1.0,), MaterialField(constant(1.0), constant(sa)),
                       SourceField(q, isotropic=False), BoundarySpec1D(), eps, exact)


def _ex2(eps: float) -> ProblemSpec:
    from .oracles import diffusion_exact_constant

    phi = diffusion_exact_constant(1.0, 0.8, 1.0, 1.0, (0.0, 0.0))
    return ProblemSpec("example-2", 1, (1.0,), MaterialField(constant(1.0), constant(0.8)),
                       isotropic_source(constant(1.0)), BoundarySpec1D(), eps,
                       ExactSolution("diffusion-limit", scalar=phi))


def _ex3(eps: float) -> ProblemSpec:
    return ProblemSpec("example-3", 1, (1.0,), MaterialField(constant(1.0), constant(0.8)),
                       isotropic_source(constant(1.0)), BoundarySpec1D(left=ramp_inflow(0.0, 5.0)), eps)


def _ex4(eps: float) -> ProblemSpec:
    mat = MaterialField(bands([(0, 1, eps), (1, 2, 1.0)]), bands([(0, 1, 1.0 / eps), (1, 2, 0.8)]))
    return ProblemSpec("example-4", 1, (2.0,), mat, isotropic_source(bands([(0, 1, 0.0), (1, 2, 1.0)])),
                       BoundarySpec1D(left=ramp_inflow(0.0, 5.0)), eps)


def _ex5(eps: float) -> ProblemSpec:
    mat = MaterialField(bands([(0, 1, 2.0), (1, 11, 100.0)]), bands([(0, 1, 2.0), (1, 11, 0.0)]))
    mesh = Mesh1D.piecewise([(0.0, 1.0, 0.1), (1.0, 11.0, 1.0)])
    return ProblemSpec("example-5", 1, (11.0,), mat, isotropic_source(constant(0.0)),
                       BoundarySpec1D(left=constant_inflow(1.0)), eps, mesh_hint=mesh)


def _ex6(eps: float) -> ProblemSpec:
    mat = MaterialField(constant(100.0), bands([(0, 10, 10.0), (10, 20, 0.0)]))
    return ProblemSpec("example-6", 1, (20.0,), mat, isotropic_source(bands([(0, 10, 10.0), (10, 20, 0.0)])),
                       BoundarySpec1D(), eps, mesh_hint=Mesh1D.uniform(20.0, 20))


def _ex7(eps: float) -> ProblemSpec:
    sa = 0.8

    def u(s):
        return s**3 * (2 - s) ** 3

    def du(s):
        return 24 * s**2 - 48 * s**3 + 30 * s**4 - 6 * s**5

    def q(x, y, mu, eta):
        return (4.0 / eps) * (du(x) * u(y) * mu + u(x) * du(y) * eta) + 4 * sa * u(x) * u(y)

    exact = ExactSolution("closed", scalar=lambda x, y: 4.0 * u(x) * u(y), angular=lambda x, y, *d: u(x) * u(y))
    return ProblemSpec("example-7", 2, (2.0, 2.0), MaterialField(constant(1.0), constant(sa)),
                       SourceField(q, isotropic=False), BoundarySpec2D(), eps, exact)


def _ex8(eps: float) -> ProblemSpec:
    from .oracles import diffusion_exact_square

    phi = diffusion_exact_square(1.0, 1.0, 1.0, 1.0)
    return ProblemSpec("example-8", 2, (1.0, 1.0), MaterialField(constant(1.0), constant(1.0)),
                       isotropic_source(constant(1.0)), BoundarySpec2D(), eps,
                       ExactSolution("diffusion-limit", scalar=phi), mesh_hint=Mesh2D.uniform(1.0, 1.0, 20))


EXAMPLE9_DEFAULTS = {
    "length": 3.0,
    "thin": {"sigma_t": 0.1, "sigma_a": 0.1, "q": 0.0},
    "source": {"sigma_t": 1.0, "sigma_a": 1.0, "q": 1.0},
    "scatter": {"sigma_t": 10.0, "sigma_a": 0.0, "q": 0.0},
}


def example9(eps: float = 1.0, **overrides) -> ProblemSpec:
    """Three vertical bands: non-scattering, absorbing with source, scattering."""
    cfg = {**EXAMPLE9_DEFAULTS, **overrides}
    L = float(cfg["length"])
    cuts = [(0.0, L / 3), (L / 3, 2 * L / 3), (2 * L / 3, L)]
    zones = [cfg["thin"], cfg["source"], cfg["scatter"]]
    st = bands([(a, b, z["sigma_t"]) for (a, b), z in zip(cuts, zones)])
    sa = bands([(a, b, z["sigma_a"]) for (a, b), z in zip(cuts, zones)])
    q = bands([(a, b, z["q"]) for (a, b), z in zip(cuts, zones)])
    return ProblemSpec("example-9", 2, (L, L), MaterialField(st, sa), isotropic_source(q), BoundarySpec2D(), eps)


def _ex10(eps: float) -> ProblemSpec:
    st = bands([(0, 1, 1.0), (1, 3, 100.0), (3, 5, 1.0)])
    sa = bands([(0, 1, 0.05), (1, 3, 95.0), (3, 5, 0.05)])
    return ProblemSpec("example-10", 2, (5.0, 5.0), MaterialField(st, sa), isotropic_source(constant(1.0)),
                       BoundarySpec2D(), eps, mesh_hint=Mesh2D.uniform(5.0, 5.0, 50))


_CATALOG = {1: _ex1, 2: _ex2, 3: _ex3, 4: _ex4, 5: _ex5, 6: _ex6, 7: _ex7, 8: _ex8, 9: example9, 10: _ex10}


def catalog(example_id: int, epsilon: Optional[float] = None) -> ProblemSpec:
    """Built-in benchmark ``example_id`` (1..10); epsilon defaults to 1."""
    if example_id not in _CATALOG:
        raise ValueError(f"unknown example id {example_id!r}; expected 1..10")
    spec = _CATALOG[example_id](1.0 if epsilon is None else float(epsilon))
    return replace(spec, meta={"example_id": example_id})


def exact_solution(example_id: int, kind: str = "scalar", epsilon: Optional[float] = None):
    """Evaluable reference for the example, or the ExactSolution descriptor when none exists."""
    if kind not in ("scalar", "angular"):
        raise ValueError("kind must be 'scalar' or 'angular'")
    ex = catalog(example_id, epsilon).exact
    fn = ex.scalar if kind == "scalar" else ex.angular
    return fn if fn is not None else ex


def with_epsilon(problem: ProblemSpec, epsilon: float) -> ProblemSpec:
    """Same problem at a different epsilon; catalog problems are rebuilt since data may depend on it."""
    idx = problem.meta.get("example_id")
    if idx is not None:
        rebuilt = catalog(idx, epsilon)
        return replace(rebuilt, meta=problem.meta, mesh_hint=problem.mesh_hint or rebuilt.mesh_hint)
    return replace(problem, epsilon=float(epsilon))
