"""Run reports, error norms and observed-order tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class NumericalBreakdown(RuntimeError):
    """A local cell solve was singular."""


class Divergence(RuntimeError):
    """The iteration produced non-finite values."""


@dataclass
class RunReport:
    problem: str
    dimension: int
    n: int
    epsilon: float
    mode: str
    accel: str
    converged: bool
    iterations: int
    seconds: float
    history: np.ndarray
    phi: np.ndarray
    centers: tuple[np.ndarray, ...]
    phi_moments: tuple[np.ndarray, ...] = ()
    edges: Optional[np.ndarray] = None
    phi_edge: Optional[np.ndarray] = None
    stalled: bool = False
    message: str = ""
    sweeps: int = 0
    errors: dict = field(default_factory=dict)
    psi: Optional[np.ndarray] = None

    @property
    def final_delta(self) -> float:
        return float(self.history[-1]) if len(self.history) else math.inf


def cell_volumes(centers_or_mesh) -> np.ndarray:
    from .problems import Mesh1D

    m = centers_or_mesh
    if isinstance(m, Mesh1D):
        return m.dx
    return np.outer(m.x.dx, m.y.dx)


def error_norms(phi: np.ndarray, exact_avg: np.ndarray, volumes: np.ndarray) -> dict:
    """Volume-weighted mean (L1) and max norm of cell-average errors.

    The L1 norm is divided by the domain measure, so on a uniform mesh it is
    the plain mean of the cell errors.
    """
    diff = np.abs(np.asarray(phi) - np.asarray(exact_avg))
    volumes = np.broadcast_to(volumes, diff.shape)
    return {"L1": float(np.sum(volumes * diff) / np.sum(volumes)), "Linf": float(np.max(diff))}


EXACT = "exact"


def order_table(errors: Sequence[float], sizes: Optional[Sequence[int]] = None) -> list:
    """Observed orders log2(e_{i-1}/e_i); the first entry is None.

    ``sizes`` (if given) must double from one entry to the next.  A zero error
    on the finer mesh is reported as ``"exact"``.
    """
    if len(errors) < 2:
        raise ValueError("need at least two errors")
    if sizes is not None:
        if len(sizes) != len(errors):
            raise ValueError("errors and sizes must have the same length")
        for a, b in zip(sizes, sizes[1:]):
            if b != 2 * a:
                raise ValueError("observed orders assume each mesh halves the previous spacing")
    out: list = [None]
    for coarse, fine in zip(errors, errors[1:]):
        if fine == 0:
            out.append(EXACT)
        elif coarse == 0:
            out.append(-math.inf)
        else:
            out.append(math.log2(coarse / fine))
    return out


def fmt_err(v) -> str:
    """Six significant digits in scientific notation."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return f"{v:.5e}"


def fmt_order(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, str):
        return v
    return f"{v:.4f}"


def field_hash(phi: np.ndarray, digits: int = 6) -> str:
    """SHA-256 of the field printed to ``digits`` significant digits (regression locks)."""
    import hashlib

    text = "\n".join(f"{v:.{digits - 1}e}" for v in np.asarray(phi, dtype=float).ravel())
    return hashlib.sha256(text.encode()).hexdigest()
