"""Run configuration: a YAML document plus command-line overrides.

Schema (all keys optional except ``problem``)::

    study: solve | refine | eps-sweep | oracle-check
    problem: 7                # catalog id 1..10, or an inline mapping (below)
    epsilon: 1.0              # a number, or a list for eps-sweep
    mesh: [10, 20, 40]        # cells per axis; one entry for solve
    quad: 12                  # Gauss points per axis (even)
    mode: hybrid              # hybrid | always-nonlinear | always-linear
    tol: 1.0e-14
    max_iter: 200000
    omega: 0.85               # 2D relaxation factor
    eps_tilde: 1.0e-6
    accel: none               # none | krylov
    norm: relative            # relative | absolute stopping measure
    out: results

Inline problems are piecewise constant in x::

    problem:
      dimension: 1
      length: 2.0             # or [lx, ly] in 2D
      bands:
        - {from: 0.0, to: 1.0, sigma_t: 1.0, sigma_a: 0.5, q: 1.0}
        - {from: 1.0, to: 2.0, sigma_t: 10.0, sigma_a: 0.0, q: 0.0}
      boundary: {left: 1.0}   # isotropic inflow per face, vacuum if omitted
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Optional, Union

import yaml

from .problems import (BoundarySpec1D, BoundarySpec2D, MaterialField, ProblemSpec, bands, catalog,
                       constant_inflow, isotropic_source, vacuum)

STUDIES = ("solve", "refine", "eps-sweep", "oracle-check")
MODES = ("hybrid", "always-nonlinear", "always-linear")


class ConfigError(ValueError):
    """Invalid configuration, with the offending key and line when known."""


@dataclass
class RunConfig:
    problem: Union[int, dict] = 1
    study: str = "solve"
    epsilon: Optional[list[float]] = None
    mesh: Optional[list[int]] = None
    quad: Optional[int] = None
    mode: str = "hybrid"
    tol: float = 1e-14
    max_iter: int = 200000
    omega: float = 0.85
    eps_tilde: float = 1e-6
    accel: str = "none"
    norm: str = "relative"
    out: str = "results"
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        return f"key '{key}'" + (f" (line {line})" if line else "")

    def validate(self) -> "RunConfig":
        def bad(key, msg):
            raise ConfigError(f"{self.where(key)}: {msg}")

        if self.study not in STUDIES:
            bad("study", f"unknown study {self.study!r}; expected one of {', '.join(STUDIES)}")
        if self.mode not in MODES:
            bad("mode", f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.accel not in ("none", "krylov"):
            bad("accel", f"unknown acceleration {self.accel!r}")
        if self.norm not in ("relative", "absolute"):
            bad("norm", f"unknown norm {self.norm!r}")
        if isinstance(self.problem, bool) or not isinstance(self.problem, (int, dict)):
            bad("problem", "expected a catalog id or a mapping")
        if isinstance(self.problem, int) and not 1 <= self.problem <= 10:
            bad("problem", f"catalog id {self.problem} is outside 1..10")
        if self.mesh is not None:
            if not self.mesh or any(int(n) != n or n <= 0 for n in self.mesh):
                bad("mesh", "mesh sizes must be positive integers")
            if self.study == "refine" and any(b <= a for a, b in zip(self.mesh, self.mesh[1:])):
                bad("mesh", "refine studies need strictly increasing mesh sizes")
            if self.study == "solve" and len(self.mesh) != 1:
                bad("mesh", "a single solve takes one mesh size")
        if self.epsilon is not None and (not self.epsilon or any(not e > 0 for e in self.epsilon)):
            bad("epsilon", "epsilon values must be positive")
        if self.epsilon is not None and self.study != "eps-sweep" and len(self.epsilon) != 1:
            bad("epsilon", "only eps-sweep takes several epsilon values")
        if self.quad is not None and (self.quad % 2 or not 2 <= self.quad <= 64):
            bad("quad", "quadrature order must be even and in 2..64")
        if not self.tol > 0:
            bad("tol", "tol must be positive")
        if self.max_iter < 1:
            bad("max_iter", "max_iter must be at least 1")
        if not 0 < self.omega <= 1:
            bad("omega", "omega must lie in (0, 1]")
        if not self.eps_tilde > 0:
            bad("eps_tilde", "eps_tilde must be positive")
        if isinstance(self.problem, dict):
            build_problem(self)
        return self


_KEYS = {f.name for f in fields(RunConfig)} - {"lines"}
_ALIASES = {"max-iter": "max_iter", "eps-tilde": "eps_tilde"}


def _as_list(value, cast, key, cfg):
    vals = value if isinstance(value, list) else [value]
    try:
        return [cast(v) for v in vals]
    except (TypeError, ValueError):
        raise ConfigError(f"{cfg.where(key)}: cannot read {value!r}") from None


def _coerce(cfg: RunConfig, key: str, value: Any) -> None:
    try:
        if key == "epsilon":
            cfg.epsilon = _as_list(value, float, key, cfg)
        elif key == "mesh":
            cfg.mesh = _as_list(value, int, key, cfg)
        elif key == "problem":
            cfg.problem = value if isinstance(value, dict) else int(value)
        elif key in ("quad", "max_iter"):
            setattr(cfg, key, int(value))
        elif key in ("tol", "omega", "eps_tilde"):
            setattr(cfg, key, float(value))
        else:
            setattr(cfg, key, str(value))
    except (TypeError, ValueError):
        raise ConfigError(f"{cfg.where(key)}: cannot read {value!r}") from None


def load_config(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse a YAML document and apply ``overrides`` (CLI flags win)."""
    try:
        root = yaml.compose(text) if text.strip() else None
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"config is not valid YAML{where}: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values")
    lines = {}
    if root is not None and isinstance(root, yaml.MappingNode):
        for k, _ in root.value:
            lines[_ALIASES.get(k.value, k.value)] = k.start_mark.line + 1
    cfg = RunConfig(lines=lines)
    for key, value in data.items():
        key = _ALIASES.get(str(key), str(key))
        if key not in _KEYS:
            line = lines.get(key)
            raise ConfigError(f"unknown key '{key}'" + (f" (line {line})" if line else ""))
        _coerce(cfg, key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg.lines.pop(key, None)
            _coerce(cfg, key, value)
    return cfg.validate()


# ------------------------------------------------------------ inline problems


def _inline(cfg: RunConfig) -> ProblemSpec:
    spec = cfg.problem
    bad = lambda msg: ConfigError(f"{cfg.where('problem')}: {msg}")  # noqa: E731
    unknown = set(spec) - {"dimension", "length", "bands", "boundary", "name", "quad"}
    if unknown:
        raise bad(f"unknown problem keys {sorted(unknown)}")
    dim = int(spec.get("dimension", 1))
    if dim not in (1, 2):
        raise bad("dimension must be 1 or 2")
    length = spec.get("length", 1.0)
    lengths = tuple(float(v) for v in (length if isinstance(length, list) else [length] * dim))
    if len(lengths) != dim:
        raise bad("length must give one value per dimension")
    rows = spec.get("bands")
    if not rows:
        raise bad("inline problems need at least one band")
    try:
        cuts = [(float(r["from"]), float(r["to"])) for r in rows]
        st = bands([(a, b, float(r["sigma_t"])) for (a, b), r in zip(cuts, rows)])
        sa = bands([(a, b, float(r.get("sigma_a", 0.0))) for (a, b), r in zip(cuts, rows)])
        q = bands([(a, b, float(r.get("q", 0.0))) for (a, b), r in zip(cuts, rows)])
    except (KeyError, TypeError, ValueError) as exc:
        raise bad(f"malformed band entry ({exc})") from None
    faces = ("left", "right") if dim == 1 else ("left", "right", "bottom", "top")
    bnd = spec.get("boundary") or {}
    if set(bnd) - set(faces):
        raise bad(f"boundary faces must be among {faces}")
    inflow = {f: constant_inflow(float(bnd[f])) if f in bnd else vacuum for f in faces}
    boundary = BoundarySpec1D(**inflow) if dim == 1 else BoundarySpec2D(**inflow)
    eps = cfg.epsilon[0] if cfg.epsilon else 1.0
    try:
        return ProblemSpec(str(spec.get("name", "custom")), dim, lengths, MaterialField(st, sa),
                           isotropic_source(q), boundary, eps, quad_order=int(spec.get("quad", 12)))
    except ValueError as exc:
        raise bad(str(exc)) from None


def build_problem(cfg: RunConfig, epsilon: Optional[float] = None) -> ProblemSpec:
    """The problem named by the config at ``epsilon`` (default: the first configured value)."""
    if epsilon is None:
        epsilon = cfg.epsilon[0] if cfg.epsilon else None
    if isinstance(cfg.problem, dict):
        p = _inline(cfg)
        return p if epsilon is None else replace(p, epsilon=float(epsilon))
    return catalog(cfg.problem, epsilon)
