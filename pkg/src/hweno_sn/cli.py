"""Command-line harness: single solves, refinement and epsilon studies, oracle checks."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .config import ConfigError, RunConfig, build_problem, load_config
from .oracles import assemble_global, direct_solve
from .quadrature import gauss_legendre, product_quadrature
from .report import RunReport, fmt_err, fmt_order
from .sweep1d import solve_1d
from .sweep2d import solve_2d

ORACLE_TOL = 1e-9


def observed_orders(errors: Sequence[Optional[float]], scales: Sequence[float]) -> list:
    """log(e_prev/e)/log(scale/scale_prev); log2 of the error ratio when the mesh halves."""
    out: list = [None]
    for (e0, s0), (e1, s1) in zip(zip(errors, scales), zip(errors[1:], scales[1:])):
        if e0 is None or e1 is None:
            out.append(None)
        elif e1 == 0:
            out.append("exact")
        elif e0 == 0:
            out.append(-math.inf)
        else:
            out.append(math.log(e0 / e1) / math.log(s1 / s0))
    return out


def _mesh(problem, n: Optional[int]):
    if n is None:
        if problem.mesh_hint is None:
            raise ConfigError("key 'mesh': the problem has no default mesh, give one")
        return problem.mesh_hint
    return problem.mesh(n)


def _quad(problem, order: Optional[int]):
    order = problem.quad_order if order is None else order
    return gauss_legendre(order) if problem.dimension == 1 else product_quadrature(order)


def solve_one(cfg: RunConfig, n: Optional[int], epsilon: Optional[float]) -> RunReport:
    problem = build_problem(cfg, epsilon)
    mesh = _mesh(problem, n)
    quad = _quad(problem, cfg.quad)
    kw = dict(mesh=mesh, quad=quad, tol=cfg.tol, max_iter=cfg.max_iter, mode=cfg.mode, eps_tilde=cfg.eps_tilde,
              accel=cfg.accel, norm=cfg.norm)
    if problem.dimension == 1:
        return solve_1d(problem, **kw)
    return solve_2d(problem, omega=cfg.omega, **kw)


def oracle_check(cfg: RunConfig, n: Optional[int]) -> tuple[RunReport, float]:
    """Always-linear sweep vs the dense direct solve; returns the report and the L-inf gap in phi."""
    problem = build_problem(cfg)
    mesh = _mesh(problem, n)
    quad = _quad(problem, cfg.quad if cfg.quad is not None else 2)
    kw = dict(mesh=mesh, quad=quad, tol=min(cfg.tol, 1e-14), max_iter=cfg.max_iter, mode="always-linear",
              eps_tilde=cfg.eps_tilde, norm=cfg.norm)
    dense = direct_solve(assemble_global(problem, mesh, quad))
    if problem.dimension == 1:
        rep = solve_1d(problem, **kw)
        phi = np.einsum("m,mjk->jk", quad.weights, dense)[:, 0]
    else:
        rep = solve_2d(problem, omega=cfg.omega, **kw)
        phi = np.einsum("d,dijk->ijk", quad.weights, dense)[..., 0]
    return rep, float(np.max(np.abs(rep.phi - phi)))


# ------------------------------------------------------------------- output


def _full(v: float) -> str:
    return repr(float(v))


def write_fields(rep: RunReport, folder: Path) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    with open(folder / "phi_avg.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if rep.dimension == 1:
            w.writerow(["x", "phi"])
            for x, v in zip(rep.centers[0], rep.phi):
                w.writerow([_full(x), _full(v)])
        else:
            w.writerow(["x", "y", "phi"])
            xs, ys = rep.centers
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    w.writerow([_full(x), _full(y), _full(rep.phi[i, j])])
    if rep.dimension == 1 and rep.phi_edge is not None:
        with open(folder / "phi_edge.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "phi"])
            for x, v in zip(rep.edges, rep.phi_edge):
                w.writerow([_full(x), _full(v)])
    with open(folder / "history.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "delta"])
        for k, v in enumerate(rep.history, start=1):
            w.writerow([k, _full(v)])


def write_table(rows: list[dict], path: Path, with_eps: bool) -> None:
    cols = ["N"] + (["epsilon"] if with_eps else []) + ["L1", "L1_order", "Linf", "Linf_order", "iters", "seconds"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])


def _summary(rep: RunReport) -> dict:
    out = {"problem": rep.problem, "N": rep.n, "epsilon": rep.epsilon, "mode": rep.mode, "accel": rep.accel,
           "converged": rep.converged, "stalled": rep.stalled, "iterations": rep.iterations, "sweeps": rep.sweeps,
           "final_delta": fmt_err(rep.final_delta), "seconds": round(rep.seconds, 3)}
    if rep.errors:
        out["L1"] = fmt_err(rep.errors["L1"])
        out["Linf"] = fmt_err(rep.errors["Linf"])
    if rep.phi.size:
        out["phi_min"] = fmt_err(float(np.min(rep.phi)))
        out["phi_max"] = fmt_err(float(np.max(rep.phi)))
    if rep.message:
        out["message"] = rep.message
    return out


def _config_dict(cfg: RunConfig) -> dict:
    return {"study": cfg.study, "problem": cfg.problem, "epsilon": cfg.epsilon, "mesh": cfg.mesh, "quad": cfg.quad,
            "mode": cfg.mode, "tol": cfg.tol, "max_iter": cfg.max_iter, "omega": cfg.omega,
            "eps_tilde": cfg.eps_tilde, "accel": cfg.accel, "norm": cfg.norm}


# ---------------------------------------------------------------------- run


def run(cfg: RunConfig, log=print) -> tuple[list[RunReport], bool]:
    """Execute the configured study and write its outputs; returns (reports, all converged)."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    meshes = cfg.mesh or [None]
    reports: list[RunReport] = []
    rows: list[dict] = []
    runs: list[dict] = []
    ok = True
    if cfg.study == "oracle-check":
        for n in meshes:
            rep, gap = oracle_check(cfg, n)
            reports.append(rep)
            passed = rep.converged and gap <= ORACLE_TOL
            ok &= passed
            runs.append({**_summary(rep), "oracle_linf": fmt_err(gap), "oracle_pass": passed})
            log(f"oracle-check N={rep.n}: L-inf gap {fmt_err(gap)} ({'pass' if passed else 'FAIL'})")
            rows.append({"N": rep.n, "L1": "", "L1_order": "-", "Linf": fmt_err(gap), "Linf_order": "-",
                         "iters": rep.iterations, "seconds": f"{rep.seconds:.3f}"})
        write_table(rows, out / "table.csv", with_eps=False)
    else:
        eps_list = cfg.epsilon if cfg.study == "eps-sweep" and cfg.epsilon else [None]
        for n in meshes:
            group = []
            for eps in eps_list:
                rep = solve_one(cfg, n, eps)
                reports.append(rep)
                group.append(rep)
                ok &= rep.converged
                runs.append(_summary(rep))
                err = f"L1 {fmt_err(rep.errors['L1'])}" if rep.errors else "no reference"
                log(f"N={rep.n} eps={rep.epsilon:g}: {'converged' if rep.converged else 'NOT converged'} "
                    f"in {rep.iterations} iterations, {err}")
                sub = out if len(meshes) * len(eps_list) == 1 else out / f"N{rep.n}_eps{rep.epsilon:g}"
                write_fields(rep, sub)
            if cfg.study == "eps-sweep":
                rows += _rows(group, [1.0 / r.epsilon for r in group])
        if cfg.study != "eps-sweep":
            rows = _rows(reports, [float(r.n) for r in reports])
        write_table(rows, out / "table.csv", with_eps=cfg.study == "eps-sweep")
    doc = {"config": _config_dict(cfg), "all_converged": bool(ok), "runs": runs}
    (out / "report.yaml").write_text(yaml.safe_dump(doc, sort_keys=False))
    return reports, bool(ok)


def _rows(reports: list[RunReport], scales: list[float]) -> list[dict]:
    """Table rows; ``scales`` grow as the error should shrink (N for meshes, 1/eps for eps)."""
    l1 = [r.errors.get("L1") for r in reports]
    li = [r.errors.get("Linf") for r in reports]
    o1 = observed_orders(l1, scales)
    oi = observed_orders(li, scales)
    return [{"N": r.n, "epsilon": f"{r.epsilon:g}", "L1": fmt_err(a), "L1_order": fmt_order(b),
             "Linf": fmt_err(c), "Linf_order": fmt_order(d), "iters": r.iterations, "seconds": f"{r.seconds:.3f}"}
            for r, a, b, c, d in zip(reports, l1, o1, li, oi)]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hweno-sn", description="HWENO fast-sweeping S_N transport solver")
    sub = ap.add_subparsers(dest="study", required=True)
    for name, help_ in (("solve", "one solve"), ("refine", "mesh-refinement study"),
                        ("eps-sweep", "study over epsilon values"), ("oracle-check", "compare with a dense solve")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="YAML config file; flags override its keys")
        p.add_argument("--problem", type=int, help="catalog example id 1..10")
        p.add_argument("--epsilon", type=float, nargs="+")
        p.add_argument("--mesh", type=int, nargs="+", help="cells per axis")
        p.add_argument("--quad", type=int, help="Gauss points per axis")
        p.add_argument("--mode", choices=["hybrid", "always-nonlinear", "always-linear"])
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--omega", type=float)
        p.add_argument("--eps-tilde", dest="eps_tilde", type=float)
        p.add_argument("--accel", choices=["none", "krylov"])
        p.add_argument("--norm", choices=["relative", "absolute"])
        p.add_argument("--out")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        cfg = load_config(text, overrides)
        _, ok = run(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
