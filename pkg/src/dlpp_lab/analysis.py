"""Experiment orchestration: level sets, error metrics, command pipelines.

Each pipeline writes CSV/NDJSON/JSON artifacts plus a .meta.json sidecar with
the config hash and seeds; identical config and seeds give byte-identical
CSV/NDJSON output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage import measure

from . import curve_extract, formats, hjb_solver, lattice_sim, tasep_bridge
from .config import ExperimentConfig
from .hjb_solver import ValueGrid

__all__ = [
    "LevelSet",
    "level_set",
    "sup_error",
    "hausdorff_one_sided",
    "convergence_study",
    "run_solve",
    "run_simulate",
    "run_compare",
    "run_path",
    "run_tasep",
    "run_convergence",
]


@dataclass(frozen=True)
class LevelSet:
    level: float
    polylines: list  # list of (k, 2) float arrays in continuum coordinates


def level_set(vg: ValueGrid, t: float) -> LevelSet:
    """Marching-squares contour of the grid at level t (empty if out of range)."""
    vals = vg.values
    if t < vals.min() or t > vals.max():
        return LevelSet(float(t), [])
    contours = measure.find_contours(vals, t)
    polys = [np.column_stack([vg.base[0] + c[:, 0] * vg.h, vg.base[1] + c[:, 1] * vg.h])
             for c in contours]
    return LevelSet(float(t), polys)


def sup_error(scaled: ValueGrid, solved: ValueGrid) -> float:
    """Max absolute difference over the common extent.

    Grids must share spacing, or the solved grid is resampled at the scaled
    grid's points by nearest grid point; incommensurate extents are an error.
    """
    if scaled.base != solved.base:
        raise ValueError("grids have different base points")
    e1 = min(scaled.extent[0], solved.extent[0])
    e2 = min(scaled.extent[1], solved.extent[1])
    if e1 <= 0 or e2 <= 0:
        raise ValueError("grids do not overlap")
    if abs(scaled.h - solved.h) < 1e-12:
        n1 = int(round(e1 / scaled.h)) + 1
        n2 = int(round(e2 / scaled.h)) + 1
        return float(np.max(np.abs(scaled.values[:n1, :n2] - solved.values[:n1, :n2])))
    # nearest-grid-point resample of the solved grid at the scaled grid's points
    n1 = int(round(e1 / scaled.h)) + 1
    n2 = int(round(e2 / scaled.h)) + 1
    ii = np.rint(np.arange(n1) * scaled.h / solved.h).astype(int)
    jj = np.rint(np.arange(n2) * scaled.h / solved.h).astype(int)
    if ii[-1] >= solved.dims[0] or jj[-1] >= solved.dims[1]:
        raise ValueError("incommensurate grid extents")
    return float(np.max(np.abs(scaled.values[:n1, :n2] - solved.values[np.ix_(ii, jj)])))


def hausdorff_one_sided(a: LevelSet, b: LevelSet) -> float:
    """sup over vertices of a of the distance to b's vertices (inf if b empty)."""
    pa = np.concatenate(a.polylines) if a.polylines else np.empty((0, 2))
    pb = np.concatenate(b.polylines) if b.polylines else np.empty((0, 2))
    if len(pa) == 0:
        return 0.0
    if len(pb) == 0:
        return float("inf")
    d2 = ((pa[:, None, :] - pb[None, :, :]) ** 2).sum(-1)
    return float(np.sqrt(d2.min(axis=1).max()))


def _default_levels(vg: ValueGrid):
    lo, hi = float(vg.values.min()), float(vg.values.max())
    return [lo + (hi - lo) * k / 10.0 for k in range(1, 10)]


def convergence_study(field, h_list, extent=(1.0, 1.0), reference=None):
    """Rows of (h, sup_error, boundary_residual, runtime_s).

    reference: a callable (x1_grid, x2_grid) -> values, or None to use the
    solution on a grid twice as fine as the finest h (self-convergence).
    """
    h_list = list(h_list)
    if reference is None:
        fine = hjb_solver.solve(field, min(h_list) / 2.0, extent)

        def reference(X1, X2):
            return fine.value_at(X1, X2)

    rows = []
    for h in h_list:
        t0 = time.perf_counter()
        vg = hjb_solver.solve(field, h, extent)
        dt = time.perf_counter() - t0
        n1, n2 = vg.dims
        X1, X2 = np.meshgrid(h * np.arange(n1), h * np.arange(n2), indexing="ij")
        err = float(np.max(np.abs(vg.values - np.asarray(reference(X1, X2)))))
        rows.append({
            "h": h,
            "sup_error": err,
            "boundary_residual": hjb_solver.boundary_residual(vg, field),
            "runtime_s": dt,
        })
    return rows


# ---------------------------------------------------------------------------
# Command pipelines


def _meta(out: Path, name: str, cfg: ExperimentConfig, seeds=None, notes=None):
    formats.write_meta_sidecar(out / name, cfg.raw, seeds, notes)


def _export_levels_csv(path, level_sets):
    lines = ["x,y,level,polyline"]
    for ls in level_sets:
        for p_idx, poly in enumerate(ls.polylines):
            for x, y in poly:
                lines.append(f"{x!r},{y!r},{ls.level!r},{p_idx}")
    Path(path).write_text("\n".join(lines) + "\n")


def run_solve(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    vg = hjb_solver.solve(cfg.field, cfg.h, cfg.extent)
    formats.write_grid_csv(out / "value_grid.csv", vg.values, kind="value_grid", h=cfg.h)
    formats.write_grid_binary(out / "value_grid.bin", vg.values)
    _meta(out, "value_grid.csv", cfg, notes={"description": vg.description})
    if cfg.z is not None:
        wg = hjb_solver.solve_relative(cfg.field, cfg.h, cfg.extent, cfg.z)
        formats.write_grid_csv(out / "relative_grid.csv", wg.values, kind="value_grid",
                               h=cfg.h, extra={"base": f"{cfg.z[0]:g};{cfg.z[1]:g}"})
    return {"corner_value": float(vg.values[-1, -1]),
            "boundary_residual": hjb_solver.boundary_residual(vg, cfg.field)}


def run_simulate(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    dims = (int(round(cfg.extent[0] * cfg.N)) + 1, int(round(cfg.extent[1] * cfg.N)) + 1)
    seeds = []
    corners = []
    for k in range(cfg.trials):
        s = lattice_sim.trial_seed(cfg.seed, k)
        seeds.append(s)
        pf = lattice_sim.last_passage(lattice_sim.sample_lattice(cfg.field, dims, cfg.N, s))
        formats.write_grid_csv(out / f"passage_{k}.csv", pf.L, kind="passage_field",
                               scale_N=cfg.N, seed=s)
        formats.write_grid_binary(out / f"passage_{k}.bin", pf.L)
        corners.append(float(pf.L[-1, -1]) / cfg.N)
    _meta(out, "passage_0.csv", cfg, seeds=seeds)
    return {"scaled_corners": corners}


def run_compare(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    t0 = time.perf_counter()
    vg = hjb_solver.solve(cfg.field, cfg.h, cfg.extent)
    levels = cfg.levels if cfg.levels is not None else _default_levels(vg)
    pde_sets = [level_set(vg, t) for t in levels]
    _export_levels_csv(out / "levels_pde.csv", pde_sets)

    dims = (int(round(cfg.extent[0] * cfg.N)) + 1, int(round(cfg.extent[1] * cfg.N)) + 1)
    seeds, errors, hausdorff = [], [], []
    for k in range(cfg.trials):
        s = lattice_sim.trial_seed(cfg.seed, k)
        seeds.append(s)
        pf = lattice_sim.last_passage(lattice_sim.sample_lattice(cfg.field, dims, cfg.N, s))
        sg = lattice_sim.scaled_field(pf)
        errors.append(sup_error(sg, vg))
        sim_sets = [level_set(sg, t) for t in levels]
        _export_levels_csv(out / f"levels_sim_{k}.csv", sim_sets)
        hausdorff.append([hausdorff_one_sided(a, b) for a, b in zip(sim_sets, pde_sets)])
    report = {
        "sup_error": max(errors),
        "per_trial_sup_error": errors,
        "per_level_hausdorff": hausdorff,
        "levels": levels,
        "grid_h": cfg.h,
        "sim_N": cfg.N,
        "seeds": seeds,
        "runtime_s": time.perf_counter() - t0,
    }
    formats.write_json(out / "comparison_report.json", report)
    _meta(out, "comparison_report.json", cfg, seeds=seeds)
    return report


def run_path(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    vg = hjb_solver.solve(cfg.field, cfg.h, cfg.extent)
    reports = []
    for idx, x0 in enumerate(cfg.x0):
        curve = curve_extract.extract_curve(vg, cfg.field, x0, cfg.eps, cfg.s_step)
        rep = curve_extract.certify(vg, cfg.field, curve)
        formats.write_curve_ndjson(out / f"curve_{idx}.ndjson", curve.points)
        reports.append({"x0": list(x0), "energy": rep.energy, "reference": rep.reference,
                        "gap": rep.gap, "epsilon": rep.epsilon,
                        "tolerance": rep.tolerance, "passed": rep.passed})
    # optimal lattice paths from simulations, for overlay against the curves
    dims = (int(round(cfg.extent[0] * cfg.N)) + 1, int(round(cfg.extent[1] * cfg.N)) + 1)
    seeds = []
    for k in range(cfg.trials):
        s = lattice_sim.trial_seed(cfg.seed, k)
        seeds.append(s)
        pf = lattice_sim.last_passage(lattice_sim.sample_lattice(cfg.field, dims, cfg.N, s))
        for idx, x0 in enumerate(cfg.x0):
            end = (int(round(x0[0] * cfg.N)), int(round(x0[1] * cfg.N)))
            path = lattice_sim.optimal_path(pf, end)
            formats.write_path_ndjson(out / f"sim_path_{k}_{idx}.ndjson", path)
    formats.write_json(out / "energy_reports.json", reports)
    _meta(out, "energy_reports.json", cfg, seeds=seeds)
    return {"reports": reports}


def run_tasep(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    result = {}
    if cfg.times:
        dims = (int(round(cfg.extent[0] * cfg.N)) + 1, int(round(cfg.extent[1] * cfg.N)) + 1)
        s = lattice_sim.trial_seed(cfg.seed, 0)
        pf = lattice_sim.last_passage(lattice_sim.sample_lattice(cfg.field, dims, cfg.N, s))
        for t in cfg.times:
            hp = tasep_bridge.height_function(pf, t * cfg.N)
            arr = np.column_stack([np.arange(hp.j_min, hp.j_max + 1), hp.heights])
            formats.write_grid_csv(out / f"height_t{t:g}.csv", arr.astype(float),
                                   kind="height_profile", scale_N=cfg.N, seed=s,
                                   extra={"t": f"{t:g}"})
        result["height_times"] = cfg.times
    vg = hjb_solver.solve(cfg.field, cfg.h, cfg.extent)
    ds = tasep_bridge.density_from_value(vg)
    formats.write_grid_csv(out / "density.csv", np.where(ds.defined, ds.rho, np.nan),
                           kind="density", h=cfg.h)
    sb = tasep_bridge.slow_bond_estimate(cfg.r, cfg.N, cfg.trials, cfg.seed, threads=threads)
    formats.write_json(out / "slow_bond.json", sb)
    _meta(out, "slow_bond.json", cfg, seeds=[cfg.seed])
    result["slow_bond"] = sb
    return result


def run_convergence(cfg: ExperimentConfig, out: Path, threads: int = 1) -> dict:
    h_list = cfg.h_list or [1.0 / 125, 1.0 / 250, 1.0 / 500]
    rows = convergence_study(cfg.field, h_list, cfg.extent)
    lines = ["h,sup_error,boundary_residual,runtime_s"]
    for r in rows:
        lines.append(f"{r['h']!r},{r['sup_error']!r},{r['boundary_residual']!r},{r['runtime_s']:.6f}")
    (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    _meta(out, "convergence.csv", cfg)
    return {"rows": rows}
