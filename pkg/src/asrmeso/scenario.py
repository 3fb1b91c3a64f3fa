"""End-to-end runs: structure -> mesh -> preload -> timed phase -> outputs."""

import json
import logging
import math
import platform
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import config as C
from .errors import ConfigurationError, NumericalFailure
from .meshgen import AGGREGATE, GEL, PASTE, assign_phases, build_grid_mesh
from .mesogen import MesoStructure, pack, read_structure, seed_gel_elements, write_structure
from .observables import COLUMNS, TimeSeries, record_row
from .solver import ExplicitSolver
from .vtk import write_vtk

log = logging.getLogger(__name__)

MANIFEST_FORMAT = "asrmeso-manifest"


@dataclass
class Specimen:
    structure: MesoStructure
    mesh: object


@dataclass
class RunResult:
    series: TimeSeries
    solver: ExplicitSolver
    specimen: Specimen
    manifest: dict


def build_specimen(res):
    """Pack (or read) the aggregates, mesh the box and seed the gel."""
    cfg = res.cfg
    path = C.get(cfg, "geometry.structure_file")
    if not res.aggregates:
        structure = MesoStructure.empty(res.box, seed=res.seed)
    elif path:
        structure = read_structure(path)
        if any(abs(a - b) > 1e-9 for a, b in zip(structure.box, res.box)):
            raise ConfigurationError(f"{path}: box {structure.box} differs from geometry.box {res.box}")
    else:
        structure = pack(res.curve, res.box, res.seed,
                         clearance=float(C.get(cfg, "geometry.clearance")),
                         max_rejects=int(C.get(cfg, "geometry.max_rejects")))
    mesh = assign_phases(build_grid_mesh(res.box, res.h), structure)
    if res.aggregates and res.gel_ratio > 0:
        mesh = mesh.with_gel(seed_gel_elements(mesh, res.gel_ratio, res.gel_seed))
    return Specimen(structure, mesh)


def summary(specimen):
    m = specimen.mesh
    return {
        "spheres": len(specimen.structure.spheres),
        "v_agg_spheres": specimen.structure.achieved_v_agg,
        "v_agg_elements": m.phase_fraction(AGGREGATE) + m.phase_fraction(GEL),
        "gel_to_aggregate": (m.phase_volume(GEL) / (m.phase_volume(AGGREGATE) + m.phase_volume(GEL))
                             if m.phase_volume(GEL) > 0 else 0.0),
        "n_nodes": m.n_nodes,
        "n_elements": m.n_elements,
        "n_paste": int(np.sum(m.phase == PASTE)),
        "n_aggregate": int(np.sum(m.phase == AGGREGATE)),
        "n_gel": int(np.sum(m.phase == GEL)),
    }


def _snapshot(path, solver):
    m = solver.mesh
    eps_gel = np.where(m.phase == GEL, solver.eps_gel, 0.0)
    write_vtk(path, m, cell_data={"D": solver.D, "phase": m.phase, "eps_gel": eps_gel},
              point_data={"u_mm": solver.displacement_mm},
              title=f"asrmeso t_real={solver.t_real:.6g}")


def make_manifest(cfg, res, solver, specimen):
    return {
        "format": MANIFEST_FORMAT,
        "version": __version__,
        "config_hash": C.config_hash(cfg),
        "seed": res.seed,
        "gel_seed": res.gel_seed,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "dt": solver.dt,
        "dt_real": solver.dt_real,
        "n_steps": solver.n_steps,
        "damping": solver.damping,
        "record_every": solver.record_every,
        "eps_ult": {"paste": solver.materials.paste.eps_ult,
                    "aggregate": solver.materials.aggregate.eps_ult},
        "specimen": summary(specimen),
        "config": cfg,
    }


def _check_monotone(series):
    # damage is irreversible, so damaged fractions can never drop
    prev, cur = series.rows[-2], series.rows[-1]
    for j in (4, 5):
        if cur[j] < prev[j]:
            raise NumericalFailure(f"damaged fraction {COLUMNS[j]} decreased at t_real={cur[0]:.6g}")


def run_scenario(cfg, out_dir=None, progress=None, specimen=None):
    """Run the configured scenario and return a :class:`RunResult`.

    ``cfg`` is a configuration dict (see :mod:`asrmeso.config`). When
    ``out_dir`` (or ``output.dir``) is set, the series CSV, a manifest,
    the structure file, a phase mesh and optional VTK snapshots are
    written there. ``progress(t_real, eps_z)`` is called every
    ``output.progress_every`` records.
    """
    res = C.build(cfg)
    out_dir = out_dir or C.get(cfg, "output.dir") or None
    specimen = specimen or build_specimen(res)
    solver = ExplicitSolver(specimen.mesh, res.materials, res.solver, res.bcs)
    threshold = float(C.get(cfg, "output.damage_threshold"))
    n_snap = int(C.get(cfg, "output.snapshots"))
    every_progress = int(C.get(cfg, "output.progress_every"))

    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_structure(out / "structure.txt", specimen.structure)
        write_vtk(out / "mesh.vtk", specimen.mesh)

    t_wall = time.perf_counter()
    solver.preload()
    series = TimeSeries()
    series.append(record_row(solver, threshold))
    snap_steps = set()
    if out_dir and n_snap > 0:
        snap_steps = {max(1, round(solver.n_steps * (k + 1) / n_snap)) for k in range(n_snap)}
        _snapshot(out / "snapshot_0000.vtk", solver)
    n_rec = 0
    for n in range(1, solver.n_steps + 1):
        solver.step()
        last = n == solver.n_steps
        if n % solver.record_every == 0 or last:
            solver.check_finite()
            series.append(record_row(solver, threshold))
            _check_monotone(series)
            n_rec += 1
            if progress and every_progress and (n_rec % every_progress == 0 or last):
                progress(solver.t_real, series.rows[-1][3])
        if n in snap_steps:
            _snapshot(out / f"snapshot_{n:07d}.vtk", solver)
    wall = time.perf_counter() - t_wall

    manifest = make_manifest(cfg, res, solver, specimen)
    manifest["wall_seconds"] = wall
    if out_dir:
        series.write_csv(out / "series.csv")
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    log.info("run finished in %.1f s (%d steps)", wall, solver.n_steps)
    return RunResult(series, solver, specimen, manifest)


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return str(x)
