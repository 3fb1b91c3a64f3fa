"""Macroscopic diagnostics of a run and their CSV time-series format."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .meshgen import PHASE_IDS, PHASE_NAMES

COLUMNS = ("t_real", "eps_x", "eps_y", "eps_z", "frac_dmg_agg", "frac_dmg_paste", "mean_eps_gel")
DEFAULT_DAMAGE_THRESHOLD = 0.05


def _corner_nodes(mesh):
    """Node id of each box corner, keyed by (i, j, k) in {0, 1}^3."""
    out = {}
    for i in (0, 1):
        for j in (0, 1):
            for k in (0, 1):
                p = np.array([i, j, k]) * np.asarray(mesh.box)
                out[(i, j, k)] = int(np.argmin(np.linalg.norm(mesh.nodes - p, axis=1)))
    return out


def edge_strain(mesh, displacement, axis, corner=(0, 0, 0)):
    """Relative length change of the box edge along ``axis`` starting at ``corner``.

    ``displacement`` is in the mesh length unit (mm).
    """
    corners = _corner_nodes(mesh)
    c0 = tuple(corner)
    c1 = list(c0)
    c1[axis] = 1 - c1[axis]
    a, b = corners[c0], corners[tuple(c1)]
    x0 = mesh.nodes[b] - mesh.nodes[a]
    x1 = x0 + displacement[b] - displacement[a]
    L0 = np.linalg.norm(x0)
    return float((np.linalg.norm(x1) - L0) / L0)


def mean_edge_strain(mesh, displacement, axis):
    """Average of :func:`edge_strain` over the four box edges parallel to ``axis``."""
    others = [a for a in range(3) if a != axis]
    vals = []
    for i in (0, 1):
        for j in (0, 1):
            c = [0, 0, 0]
            c[others[0]] = i
            c[others[1]] = j
            vals.append(edge_strain(mesh, displacement, axis, corner=c))
    return float(np.mean(vals))


def damaged_fraction(mesh, damage, phase, threshold=DEFAULT_DAMAGE_THRESHOLD):
    """Volume share of ``phase`` elements with ``D >= threshold``.

    ``phase`` is a phase id or name ("paste", "aggregate", "gel").
    """
    if isinstance(phase, str):
        if phase not in PHASE_IDS:
            raise ConfigurationError(f"unknown phase {phase!r}; expected one of {sorted(PHASE_IDS)}")
        phase = PHASE_IDS[phase]
    if phase not in PHASE_NAMES:
        raise ConfigurationError(f"unknown phase id {phase!r}")
    if not 0 < threshold <= 1:
        raise ConfigurationError("damage threshold must lie in (0, 1]")
    mask = mesh.phase == phase
    vol = mesh.element_volume[mask]
    if vol.size == 0:
        return 0.0
    return float(vol[np.asarray(damage)[mask] >= threshold].sum() / vol.sum())


@dataclass
class TimeSeries:
    rows: list = field(default_factory=list)

    def append(self, row):
        if len(row) != len(COLUMNS):
            raise ValueError(f"row needs {len(COLUMNS)} values")
        if self.rows and not row[0] > self.rows[-1][0]:
            raise ValueError("t_real must increase strictly")
        self.rows.append(tuple(float(x) for x in row))

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, name):
        return self.column(name)

    def column(self, name):
        j = COLUMNS.index(name)
        return np.array([r[j] for r in self.rows])

    @property
    def t(self):
        return self.column("t_real")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([repr(x) for x in r])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = tuple(next(rd))
            if header != COLUMNS:
                raise ConfigurationError(f"{path}: unexpected columns {header}")
            ts = cls()
            for r in rd:
                ts.rows.append(tuple(float(x) for x in r))
        return ts


def record_row(solver, threshold=DEFAULT_DAMAGE_THRESHOLD):
    mesh = solver.mesh
    u = solver.displacement_mm
    has_gel = bool(np.any(mesh.phase == PHASE_IDS["gel"]))
    return (solver.t_real,
            mean_edge_strain(mesh, u, 0),
            mean_edge_strain(mesh, u, 1),
            mean_edge_strain(mesh, u, 2),
            damaged_fraction(mesh, solver.D, "aggregate", threshold),
            damaged_fraction(mesh, solver.D, "paste", threshold),
            solver.eps_gel if has_gel else 0.0)


def normalized(values):
    """Curve divided by its final value (ends at exactly 1)."""
    v = np.asarray(values, dtype=float)
    if v[-1] == 0:
        raise ValueError("cannot normalize a curve ending at zero")
    out = v / v[-1]
    out[-1] = 1.0
    return out


def expansion_split(with_damage, elastic_only, axis="eps_z"):
    """(elastic share, damage share) of the final expansion.

    Both arguments are TimeSeries from runs that differ only in the damage
    switch. Returns ``None`` when the damaged run did not expand.
    """
    ta, tb = with_damage.t, elastic_only.t
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=1e-12, atol=0):
        raise ConfigurationError("expansion_split: runs are not sampled on the same times")
    ga, gb = with_damage.column("mean_eps_gel"), elastic_only.column("mean_eps_gel")
    if not np.allclose(ga, gb, rtol=1e-12, atol=0):
        raise ConfigurationError("expansion_split: runs have different gel kinetics")
    total = with_damage.column(axis)[-1]
    if total == 0 or not math.isfinite(total):
        return None
    share = elastic_only.column(axis)[-1] / total
    return share, 1.0 - share


# -- curve shape descriptors used by the sensitivity studies ---------------

def knee_time(t, y):
    """Breakpoint of the best continuous two-segment linear fit of ``y(t)``.

    Candidate breakpoints are the interior sample times; returns
    ``(t_knee, slope_before, slope_after)``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    best = (math.inf, None)
    for k in range(2, len(t) - 2):
        tk = t[k]
        X = np.column_stack([np.ones_like(t), np.minimum(t - tk, 0.0), np.maximum(t - tk, 0.0)])
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        r = float(np.sum((X @ coef - y) ** 2))
        if r < best[0]:
            best = (r, (tk, coef[1], coef[2]))
    return best[1]


def window_slopes(t, y, window):
    """Least-squares slope over each trailing window of duration ``window``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for j in range(len(t)):
        m = (t >= t[j] - window) & (t <= t[j])
        if t[j] - t[0] < window * (1 - 1e-9) or m.sum() < 2:
            continue
        out.append((t[j], np.polyfit(t[m], y[m], 1)[0]))
    return np.array(out)


def first_crossing(t, y, level):
    """First sample time with ``y >= level``, or ``None``."""
    idx = np.flatnonzero(np.asarray(y) >= level)
    return float(np.asarray(t)[idx[0]]) if idx.size else None
