"""Random sphere packings graded by a truncated Fuller curve.

All lengths are in millimetres. Randomness comes from numpy's PCG64 bit
generator seeded with the user's integer, so a seed reproduces the same
packing on any platform.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PackingSaturationError

STRUCTURE_FORMAT = "asrmeso-structure"
STRUCTURE_VERSION = 1


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class SieveCurve:
    d_min: float
    d_max: float
    n_f: float
    v0_agg: float

    def __post_init__(self):
        if not 0 < self.d_min < self.d_max:
            raise ConfigurationError(f"sieve curve: need 0 < d_min < d_max, got {self.d_min}, {self.d_max}")
        if not self.n_f > 0:
            raise ConfigurationError("sieve curve: Fuller exponent must be positive")
        if not 0 < self.v0_agg < 1:
            raise ConfigurationError("sieve curve: v0_agg must lie in (0, 1)")

    @classmethod
    def from_target_fraction(cls, d_min, d_max, n_f, v_agg):
        """Curve whose simulated fraction equals ``v_agg``."""
        return cls(d_min, d_max, n_f, v_agg / (1.0 - (d_min / d_max) ** n_f))

    def passing(self, d):
        """Fuller passing fraction (d / d_max)^n_f."""
        return (np.asarray(d, dtype=float) / self.d_max) ** self.n_f

    @property
    def v_agg(self):
        return (1.0 - (self.d_min / self.d_max) ** self.n_f) * self.v0_agg


def sample_diameter(curve, u):
    """Invert the sieve curve: P(d) is uniform on [P(d_min), 1]."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ConfigurationError("sample_diameter: u must lie in [0, 1]")
    p_min = (curve.d_min / curve.d_max) ** curve.n_f
    d = curve.d_max * (u * (1.0 - p_min) + p_min) ** (1.0 / curve.n_f)
    d = np.clip(d, curve.d_min, curve.d_max)
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class Sphere:
    center: tuple
    diameter: float

    @property
    def radius(self):
        return 0.5 * self.diameter

    @property
    def volume(self):
        return math.pi / 6.0 * self.diameter**3


@dataclass(frozen=True)
class MesoStructure:
    box: tuple
    spheres: tuple
    seed: int
    curve: SieveCurve | None = None
    clearance: float = 0.0
    achieved_v_agg: float = field(default=0.0)

    @property
    def box_volume(self):
        return float(np.prod(self.box))

    @property
    def centers(self):
        return np.array([s.center for s in self.spheres], dtype=float).reshape(-1, 3)

    @property
    def diameters(self):
        return np.array([s.diameter for s in self.spheres], dtype=float)

    def sphere_fraction(self):
        return float(np.sum(math.pi / 6.0 * self.diameters**3) / self.box_volume)

    @classmethod
    def empty(cls, box, seed=0):
        return cls(box=tuple(float(b) for b in box), spheres=(), seed=seed)


class _CellGrid:
    """Uniform hash grid over placed spheres for neighbour queries."""

    def __init__(self, box, cell):
        self.cell = cell
        self.shape = tuple(max(1, int(math.ceil(b / cell))) for b in box)
        self.bins = {}

    def _key(self, p):
        return tuple(min(int(p[i] // self.cell), self.shape[i] - 1) for i in range(3))

    def add(self, idx, p):
        self.bins.setdefault(self._key(p), []).append(idx)

    def near(self, p, reach):
        n = int(math.ceil(reach / self.cell))
        k = self._key(p)
        for i in range(max(0, k[0] - n), min(self.shape[0], k[0] + n + 1)):
            for j in range(max(0, k[1] - n), min(self.shape[1], k[1] + n + 1)):
                for l in range(max(0, k[2] - n), min(self.shape[2], k[2] + n + 1)):
                    yield from self.bins.get((i, j, l), ())


def pack(curve, box, seed, clearance=0.0, max_rejects=100_000):
    """Place non-overlapping spheres until the target aggregate fraction is met.

    Diameters are drawn first (until their volume crosses the target),
    then placed largest-first by uniform rejection sampling, each sphere
    kept fully inside the box and at least ``clearance`` from the others.
    """
    box = tuple(float(b) for b in box)
    if len(box) != 3 or min(box) < curve.d_max:
        raise ConfigurationError(f"pack: box {box} must be at least d_max={curve.d_max} in every direction")
    if clearance < 0:
        raise ConfigurationError("pack: clearance must be non-negative")
    rng = make_rng(seed)
    v_box = float(np.prod(box))
    target = curve.v_agg * v_box

    diameters = []
    total = 0.0
    while total < target:
        d = sample_diameter(curve, rng.random())
        diameters.append(d)
        total += math.pi / 6.0 * d**3
    diameters.sort(reverse=True)

    lo = np.zeros(3)
    hi = np.asarray(box)
    grid = _CellGrid(box, curve.d_max + clearance)
    centers = []
    radii = []
    placed_volume = 0.0
    for d in diameters:
        r = 0.5 * d
        rejects = 0
        while True:
            c = lo + r + rng.random(3) * (hi - lo - 2.0 * r)
            ok = True
            for j in grid.near(c, r + 0.5 * curve.d_max + clearance):
                gap = r + radii[j] + clearance
                dx = c - centers[j]
                if dx @ dx < gap * gap:
                    ok = False
                    break
            if ok:
                break
            rejects += 1
            if rejects >= max_rejects:
                frac = placed_volume / v_box
                raise PackingSaturationError(
                    f"packing saturated after {rejects} consecutive rejections "
                    f"at aggregate fraction {frac:.4f} (target {curve.v_agg:.4f})", frac)
        grid.add(len(centers), c)
        centers.append(c)
        radii.append(r)
        placed_volume += math.pi / 6.0 * d**3

    spheres = tuple(Sphere(tuple(float(x) for x in c), float(2 * r)) for c, r in zip(centers, radii))
    return MesoStructure(box=box, spheres=spheres, seed=int(seed), curve=curve,
                         clearance=float(clearance), achieved_v_agg=placed_volume / v_box)


def seed_gel_elements(mesh, target_ratio, seed):
    """Pick gel elements among the aggregate elements.

    Walks a seeded random permutation of aggregate elements and returns
    the shortest prefix whose volume reaches ``target_ratio`` of the
    aggregate volume, as a sorted index array. The mesh itself is not
    modified; use ``mesh.with_gel(ids)`` to relabel.
    """
    from .meshgen import AGGREGATE

    if not 0 < target_ratio < 1:
        raise ConfigurationError(f"gel seeding: target ratio must lie in (0, 1), got {target_ratio}")
    agg = np.flatnonzero(mesh.phase == AGGREGATE)
    if agg.size == 0:
        raise ConfigurationError("gel seeding: mesh has no aggregate elements")
    order = agg[make_rng(seed).permutation(agg.size)]
    vols = mesh.element_volume[order]
    cum = np.cumsum(vols)
    need = target_ratio * cum[-1]
    # tolerate round-off in the cumulative sum
    k = int(np.searchsorted(cum, need * (1.0 - 1e-12), side="left")) + 1
    return np.sort(order[:k])


def write_structure(path, structure):
    """Write the versioned text format (one ``cx cy cz d`` line per sphere)."""
    c = structure.curve
    lines = [
        f"# {STRUCTURE_FORMAT} {STRUCTURE_VERSION}",
        f"box {structure.box[0]!r} {structure.box[1]!r} {structure.box[2]!r}",
        f"seed {structure.seed}",
        f"clearance {structure.clearance!r}",
    ]
    if c is not None:
        lines.append(f"curve {c.d_min!r} {c.d_max!r} {c.n_f!r} {c.v0_agg!r}")
    lines.append(f"achieved_v_agg {structure.achieved_v_agg!r}")
    lines.append(f"spheres {len(structure.spheres)}")
    lines.append("# cx cy cz d")
    for s in structure.spheres:
        lines.append(f"{s.center[0]!r} {s.center[1]!r} {s.center[2]!r} {s.diameter!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_structure(path):
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    header = rows[0].split()
    if header[:2] != ["#", STRUCTURE_FORMAT]:
        raise ConfigurationError(f"{path}: not a {STRUCTURE_FORMAT} file")
    if int(header[2]) > STRUCTURE_VERSION:
        raise ConfigurationError(f"{path}: format version {header[2]} is newer than supported")
    meta = {}
    spheres = []
    n_expected = None
    for ln in rows[1:]:
        if ln.startswith("#"):
            continue
        parts = ln.split()
        if n_expected is not None:
            cx, cy, cz, d = map(float, parts)
            spheres.append(Sphere((cx, cy, cz), d))
            continue
        key, vals = parts[0], parts[1:]
        meta[key] = vals
        if key == "spheres":
            n_expected = int(vals[0])
    if n_expected is None or len(spheres) != n_expected:
        raise ConfigurationError(f"{path}: expected {n_expected} sphere lines, found {len(spheres)}")
    curve = SieveCurve(*map(float, meta["curve"])) if "curve" in meta else None
    return MesoStructure(
        box=tuple(map(float, meta["box"])),
        spheres=tuple(spheres),
        seed=int(meta["seed"][0]),
        curve=curve,
        clearance=float(meta.get("clearance", ["0"])[0]),
        achieved_v_agg=float(meta.get("achieved_v_agg", ["0"])[0]),
    )
