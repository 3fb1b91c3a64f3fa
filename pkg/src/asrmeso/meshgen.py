"""Structured tetrahedral meshes of the specimen box and phase assignment.

Each cubic cell is split into the six Kuhn tetrahedra that share the
cell diagonal from its (0,0,0) to its (1,1,1) corner. Every cell uses the
same pattern, so neighbouring cells match face to face and every element
has volume h^3 / 6.
"""

import itertools
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError

log = logging.getLogger(__name__)

PASTE, AGGREGATE, GEL = 0, 1, 2
PHASE_NAMES = {PASTE: "paste", AGGREGATE: "aggregate", GEL: "gel"}
PHASE_IDS = {v: k for k, v in PHASE_NAMES.items()}


def _kuhn_pattern():
    """Local corner indices (bit i = offset along axis i) of the six tets."""
    tets = []
    for perm in itertools.permutations(range(3)):
        corner = [0, 0, 0]
        path = [0]
        for ax in perm:
            corner[ax] = 1
            path.append(corner[0] + 2 * corner[1] + 4 * corner[2])
        tets.append(path)
    return np.array(tets)


KUHN_TETS = _kuhn_pattern()


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray            # (n_nodes, 3) mm
    elements: np.ndarray         # (n_el, 4) node ids
    phase: np.ndarray            # (n_el,) int8
    element_volume: np.ndarray   # (n_el,) mm^3
    h: float                     # characteristic element size, mm
    box: tuple
    divisions: tuple = (0, 0, 0)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def centroids(self):
        return self.nodes[self.elements].mean(axis=1)

    def phase_volume(self, phase):
        return float(self.element_volume[self.phase == phase].sum())

    def phase_fraction(self, phase):
        return self.phase_volume(phase) / float(self.element_volume.sum())

    def with_phase(self, phase):
        phase = np.asarray(phase, dtype=np.int8)
        if phase.shape != (self.n_elements,):
            raise ConfigurationError("phase array length must equal the element count")
        return replace(self, phase=phase)

    def with_gel(self, ids):
        ph = self.phase.copy()
        ph[np.asarray(ids, dtype=np.int64)] = GEL
        return replace(self, phase=ph)

    def min_altitude(self):
        """Smallest vertex-to-opposite-face distance over all elements (mm)."""
        x = self.nodes[self.elements]
        best = np.inf
        for a in range(4):
            f = [b for b in range(4) if b != a]
            n = np.cross(x[:, f[1]] - x[:, f[0]], x[:, f[2]] - x[:, f[0]])
            area2 = np.linalg.norm(n, axis=1)
            alt = 6.0 * self.element_volume / area2
            best = min(best, float(alt.min()))
        return best


def signed_volumes(nodes, elements):
    x = nodes[elements]
    a = x[:, 1] - x[:, 0]
    b = x[:, 2] - x[:, 0]
    c = x[:, 3] - x[:, 0]
    return np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0


def build_grid_mesh(box, h):
    """Uniform Kuhn-tetrahedral mesh of ``box`` (mm) with target edge ``h``.

    When a box side is not a multiple of ``h`` the division count is
    rounded and the cell edge stretched to fit; a warning reports it.
    """
    if not h > 0:
        raise ConfigurationError(f"mesh: element size must be positive, got {h}")
    box = tuple(float(b) for b in box)
    if len(box) != 3 or min(box) <= 0:
        raise ConfigurationError(f"mesh: bad box {box}")
    n = tuple(max(1, int(round(b / h))) for b in box)
    edges = tuple(b / k for b, k in zip(box, n))
    if any(abs(e - h) > 1e-9 * h for e in edges):
        log.warning("mesh: box %s is not a multiple of h=%g; cell edges set to %s", box, h, edges)
    nx, ny, nz = n
    gx, gy, gz = (np.linspace(0.0, b, k + 1) for b, k in zip(box, n))
    X, Y, Z = np.meshgrid(gx, gy, gz, indexing="ij")
    # node id = i + (nx+1) * (j + (ny+1) * k)
    nodes = np.column_stack([X.transpose(2, 1, 0).ravel(),
                             Y.transpose(2, 1, 0).ravel(),
                             Z.transpose(2, 1, 0).ravel()])
    ci, cj, ck = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    ci, cj, ck = (a.transpose(2, 1, 0).ravel() for a in (ci, cj, ck))
    corner = np.empty((ci.size, 8), dtype=np.int64)
    for bits in range(8):
        di, dj, dk = bits & 1, (bits >> 1) & 1, (bits >> 2) & 1
        corner[:, bits] = (ci + di) + (nx + 1) * ((cj + dj) + (ny + 1) * (ck + dk))
    elements = corner[:, KUHN_TETS].reshape(-1, 4)
    vol = signed_volumes(nodes, elements)
    neg = vol < 0
    elements[neg] = elements[neg][:, [0, 2, 1, 3]]
    vol = np.abs(vol)
    h_char = float(np.cbrt(6.0 * vol.mean()))
    return Mesh(nodes=nodes, elements=elements, phase=np.zeros(len(elements), dtype=np.int8),
                element_volume=vol, h=h_char, box=box, divisions=n)


def assign_phases(mesh, structure):
    """Label an element aggregate when its centroid lies inside a sphere.

    Gel labels are cleared. The discrete aggregate fraction is available
    as ``mesh.phase_fraction(AGGREGATE)``.
    """
    if not np.allclose(mesh.box, structure.box):
        raise ConfigurationError(f"assign_phases: mesh box {mesh.box} != structure box {structure.box}")
    phase = np.full(mesh.n_elements, PASTE, dtype=np.int8)
    if structure.spheres:
        tree = cKDTree(mesh.centroids())
        for c, d in zip(structure.centers, structure.diameters):
            idx = tree.query_ball_point(c, 0.5 * d)
            phase[idx] = AGGREGATE
    return mesh.with_phase(phase)


def facet_counts(mesh):
    """Map of sorted triangle -> number of elements sharing it."""
    faces = np.concatenate([mesh.elements[:, [1, 2, 3]], mesh.elements[:, [0, 2, 3]],
                            mesh.elements[:, [0, 1, 3]], mesh.elements[:, [0, 1, 2]]])
    faces = np.sort(faces, axis=1)
    uniq, counts = np.unique(faces, axis=0, return_counts=True)
    return uniq, counts


def boundary_facets(mesh, axis, value, tol=1e-9):
    """Element faces lying on the plane x[axis] == value, as (n, 3) node ids."""
    on = np.abs(mesh.nodes[:, axis] - value) <= tol * max(1.0, abs(value))
    faces = []
    for a in range(4):
        f = mesh.elements[:, [b for b in range(4) if b != a]]
        faces.append(f[on[f].all(axis=1)])
    return np.concatenate(faces)
