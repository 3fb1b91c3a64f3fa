"""Legacy ASCII VTK unstructured-grid output (tetrahedra only)."""

import numpy as np

VTK_TETRA = 10


def write_vtk(path, mesh, cell_data=None, point_data=None, title="asrmeso"):
    """Write ``mesh`` with optional per-cell and per-node arrays.

    ``cell_data`` / ``point_data`` map names to arrays; 1-D arrays become
    SCALARS, (n, 3) arrays become VECTORS. Integer arrays are written as int.
    """
    cell_data = {"phase": mesh.phase} if cell_data is None else cell_data
    n_el = mesh.n_elements
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title.replace("\n", " ")[:255] + "\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {mesh.n_nodes} double\n")
        np.savetxt(fh, mesh.nodes, fmt="%.10g")
        fh.write(f"CELLS {n_el} {5 * n_el}\n")
        np.savetxt(fh, np.column_stack([np.full(n_el, 4), mesh.elements]), fmt="%d")
        fh.write(f"CELL_TYPES {n_el}\n")
        np.savetxt(fh, np.full(n_el, VTK_TETRA), fmt="%d")
        if cell_data:
            fh.write(f"CELL_DATA {n_el}\n")
            for name, arr in cell_data.items():
                _write_array(fh, name, np.asarray(arr), n_el)
        if point_data:
            fh.write(f"POINT_DATA {mesh.n_nodes}\n")
            for name, arr in point_data.items():
                _write_array(fh, name, np.asarray(arr), mesh.n_nodes)


def _write_array(fh, name, arr, n):
    if arr.shape[0] != n:
        raise ValueError(f"vtk: array {name!r} has {arr.shape[0]} entries, expected {n}")
    is_int = np.issubdtype(arr.dtype, np.integer)
    fmt = "%d" if is_int else "%.10g"
    if arr.ndim == 1:
        fh.write(f"SCALARS {name} {'int' if is_int else 'double'} 1\nLOOKUP_TABLE default\n")
        np.savetxt(fh, arr, fmt=fmt)
    elif arr.ndim == 2 and arr.shape[1] == 3:
        fh.write(f"VECTORS {name} {'int' if is_int else 'double'}\n")
        np.savetxt(fh, arr, fmt=fmt)
    else:
        raise ValueError(f"vtk: array {name!r} must be (n,) or (n, 3)")


def read_vtk_cell_data(path):
    """Minimal reader for files written by :func:`write_vtk` (cell scalars only)."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    out = {}
    i = 0
    n_cells = None
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("CELL_DATA"):
            n_cells = int(line.split()[1])
        elif line.startswith("POINT_DATA"):
            n_cells = None
        elif line.startswith("SCALARS") and n_cells is not None:
            name, dtype = line.split()[1:3]
            vals = tokens[i + 2:i + 2 + n_cells]
            conv = int if dtype == "int" else float
            out[name] = np.array([conv(v) for v in vals])
            i += 1 + n_cells
        i += 1
    return out
