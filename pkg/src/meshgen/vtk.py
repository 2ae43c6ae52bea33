"""Legacy ASCII VTK output of a hexahedral mesh with cell data."""

import numpy as np

VTK_HEXAHEDRON = 12
# our corner k (see geometry) goes to VTK slot VTK_ORDER.index(k); VTK wants
# the bottom quad counterclockwise, then the top quad
VTK_ORDER = (0, 1, 3, 2, 4, 5, 7, 6)


def _num(x):
    return format(float(x), ".17g")


def material_ids(mesh):
    """Stable integer id per material, in order of first appearance."""
    names = list(dict.fromkeys(mesh.cell_material))
    lookup = {n: i for i, n in enumerate(names)}
    return names, np.array([lookup[m] for m in mesh.cell_material], dtype=int)


def export_vtk(mesh, path, fields=None, title=None):
    """Write ``mesh`` to ``path``.

    ``fields`` maps extra cell-data names to per-cell arrays (e.g. pressure).
    Material, block and volume are always written. Output depends only on
    the inputs, so identical meshes give byte-identical files.
    """
    names, mat = material_ids(mesh)
    legend = " ".join(f"{i}={n}" for i, n in enumerate(names))
    head = title or "meshgen"
    lines = [
        "# vtk DataFile Version 3.0",
        f"{head}; materials: {legend}"[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_nodes} double",
    ]
    lines.extend(" ".join(_num(c) for c in p) for p in mesh.points)
    nc = mesh.n_cells
    lines.append(f"CELLS {nc} {9 * nc}")
    vtk_cells = mesh.cells[:, list(VTK_ORDER)]
    lines.extend("8 " + " ".join(str(int(i)) for i in c) for c in vtk_cells)
    lines.append(f"CELL_TYPES {nc}")
    lines.extend([str(VTK_HEXAHEDRON)] * nc)
    lines.append(f"CELL_DATA {nc}")

    def scalars(name, values, kind):
        lines.append(f"SCALARS {name} {kind} 1")
        lines.append("LOOKUP_TABLE default")
        if kind == "int":
            lines.extend(str(int(v)) for v in values)
        else:
            lines.extend(_num(v) for v in values)

    scalars("material", mat, "int")
    scalars("block", mesh.cell_block, "int")
    scalars("volume", mesh.cell_volume, "double")
    for name, values in (fields or {}).items():
        values = np.asarray(values, dtype=float)
        if values.shape != (nc,):
            raise ValueError(f"field {name!r} has shape {values.shape}, expected ({nc},)")
        scalars(name, values, "double")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk_cell_data(path):
    """Minimal reader for files written by :func:`export_vtk` (used by tests and tools)."""
    with open(path, encoding="ascii") as fh:
        tokens = fh.read().split("\n")
    out = {"points": None, "cells": None, "types": None, "cell_data": {}}
    i = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("POINTS"):
            n = int(line.split()[1])
            out["points"] = np.array([[float(x) for x in tokens[i + 1 + k].split()] for k in range(n)])
            i += n
        elif line.startswith("CELLS"):
            n = int(line.split()[1])
            out["cells"] = np.array([[int(x) for x in tokens[i + 1 + k].split()[1:]] for k in range(n)])
            i += n
        elif line.startswith("CELL_TYPES"):
            n = int(line.split()[1])
            out["types"] = np.array([int(tokens[i + 1 + k]) for k in range(n)])
            i += n
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            n = len(out["types"])
            out["cell_data"][name] = np.array([float(tokens[i + 2 + k]) for k in range(n)])
            i += n + 1
        i += 1
    return out
