"""Merge independently generated block grids into one conforming hexahedral mesh."""

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import AssemblyError, ConfigError
from .geometry import HEX_FACES, FACE_TAGS, cell_center, face_normal_diagonal, hex_volume

DEFAULT_MERGE_RTOL = 1e-9
_FACE_LIST = list(HEX_FACES.items())


@dataclass(frozen=True, eq=False)
class MultiblockMesh:
    """Global node set, hex cells and classified faces.

    Faces are stored once; ``face_nodes`` runs counterclockwise seen from
    outside the owner cell, so ``face_normal`` points from owner to
    neighbor. ``face_neighbor`` is -1 on the boundary, where ``face_tag``
    reads ``"<block>:<side>"`` with side in xi0, xi1, eta0, eta1, kappa0, kappa1.
    """

    points: np.ndarray
    cells: np.ndarray
    cell_block: np.ndarray
    cell_address: np.ndarray
    cell_material: tuple
    cell_volume: np.ndarray
    cell_center: np.ndarray
    face_nodes: np.ndarray
    face_owner: np.ndarray
    face_neighbor: np.ndarray
    face_tag: tuple
    face_normal: np.ndarray
    face_center: np.ndarray
    block_names: tuple
    block_counts: tuple
    merge_gaps: dict
    merge_tol: float

    @property
    def n_nodes(self):
        return len(self.points)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_faces(self):
        return len(self.face_nodes)

    @property
    def interior(self):
        return self.face_neighbor >= 0

    @property
    def boundary(self):
        return self.face_neighbor < 0

    def interface_faces(self, a=None, b=None):
        """Indices of interior faces joining cells of two different blocks."""
        inner = self.interior
        ob = self.cell_block[self.face_owner]
        nb = np.where(inner, self.cell_block[np.maximum(self.face_neighbor, 0)], -1)
        mask = inner & (ob != nb)
        if a is not None:
            ia, ib = self.block_id(a), self.block_id(b)
            mask &= ((ob == ia) & (nb == ib)) | ((ob == ib) & (nb == ia))
        return np.flatnonzero(mask)

    def block_id(self, name):
        if isinstance(name, (int, np.integer)):
            return int(name)
        return self.block_names.index(name)

    def boundary_faces(self, tag=None):
        """Boundary face indices; ``tag`` may be "kappa0" (any block) or "L3:kappa0"."""
        idx = np.flatnonzero(self.boundary)
        if tag is None:
            return idx
        return np.array([i for i in idx if _tag_matches(self.face_tag[i], tag)], dtype=int)


def _tag_matches(face_tag, tag):
    return face_tag == tag or (":" not in tag and face_tag.split(":", 1)[1] == tag)


def _deduplicate(points, tol):
    """Representative (lowest) index for every point, merging points closer than ``tol``."""
    n = len(points)
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    rep = np.full(labels.max() + 1, n)
    np.minimum.at(rep, labels, np.arange(n))
    return rep[labels]


def assemble_multiblock(grids, merge_tol=None, names=None):
    """Merge structured grids; nodes closer than ``merge_tol`` become one.

    Interfaces must match node for node. ``merge_tol`` defaults to 1e-9
    times the bounding-box diagonal of all points.
    """
    grids = list(grids)
    if not grids:
        raise AssemblyError("nothing to assemble")
    names = tuple(names) if names is not None else tuple(g.name for g in grids)
    if len(set(names)) != len(names):
        raise AssemblyError(f"duplicate block names: {names}")

    all_pts = np.concatenate([g.points for g in grids])
    node_block = np.concatenate([np.full(len(g.points), i) for i, g in enumerate(grids)])
    offsets = np.cumsum([0] + [len(g.points) for g in grids])
    if merge_tol is None:
        diag = float(np.linalg.norm(all_pts.max(axis=0) - all_pts.min(axis=0)))
        merge_tol = DEFAULT_MERGE_RTOL * (diag if diag > 0 else 1.0)
    if not merge_tol > 0:
        raise AssemblyError(f"merge_tol must be positive, got {merge_tol}")

    rep = _deduplicate(all_pts, merge_tol)
    keep = np.unique(rep)
    global_id = np.full(len(all_pts), -1)
    global_id[keep] = np.arange(len(keep))
    node_map = global_id[rep]
    points = all_pts[keep].copy()

    gaps = {}
    moved = np.flatnonzero(rep != np.arange(len(all_pts)))
    for i in moved:
        a, b = sorted((node_block[i], node_block[rep[i]]))
        if a != b:
            d = float(np.linalg.norm(all_pts[i] - all_pts[rep[i]]))
            gaps[a, b] = max(gaps.get((a, b), 0.0), d)

    cells, cell_block, addresses, materials = [], [], [], []
    for i, g in enumerate(grids):
        cells.append(node_map[g.cell_nodes() + offsets[i]])
        n = len(cells[-1])
        cell_block.append(np.full(n, i))
        addresses.append(g.cell_addresses())
        materials.extend([g.material] * n)
    cells = np.concatenate(cells)
    cell_block = np.concatenate(cell_block)

    _check_hanging(points, cells, cell_block, names, merge_tol)
    faces = _classify_faces(cells, cell_block, names)
    corners = points[cells]
    fn = faces[0]
    normals = 0.5 * face_normal_diagonal(points[fn])
    for a in (points, cells):
        a.setflags(write=False)
    return MultiblockMesh(
        points=points,
        cells=cells,
        cell_block=cell_block,
        cell_address=np.concatenate(addresses),
        cell_material=tuple(materials),
        cell_volume=hex_volume(corners),
        cell_center=cell_center(corners),
        face_nodes=fn,
        face_owner=faces[1],
        face_neighbor=faces[2],
        face_tag=faces[3],
        face_normal=normals,
        face_center=points[fn].mean(axis=1),
        block_names=names,
        block_counts=tuple(g.counts() for g in grids),
        merge_gaps=gaps,
        merge_tol=float(merge_tol),
    )


def _classify_faces(cells, cell_block, names):
    nc = len(cells)
    local = np.array([idx for _, idx in _FACE_LIST])
    fn = cells[:, local].reshape(-1, 4)
    owner_all = np.repeat(np.arange(nc), 6)
    side_all = np.tile(np.arange(6), nc)
    keys = np.sort(fn, axis=1)
    _, first, inverse, counts = np.unique(keys, axis=0, return_index=True, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        bad = fn[first[np.argmax(counts > 2)]]
        raise AssemblyError(f"face with nodes {bad.tolist()} is shared by more than two cells")
    order = np.argsort(first, kind="stable")
    first_sorted = first[order]
    # second occurrence of each paired face
    second = np.full(len(first), -1)
    occ = np.arange(len(fn))
    not_first = occ[np.ones(len(fn), bool) & (occ != first[inverse])]
    second[inverse[not_first]] = not_first
    second = second[order]

    face_nodes = fn[first_sorted]
    owner = owner_all[first_sorted]
    neighbor = np.where(second >= 0, owner_all[np.maximum(second, 0)], -1)
    tags = []
    for k, f in enumerate(first_sorted):
        if neighbor[k] >= 0:
            tags.append("")
        else:
            key = _FACE_LIST[side_all[f]][0]
            tags.append(f"{names[cell_block[owner[k]]]}:{FACE_TAGS[key]}")
    return face_nodes, owner, neighbor, tuple(tags)


def _check_hanging(points, cells, cell_block, names, tol):
    """Reject nodes of one block that sit on another block's face without matching a node there."""
    nb = len(names)
    block_nodes = [np.unique(cells[cell_block == i]) for i in range(nb)]
    local = np.array([idx for _, idx in _FACE_LIST])
    lo = [points[n].min(axis=0) for n in block_nodes]
    hi = [points[n].max(axis=0) for n in block_nodes]
    for a, b in combinations(range(nb), 2):
        pad = tol + 1e-12
        if np.any(lo[a] > hi[b] + pad) or np.any(lo[b] > hi[a] + pad):
            continue
        for src, dst in ((a, b), (b, a)):
            cand = np.setdiff1d(block_nodes[src], block_nodes[dst], assume_unique=True)
            if len(cand) == 0:
                continue
            p = points[cand]
            inside = np.all((p >= lo[dst] - pad) & (p <= hi[dst] + pad), axis=1)
            cand, p = cand[inside], p[inside]
            if len(cand) == 0:
                continue
            faces = _block_boundary_faces(cells[cell_block == dst], local)
            hit = _points_on_quads(p, points[faces], tol)
            if hit is not None:
                gid = int(cand[hit])
                raise AssemblyError(
                    f"non-matching interface between blocks {names[src]!r} and {names[dst]!r}: "
                    f"node {gid} at {points[gid].tolist()} lies on a face of {names[dst]!r} "
                    "without a matching node"
                )


def _block_boundary_faces(block_cells, local):
    fn = block_cells[:, local].reshape(-1, 4)
    keys = np.sort(fn, axis=1)
    _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    return fn[first[counts == 1]]


def _points_on_quads(p, quads, tol, chunk=256):
    """Index of the first point lying on one of the quads (split into two triangles), or None."""
    tris = np.concatenate([quads[:, [0, 1, 2]], quads[:, [0, 2, 3]]])
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    e1, e2 = b - a, c - a
    n = np.cross(e1, e2)
    nn = np.einsum("ij,ij->i", n, n)
    ok = nn > 0
    a, e1, e2, n, nn = a[ok], e1[ok], e2[ok], n[ok], nn[ok]
    size = np.sqrt(np.maximum(np.einsum("ij,ij->i", e1, e1), np.einsum("ij,ij->i", e2, e2)))
    # curved interfaces sag away from the flat triangles; allow a small fraction of the face size
    reach = np.maximum(tol, 1e-3 * size)
    for s in range(0, len(p), chunk):
        w = p[s : s + chunk, None, :] - a[None]
        dist = np.einsum("pti,ti->pt", w, n) / np.sqrt(nn)
        # barycentric coordinates of the projection
        c1 = np.einsum("pti,ti->pt", np.cross(w, e2[None]), n) / nn
        c2 = np.einsum("pti,ti->pt", np.cross(e1[None], w), n) / nn
        eps = 1e-9
        on = (np.abs(dist) <= reach) & (c1 >= -eps) & (c2 >= -eps) & (c1 + c2 <= 1 + eps)
        rows = np.flatnonzero(on.any(axis=1))
        if len(rows):
            return s + int(rows[0])
    return None


def assign_materials(mesh, materials):
    """Return a copy of ``mesh`` whose cells carry ``materials[block name]``."""
    missing = [n for n in mesh.block_names if n not in materials]
    if missing:
        raise ConfigError(f"no material given for block(s) {missing}")
    per_block = [materials[n] for n in mesh.block_names]
    return replace(mesh, cell_material=tuple(per_block[b] for b in mesh.cell_block))


def interface_report(mesh):
    """Shared-entity accounting per touching block pair plus global totals."""
    nb = len(mesh.block_names)
    block_nodes = [set(np.unique(mesh.cells[mesh.cell_block == i]).tolist()) for i in range(nb)]
    pairs = []
    for a, b in combinations(range(nb), 2):
        shared = len(block_nodes[a] & block_nodes[b])
        if shared == 0:
            continue
        pairs.append(
            {
                "blocks": [mesh.block_names[a], mesh.block_names[b]],
                "shared_nodes": shared,
                "max_gap": mesh.merge_gaps.get((a, b), 0.0),
                "faces": int(len(mesh.interface_faces(a, b))),
            }
        )
    block_sum = [sum(c[k] for c in mesh.block_counts) for k in range(3)]
    return {
        "pairs": pairs,
        "nodes": mesh.n_nodes,
        "cells": mesh.n_cells,
        "faces": mesh.n_faces,
        "interior_faces": int(np.count_nonzero(mesh.interior)),
        "boundary_faces": int(np.count_nonzero(mesh.boundary)),
        "block_sum": {"nodes": block_sum[0], "cells": block_sum[1], "faces": block_sum[2]},
        "shared": {"nodes": block_sum[0] - mesh.n_nodes, "faces": block_sum[2] - mesh.n_faces},
    }
