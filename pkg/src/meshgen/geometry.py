"""Cell volumes, face normals and centers for hexahedral cells.

Corner numbering (0-based here, 1..8 in the usual figure) in local (xi, eta, kappa):

    0=(0,0,0) 1=(1,0,0) 2=(0,1,0) 3=(1,1,0) 4=(0,0,1) 5=(1,0,1) 6=(0,1,1) 7=(1,1,1)
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCellWarning, DomainError
from .projectors import axis_index
from .tfi import covariant_vector

# two prisms {0,1,3,4,5,7} and {0,2,3,4,6,7}, three tets each; the second mirrors the first
HEX_TETS = ((0, 1, 3, 4), (1, 3, 4, 5), (3, 4, 5, 7), (0, 2, 3, 4), (2, 3, 4, 6), (3, 4, 6, 7))

# outward cyclic corner order per face, keyed by (axis, side)
HEX_FACES = {
    ("xi", 0): (0, 4, 6, 2),
    ("xi", 1): (1, 3, 7, 5),
    ("eta", 0): (0, 1, 5, 4),
    ("eta", 1): (2, 6, 7, 3),
    ("kappa", 0): (0, 2, 3, 1),
    ("kappa", 1): (4, 5, 7, 6),
}
FACE_TAGS = {key: f"{key[0]}{key[1]}" for key in HEX_FACES}

DEGENERATE_RTOL = 1e-14


@dataclass(frozen=True)
class HexCell:
    corners: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=float)
        if c.shape != (8, 3) or not np.all(np.isfinite(c)):
            raise ValueError("a hex cell needs 8 finite corners")
        object.__setattr__(self, "corners", c)

    def volume(self):
        return hex_volume(self)

    def center(self):
        return cell_center(self)


@dataclass(frozen=True)
class FaceGeometry:
    """Area-weighted outward normal (length = face area), center and corner ids."""

    normal: np.ndarray
    center: np.ndarray
    corners: tuple

    @property
    def area(self):
        return float(np.linalg.norm(self.normal))

    def unit_normal(self):
        return unit_normal(self.normal)


def _corners(c):
    return c.corners if isinstance(c, HexCell) else np.asarray(c, dtype=float)


def _triple(a, b, c, d):
    a = np.asarray(a, dtype=float)
    v1 = np.asarray(b, dtype=float) - a
    v2 = np.asarray(c, dtype=float) - a
    v3 = np.asarray(d, dtype=float) - a
    return np.abs(np.einsum("...i,...i->...", v1, np.cross(v2, v3)))


def tet_volume(a, b, c, d):
    """Unsigned tetrahedron volume |V1 . (V2 x V3)| / 6 with edges from ``a``."""
    return _triple(a, b, c, d) / 6.0


def _tet_triples(c):
    return np.stack([_triple(c[..., i, :], c[..., j, :], c[..., k, :], c[..., m, :]) for i, j, k, m in HEX_TETS], axis=-1)


def tet_volumes(corners):
    """(..., 6) volumes of the six tets of each cell in ``corners`` (..., 8, 3)."""
    return _tet_triples(_corners(corners)) / 6.0


def hex_volume(cell):
    """Sum of the six tet volumes. Works on one cell or a stack of cells.

    Emits :class:`DegenerateCellWarning` if any tet has (numerically) zero volume.
    """
    c = _corners(cell)
    # six times each tet volume; divide once so that a unit cube is exactly 1
    tv = _tet_triples(c)
    span = np.ptp(c, axis=-2).max(axis=-1)
    degenerate = tv <= 6.0 * DEGENERATE_RTOL * span[..., None] ** 3
    if np.any(degenerate):
        n = int(np.count_nonzero(np.any(degenerate, axis=-1)))
        warnings.warn(f"{n} cell(s) contain a degenerate tetrahedron", DegenerateCellWarning, stacklevel=2)
    vol = tv.sum(axis=-1) / 6.0
    return float(vol) if vol.ndim == 0 else vol


def face_normal_diagonal(q):
    """Cross product of the diagonals of a quad given in cyclic order.

    The length is twice the area for a planar quad; degenerate quads give zero.
    """
    q = np.asarray(q, dtype=float)
    return np.cross(q[..., 2, :] - q[..., 0, :], q[..., 3, :] - q[..., 1, :])


def unit_normal(n):
    n = np.asarray(n, dtype=float)
    length = np.linalg.norm(n, axis=-1, keepdims=True)
    return np.divide(n, length, out=np.zeros_like(n), where=length > 0)


def cell_center(cell):
    return _corners(cell).mean(axis=-2)


def cell_faces(cell):
    """The six :class:`FaceGeometry` records of a cell in ``HEX_FACES`` order."""
    c = _corners(cell)
    out = []
    for idx in HEX_FACES.values():
        q = c[list(idx)]
        out.append(FaceGeometry(0.5 * face_normal_diagonal(q), q.mean(axis=0), idx))
    return out


def cell_face_normals(corners):
    """(..., 6, 3) area-weighted outward normals of every cell in ``corners``."""
    c = _corners(corners)
    return np.stack([0.5 * face_normal_diagonal(c[..., list(idx), :]) for idx in HEX_FACES.values()], axis=-2)


_TANGENTS = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def face_normal_covariant(b, xi, eta, kappa, face_axis):
    """Normal of the constant-``face_axis`` surface through a point of block ``b``.

    Cross product of the two covariant vectors tangent to the face, taken in
    cyclic order so it points toward increasing ``face_axis`` for a
    right-handed mapping. Its length is the local area scale.
    """
    a = axis_index(face_axis)
    coords = (xi, eta, kappa)
    t = np.asarray(coords[a], dtype=float)
    if not np.all((t >= 0.0) & (t <= 1.0)):
        raise DomainError(f"{('xi', 'eta', 'kappa')[a]}={t!r} is not on a face of the block")
    i, j = _TANGENTS[a]
    return np.cross(covariant_vector(b, *coords, i), covariant_vector(b, *coords, j))
