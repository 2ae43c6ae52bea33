"""Transfinite interpolation of a block and structured grid generation."""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._basis import check_unit
from .errors import ConstructionError, DomainError, SpecError
from .projectors import AXES, SURFACE_PARAMS, ProjectorSpec, _apply, _coords, axis_index

CONFORMITY_TOL = 1e-9
_SAMPLES = np.linspace(0.0, 1.0, 33)


class Grading:
    """Monotone map of [0, 1] onto itself used to cluster nodes.

    ``power``: ``t**exponent``. ``tanh``: symmetric clustering toward both
    ends with the given ``strength`` (larger clusters harder). ``identity``
    leaves the parameter alone.
    """

    KINDS = ("identity", "power", "tanh")

    def __init__(self, kind="identity", value=None):
        if kind not in self.KINDS:
            raise ConstructionError(f"unknown grading {kind!r}")
        if kind != "identity":
            if value is None or not np.isfinite(value) or value <= 0:
                raise ConstructionError(f"{kind} grading needs a positive parameter, got {value!r}")
            value = float(value)
        self.kind = kind
        self.value = value

    def __call__(self, t):
        t = check_unit(t, "grading argument")
        if self.kind == "identity":
            g = t.copy()
        elif self.kind == "power":
            g = t**self.value
        else:
            s = self.value
            g = 0.5 * (1.0 + np.tanh(s * (2.0 * t - 1.0)) / np.tanh(s))
        # pin the ends so boundary nodes land exactly on boundary surfaces
        g = np.where(t == 0.0, 0.0, np.where(t == 1.0, 1.0, g))
        return np.clip(g, 0.0, 1.0)

    def is_increasing(self, samples=1025):
        g = self(np.linspace(0.0, 1.0, samples))
        return bool(np.all(np.diff(g) > 0.0))

    def __repr__(self):
        return f"Grading({self.kind!r}, {self.value!r})"


@dataclass(frozen=True)
class BlockSpec:
    """Three projectors (xi, eta, kappa) plus resolution, material and grading."""

    p_xi: ProjectorSpec
    p_eta: ProjectorSpec
    p_kappa: ProjectorSpec
    resolution: tuple
    material: str = "default"
    grading: tuple = (None, None, None)
    name: str = "block"

    def __post_init__(self):
        for slot, p in zip(AXES, self.projectors):
            if not isinstance(p, ProjectorSpec):
                raise ConstructionError(f"p_{slot} must be a ProjectorSpec")
            if p.axis != slot:
                raise ConstructionError(f"projector in slot {slot} varies along {p.axis}")
        res = tuple(int(n) for n in self.resolution)
        if len(res) != 3 or any(n < 1 for n in res) or any(n != r for n, r in zip(res, self.resolution)):
            raise ConstructionError(f"resolution must be three positive integers, got {self.resolution!r}")
        object.__setattr__(self, "resolution", res)
        grading = tuple(Grading() if g is None else g for g in self.grading)
        if len(grading) != 3:
            raise ConstructionError("grading needs one entry per axis")
        for axis, g in zip(AXES, grading):
            if not g.is_increasing():
                raise ConstructionError(f"grading on {axis} is not strictly increasing")
        object.__setattr__(self, "grading", grading)

    @property
    def projectors(self):
        return (self.p_xi, self.p_eta, self.p_kappa)

    def conformity_issues(self, tol=None):
        """Pairs of surfaces from different axes whose common curve disagrees.

        Returns ``[(description, gap), ...]``; empty when the block is well formed.
        """
        if tol is None:
            tol = CONFORMITY_TOL * max(1.0, self.scale())
        issues = []
        for a, b in combinations(range(3), 2):
            pa, pb = self.projectors[a], self.projectors[b]
            c = 3 - a - b
            for sa, ta in _position_surfaces(pa):
                for sb, tb in _position_surfaces(pb):
                    ca = _isoline(sa, a, b, tb, c)
                    cb = _isoline(sb, b, a, ta, c)
                    gap = float(np.max(np.linalg.norm(ca - cb, axis=-1)))
                    if not gap <= tol:
                        issues.append(
                            (f"{AXES[a]}={ta:g} surface vs {AXES[b]}={tb:g} surface along {AXES[c]}", gap)
                        )
        return issues

    def scale(self):
        corners = boolean_sum_eval(self, *np.meshgrid([0.0, 1.0], [0.0, 1.0], [0.0, 1.0], indexing="ij"))
        ext = corners.reshape(-1, 3)
        d = float(np.linalg.norm(ext.max(axis=0) - ext.min(axis=0)))
        return d if np.isfinite(d) else 1.0


def _position_surfaces(p):
    return [(s, tau) for s, tau, o in zip(p.data, p.taus, p.orders) if o == 0]


def _isoline(surface, own_axis, fixed_axis, fixed_value, free_axis):
    """Curve on a level-set surface of ``own_axis`` with ``fixed_axis`` held at ``fixed_value``."""
    slots = SURFACE_PARAMS[own_axis]
    params = [None, None]
    params[slots.index(fixed_axis)] = fixed_value
    params[slots.index(free_axis)] = _SAMPLES
    return surface.evaluate(params[0], params[1])


def boolean_sum(projectors, xi, eta, kappa, diff_axis=None):
    """Boolean sum of any list of projectors by inclusion-exclusion over their tensor products."""
    coords = _coords(xi, eta, kappa)
    d = None if diff_axis is None else axis_index(diff_axis)
    out = np.zeros(coords[0].shape + (3,))
    for k in range(1, len(projectors) + 1):
        sign = 1.0 if k % 2 else -1.0
        for subset in combinations(projectors, k):
            out = out + sign * _apply(list(subset), coords, d)
    return out


def boolean_sum_eval(b, xi, eta, kappa, diff_axis=None):
    """TFI mapping of block ``b``: the boolean sum of its three projectors.

    Terms are grouped so that on a face coordinate each bracket cancels
    exactly and the face surface comes back bit-for-bit.
    """
    c = _coords(xi, eta, kappa)
    d = None if diff_axis is None else axis_index(diff_axis)
    px, pe, pk = b.projectors
    return (
        _apply([px], c, d)
        + (_apply([pe], c, d) - _apply([px, pe], c, d))
        + (_apply([pk], c, d) - _apply([px, pk], c, d))
        - (_apply([pe, pk], c, d) - _apply([px, pe, pk], c, d))
    )


def covariant_vector(b, xi, eta, kappa, axis):
    """Exact partial derivative of the TFI mapping along ``axis``."""
    return boolean_sum_eval(b, xi, eta, kappa, diff_axis=axis)


def jacobian_determinant(b, xi, eta, kappa):
    r = [covariant_vector(b, xi, eta, kappa, a) for a in range(3)]
    return np.einsum("...i,...i->...", r[0], np.cross(r[1], r[2]))


def mesh_counts(resolution):
    """(nodes, cells, faces) of an nx x ny x nz block."""
    nx, ny, nz = (int(n) for n in resolution)
    if min(nx, ny, nz) < 1:
        raise DomainError(f"resolution must be positive, got {tuple(resolution)}")
    nodes = (nx + 1) * (ny + 1) * (nz + 1)
    cells = nx * ny * nz
    faces = nx * ny * (nz + 1) + nx * nz * (ny + 1) + ny * nz * (nx + 1)
    return nodes, cells, faces


# local corner (dx, dy, dz) in the 1..8 vertex numbering used for cells
HEX_CORNERS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1))


@dataclass(frozen=True)
class StructuredGrid:
    """Lattice of ``(nx+1)(ny+1)(nz+1)`` physical points, ix varying fastest."""

    resolution: tuple
    points: np.ndarray
    material: str = "default"
    name: str = "block"
    params: tuple = field(default=(), compare=False)

    @property
    def shape(self):
        nx, ny, nz = self.resolution
        return (nx + 1, ny + 1, nz + 1)

    def index(self, ix, iy, iz):
        nx, ny, _ = self.resolution
        return ix + (nx + 1) * (iy + (ny + 1) * iz)

    def node(self, ix, iy, iz):
        return self.points[self.index(ix, iy, iz)]

    def lattice(self):
        """Points as an array indexed ``[ix, iy, iz, :]``."""
        return self.points.reshape(self.shape[::-1] + (3,)).transpose(2, 1, 0, 3)

    def cell_nodes(self):
        """(ncells, 8) local node indices, cells ordered with ix fastest."""
        nx, ny, nz = self.resolution
        iz, iy, ix = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
        return np.stack([self.index(ix + dx, iy + dy, iz + dz) for dx, dy, dz in HEX_CORNERS], axis=1)

    def cell_addresses(self):
        nx, ny, nz = self.resolution
        iz, iy, ix = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        return np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1)

    def counts(self):
        return mesh_counts(self.resolution)


def grid_parameters(b):
    """Graded reference samples along each axis."""
    return tuple(g(np.arange(n + 1) / n) for g, n in zip(b.grading, b.resolution))


def generate_grid(b, check=True):
    """Sample the TFI mapping of ``b`` on its (graded) lattice."""
    if check:
        issues = b.conformity_issues()
        if issues:
            desc, gap = issues[0]
            raise SpecError(f"block {b.name!r}: boundary surfaces do not conform: {desc} (gap {gap:.3e})")
    tx, ty, tz = grid_parameters(b)
    # z outermost so that a C-order ravel gives ix fastest
    Z, Y, X = np.meshgrid(tz, ty, tx, indexing="ij")
    pts = boolean_sum_eval(b, X, Y, Z).reshape(-1, 3)
    pts.setflags(write=False)
    return StructuredGrid(b.resolution, pts, b.material, b.name, (tx, ty, tz))
