"""Convenience constructors for common block shapes."""

import numpy as np

from .errors import ConstructionError
from .projectors import ProjectorSpec
from .surfaces import GraphSurface, LoftSurface, Plane
from .tfi import BlockSpec


def affine_faces(matrix, offset=(0.0, 0.0, 0.0)):
    """Six planar faces of the image of the unit cube under ``x = matrix @ t + offset``.

    Returned as ``{(axis, 0|1): Plane}``.
    """
    A = np.asarray(matrix, dtype=float)
    c = np.asarray(offset, dtype=float)
    if A.shape != (3, 3):
        raise ConstructionError("affine matrix must be 3x3")
    faces = {}
    for axis in range(3):
        u_axis, v_axis = [a for a in range(3) if a != axis]
        for tau in (0, 1):
            faces[axis, tau] = Plane(c + tau * A[:, axis], A[:, u_axis], A[:, v_axis])
    return faces


def affine_block(matrix, offset=(0.0, 0.0, 0.0), resolution=(1, 1, 1), **kw):
    f = affine_faces(matrix, offset)
    p = [ProjectorSpec.linear(a, f[a, 0], f[a, 1]) for a in range(3)]
    return BlockSpec(*p, resolution=resolution, **kw)


def box_block(lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0), resolution=(1, 1, 1), **kw):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise ConstructionError(f"box needs lo < hi componentwise, got {lo} and {hi}")
    return affine_block(np.diag(hi - lo), lo, resolution, **kw)


def flat(z, x_range, y_range):
    return GraphSurface((x_range, y_range), offset=z)


def layer_block(x_range, y_range, bottom, top, horizons=(), resolution=(1, 1, 1), **kw):
    """Block between two horizons over a rectangle, with vertical lofted sides.

    ``bottom``/``top`` (and each internal horizon) are surfaces parametrized
    by (xi, eta); a number means a flat horizon at that height. ``horizons``
    is a sequence of ``(knot, surface)`` with knots strictly inside (0, 1);
    when given, the kappa projector is Lagrangian through all of them.
    """

    def as_surface(s):
        if isinstance(s, (int, float)):
            return flat(float(s), x_range, y_range)
        return s

    horizons = sorted(((float(k), as_surface(s)) for k, s in horizons), key=lambda h: h[0])
    knots = [0.0] + [k for k, _ in horizons] + [1.0]
    stack = [as_surface(bottom)] + [s for _, s in horizons] + [as_surface(top)]

    def side(edge):
        return LoftSurface([(s, edge) for s in stack], knots)

    p_xi = ProjectorSpec.linear("xi", side("u0"), side("u1"))
    p_eta = ProjectorSpec.linear("eta", side("v0"), side("v1"))
    if horizons:
        p_kappa = ProjectorSpec.lagrangian("kappa", knots, stack)
    else:
        p_kappa = ProjectorSpec.linear("kappa", stack[0], stack[1])
    return BlockSpec(p_xi, p_eta, p_kappa, resolution=resolution, **kw)
