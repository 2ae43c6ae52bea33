"""Parametric surfaces over the unit square.

A surface maps ``(u, v) in [0, 1]^2`` to a point in physical space. The same
classes double as direction fields for Hermite blending (the values are then
read as vectors rather than positions).

When a surface is attached to a block it is parametrized by the two
reference axes other than the one it is a level set of, in the order
xi < eta < kappa: a xi-surface uses (eta, kappa), an eta-surface uses
(xi, kappa) and a kappa-surface uses (xi, eta).
"""

import numpy as np

from ._basis import check_knots, check_unit, lagrange_weight_derivatives, lagrange_weights
from .errors import ConstructionError

EDGES = ("u0", "u1", "v0", "v1")
CONFORMITY_SAMPLES = 33


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _vec3(x, name):
    a = np.asarray(x, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise ConstructionError(f"{name} must be a finite 3-vector, got {x!r}")
    return _frozen(a)


class ParametricSurface:
    """Base class. Subclasses implement ``_eval(u, v, du, dv)``.

    ``du`` and ``dv`` are derivative orders in {0, 1}; ``_eval`` receives
    broadcast float arrays and returns an array of shape ``u.shape + (3,)``.
    """

    kind = "analytic"

    def evaluate(self, u, v, du=0, dv=0):
        u = check_unit(u, "u")
        v = check_unit(v, "v")
        if du not in (0, 1) or dv not in (0, 1):
            raise ValueError("only first derivatives per parameter are supported")
        u, v = np.broadcast_arrays(u, v)
        return self._eval(u.astype(float), v.astype(float), du, dv)

    def __call__(self, u, v):
        return self.evaluate(u, v)

    def edge(self, name, s, ds=0):
        """Points along a boundary edge; ``s`` runs along the free parameter."""
        if name == "u0":
            return self.evaluate(0.0, s, 0, ds)
        if name == "u1":
            return self.evaluate(1.0, s, 0, ds)
        if name == "v0":
            return self.evaluate(s, 0.0, ds, 0)
        if name == "v1":
            return self.evaluate(s, 1.0, ds, 0)
        raise ValueError(f"unknown edge {name!r}; expected one of {EDGES}")

    def _eval(self, u, v, du, dv):
        raise NotImplementedError


class Plane(ParametricSurface):
    """``origin + u * u_vec + v * v_vec``."""

    def __init__(self, origin, u_vec, v_vec):
        self.origin = _vec3(origin, "origin")
        self.u_vec = _vec3(u_vec, "u_vec")
        self.v_vec = _vec3(v_vec, "v_vec")

    def _eval(self, u, v, du, dv):
        if du and dv:
            return np.zeros(u.shape + (3,))
        if du:
            return np.broadcast_to(self.u_vec, u.shape + (3,)).copy()
        if dv:
            return np.broadcast_to(self.v_vec, u.shape + (3,)).copy()
        return self.origin + u[..., None] * self.u_vec + v[..., None] * self.v_vec


def constant_field(vector):
    """A direction field that is the same vector everywhere."""
    return Plane(vector, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))


class BilinearPatch(ParametricSurface):
    """Bilinear blend of four corners ``p00, p10, p01, p11`` (first index is u)."""

    def __init__(self, p00, p10, p01, p11):
        self.corners = _frozen([_vec3(p, "corner") for p in (p00, p10, p01, p11)])

    def _eval(self, u, v, du, dv):
        p00, p10, p01, p11 = self.corners
        u = u[..., None]
        v = v[..., None]
        if du and dv:
            return np.broadcast_to(p11 - p10 - p01 + p00, u.shape[:-1] + (3,)).copy()
        if du:
            return (1 - v) * (p10 - p00) + v * (p11 - p01)
        if dv:
            return (1 - u) * (p01 - p00) + u * (p11 - p10)
        return (1 - u) * (1 - v) * p00 + u * (1 - v) * p10 + (1 - u) * v * p01 + u * v * p11


_GRAPH_AXES = {"x": (0, (1, 2)), "y": (1, (0, 2)), "z": (2, (0, 1))}


class GraphSurface(ParametricSurface):
    """Height-field surface ``h = f(p, q)`` over a rectangle of the base plane.

    ``axis`` names the height coordinate; the base coordinates are the other
    two in xyz order and are mapped affinely from (u, v) onto ``base_range``.
    ``f`` is ``offset + sum(c * p**i * q**j) + sum(a * sin(kp*p + kq*q + phase))``
    with ``poly`` terms ``(c, i, j)`` and ``sine`` terms ``(a, kp, kq, phase)``.
    """

    def __init__(self, base_range, offset=0.0, poly=(), sine=(), axis="z"):
        if axis not in _GRAPH_AXES:
            raise ConstructionError(f"graph axis must be x, y or z, got {axis!r}")
        rng = np.asarray(base_range, dtype=float)
        if rng.shape != (2, 2) or not np.all(np.isfinite(rng)):
            raise ConstructionError("base_range must be [[p0, p1], [q0, q1]]")
        self.axis = axis
        self.base_range = _frozen(rng)
        self.offset = float(offset)
        self.poly = tuple((float(c), int(i), int(j)) for c, i, j in poly)
        for _, i, j in self.poly:
            if i < 0 or j < 0:
                raise ConstructionError("polynomial exponents must be nonnegative")
        self.sine = tuple(tuple(float(x) for x in term) for term in sine)
        for term in self.sine:
            if len(term) != 4:
                raise ConstructionError("sine terms are (amplitude, kp, kq, phase)")

    def height(self, p, q, dp=0, dq=0):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        out = np.full(np.broadcast(p, q).shape, self.offset if dp == dq == 0 else 0.0)
        for c, i, j in self.poly:
            if (dp and i == 0) or (dq and j == 0):
                continue
            coef = c * (i if dp else 1) * (j if dq else 1)
            out = out + coef * p ** (i - dp) * q ** (j - dq)
        for a, kp, kq, phase in self.sine:
            arg = kp * p + kq * q + phase
            if dp and dq:
                out = out - a * kp * kq * np.sin(arg)
            elif dp:
                out = out + a * kp * np.cos(arg)
            elif dq:
                out = out + a * kq * np.cos(arg)
            else:
                out = out + a * np.sin(arg)
        return out

    def _eval(self, u, v, du, dv):
        h_axis, (pa, qa) = _GRAPH_AXES[self.axis]
        (p0, p1), (q0, q1) = self.base_range
        lp, lq = p1 - p0, q1 - q0
        p = p0 + u * lp
        q = q0 + v * lq
        out = np.zeros(u.shape + (3,))
        if du == 0 and dv == 0:
            out[..., pa] = p
            out[..., qa] = q
        elif du and not dv:
            out[..., pa] = lp
        elif dv and not du:
            out[..., qa] = lq
        scale = (lp if du else 1.0) * (lq if dv else 1.0)
        out[..., h_axis] = scale * self.height(p, q, du, dv)
        return out


class DiscreteSurface(ParametricSurface):
    """Bilinear interpolation of an ``(m+1, n+1, 3)`` point grid (first index is u)."""

    kind = "discrete"

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 3 or pts.shape[2] != 3 or pts.shape[0] < 2 or pts.shape[1] < 2:
            raise ConstructionError("discrete surface needs an (m+1, n+1, 3) grid with m, n >= 1")
        if not np.all(np.isfinite(pts)):
            raise ConstructionError("discrete surface points must be finite")
        self.points = _frozen(pts)

    @staticmethod
    def _locate(t, n):
        s = t * n
        r = np.rint(s)
        s = np.where(np.abs(s - r) < 1e-12, r, s)
        i = np.minimum(np.floor(s), n - 1).astype(int)
        return i, s - i

    def _eval(self, u, v, du, dv):
        m = self.points.shape[0] - 1
        n = self.points.shape[1] - 1
        i, a = self._locate(u, m)
        j, b = self._locate(v, n)
        P = self.points
        p00, p10, p01, p11 = P[i, j], P[i + 1, j], P[i, j + 1], P[i + 1, j + 1]
        a = a[..., None]
        b = b[..., None]
        if du and dv:
            return m * n * (p11 - p10 - p01 + p00)
        if du:
            return m * ((1 - b) * (p10 - p00) + b * (p11 - p01))
        if dv:
            return n * ((1 - a) * (p01 - p00) + a * (p11 - p10))
        return (1 - a) * (1 - b) * p00 + a * (1 - b) * p10 + (1 - a) * b * p01 + a * b * p11


class LoftSurface(ParametricSurface):
    """Lagrange blend in v of edge curves taken from other surfaces.

    ``curves`` is a sequence of ``(surface, edge_name)``; curve j runs along u
    and sits at ``v = knots[j]``. With two curves this is a ruled surface.
    """

    def __init__(self, curves, knots=None):
        curves = [(s, e) for s, e in curves]
        if len(curves) < 2:
            raise ConstructionError("loft needs at least two curves")
        for s, e in curves:
            if not isinstance(s, ParametricSurface):
                raise ConstructionError("loft curves must reference surfaces")
            if e not in EDGES:
                raise ConstructionError(f"unknown edge {e!r}")
        if knots is None:
            knots = np.linspace(0.0, 1.0, len(curves))
        self.knots = _frozen(check_knots(knots))
        if self.knots.size != len(curves):
            raise ConstructionError("loft knot count must equal curve count")
        self.curves = tuple(curves)

    def _eval(self, u, v, du, dv):
        basis = lagrange_weight_derivatives(self.knots, v) if dv else lagrange_weights(self.knots, v)
        out = np.zeros(u.shape + (3,))
        for j, (surf, edge) in enumerate(self.curves):
            out = out + basis[..., j, None] * surf.edge(edge, u, du)
        return out


def eval_surface(s, u, v):
    """Physical point of ``s`` at ``(u, v)``; raises DomainError outside the unit square."""
    return s.evaluate(u, v)


def eval_surface_derivative(s, u, v, which):
    """Partial derivative along ``which`` ("u"/"first" or "v"/"second")."""
    if which in ("u", "first", 0):
        return s.evaluate(u, v, du=1)
    if which in ("v", "second", 1):
        return s.evaluate(u, v, dv=1)
    raise ValueError(f"which must name the first or second parameter, got {which!r}")


def edges_conform(a, b, edge_a, edge_b, tol, samples=CONFORMITY_SAMPLES):
    """True iff the two edge curves agree pointwise within ``tol``.

    Both curves are sampled at the same uniform parameters, so they must run
    in the same direction.
    """
    s = np.linspace(0.0, 1.0, samples)
    gap = np.linalg.norm(a.edge(edge_a, s) - b.edge(edge_b, s), axis=-1)
    return bool(np.all(gap <= tol))


def edge_gap(a, b, edge_a, edge_b, samples=CONFORMITY_SAMPLES):
    s = np.linspace(0.0, 1.0, samples)
    return float(np.max(np.linalg.norm(a.edge(edge_a, s) - b.edge(edge_b, s), axis=-1)))
