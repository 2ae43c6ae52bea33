"""One-dimensional projection operators and their tensor-product evaluation.

A projector along axis ``a`` is ``P_a r = sum_k phi_k(t_a) L_k r`` where each
``L_k`` samples the mapping (or its a-derivative) at a fixed value of ``t_a``
and ``phi_k`` is the matching blending function. The sampled data ``L_k r``
are the surfaces the projector is built from.

Tensor products apply the outer projectors' functionals to the surfaces of
the innermost one, so ``P_xi o P_eta`` reads eta-surfaces at the xi knots.
"""

import numpy as np

from ._basis import (
    barycentric_weights,
    check_knots,
    check_unit,
    hermite_basis,
    hermite_basis_derivative,
    lagrange_weight_derivatives,
    lagrange_weights,
    lagrange_weights_classical,
)
from .errors import ConstructionError
from .surfaces import ParametricSurface

AXES = ("xi", "eta", "kappa")
# parameter slots of a surface that is a level set of the given axis
SURFACE_PARAMS = {0: (1, 2), 1: (0, 2), 2: (0, 1)}

__all__ = [
    "AXES",
    "ProjectorSpec",
    "axis_index",
    "barycentric_weights",
    "eval_projector",
    "eval_projector_axis_derivative",
    "eval_projector_classical",
    "lagrange_weights",
    "lagrange_weights_classical",
    "tensor_product",
]


def axis_index(axis):
    if isinstance(axis, (int, np.integer)) and 0 <= axis < 3:
        return int(axis)
    try:
        return AXES.index(axis)
    except ValueError:
        raise ConstructionError(f"unknown axis {axis!r}; expected one of {AXES}") from None


def _check_surfaces(surfaces, what):
    for s in surfaces:
        if not isinstance(s, ParametricSurface):
            raise ConstructionError(f"{what} must be ParametricSurface instances, got {type(s).__name__}")


class ProjectorSpec:
    """A 1D projector: family, axis, sampling functionals and data surfaces.

    Build with :meth:`linear`, :meth:`lagrangian` or :meth:`hermite`.
    ``taus``/``orders`` describe the functionals: ``orders[k] == 0`` samples
    the value at ``taus[k]``, ``1`` samples the axis derivative there.
    """

    def __init__(self, axis, family, taus, orders, data, knots=None):
        self.axis = AXES[axis_index(axis)]
        self.family = family
        self.taus = tuple(float(t) for t in taus)
        self.orders = tuple(int(o) for o in orders)
        self.data = tuple(data)
        self.knots = None if knots is None else np.array(knots, dtype=float)
        self._bary = None
        if family == "lagrangian":
            self.knots.setflags(write=False)
            self._bary = barycentric_weights(self.knots)

    @property
    def axis_id(self):
        return AXES.index(self.axis)

    @classmethod
    def linear(cls, axis, s0, s1):
        _check_surfaces((s0, s1), "linear projector surfaces")
        return cls(axis, "linear", (0.0, 1.0), (0, 0), (s0, s1))

    @classmethod
    def lagrangian(cls, axis, knots, surfaces):
        k = check_knots(knots)
        surfaces = tuple(surfaces)
        if len(surfaces) != k.size:
            raise ConstructionError(f"{k.size} knots but {len(surfaces)} surfaces")
        _check_surfaces(surfaces, "lagrangian projector surfaces")
        return cls(axis, "lagrangian", k, (0,) * k.size, surfaces, knots=k)

    @classmethod
    def hermite(cls, axis, s0, s1, d0, d1):
        _check_surfaces((s0, s1, d0, d1), "hermite projector data")
        return cls(axis, "hermite", (0.0, 1.0, 0.0, 1.0), (0, 0, 1, 1), (s0, s1, d0, d1))

    @property
    def surfaces(self):
        """The position surfaces (derivative fields excluded)."""
        return tuple(d for d, o in zip(self.data, self.orders) if o == 0)

    def basis(self, t):
        if self.family == "linear":
            t = np.asarray(t, dtype=float)
            return np.stack([1.0 - t, t], axis=-1)
        if self.family == "lagrangian":
            return lagrange_weights(self.knots, t, self._bary)
        return hermite_basis(t)

    def basis_derivative(self, t):
        if self.family == "linear":
            t = np.asarray(t, dtype=float)
            return np.stack([-np.ones_like(t), np.ones_like(t)], axis=-1)
        if self.family == "lagrangian":
            return lagrange_weight_derivatives(self.knots, t, self._bary)
        return hermite_basis_derivative(t)

    def functional_matrix(self):
        """Row k: this projector's basis under its own functional k."""
        rows = []
        for tau, order in zip(self.taus, self.orders):
            f = self.basis_derivative if order else self.basis
            rows.append(f(np.float64(tau)))
        return np.array(rows)

    def __repr__(self):
        return f"ProjectorSpec({self.axis}, {self.family}, n={len(self.data)})"


def _coords(xi, eta, kappa):
    c = [check_unit(x, name) for x, name in zip((xi, eta, kappa), AXES)]
    return np.broadcast_arrays(*c)


def _apply(projectors, coords, diff_axis=None):
    """Evaluate the tensor product of ``projectors`` (outer first) at ``coords``.

    ``diff_axis`` requests the exact partial derivative along that axis.
    """
    if not projectors:
        raise ConstructionError("empty tensor product")
    shape = coords[0].shape
    # collapse repeated axes: P o P applies P's functionals to P's own basis
    per_axis = {}
    order = []
    for p in projectors:
        a = p.axis_id
        if a not in per_axis:
            per_axis[a] = [p, None]
            order.append(a)
            continue
        first = per_axis[a][0]
        if p is not first:
            raise ConstructionError(f"cannot compose two different projectors along {p.axis}")
        mix = p.functional_matrix() if per_axis[a][1] is None else per_axis[a][1] @ p.functional_matrix()
        per_axis[a][1] = mix
    inner = per_axis[order[-1]][0]
    outer = set(order[:-1])

    weights = {}
    for a in order:
        p, mix = per_axis[a]
        t = coords[a]
        w = p.basis_derivative(t) if diff_axis == a else p.basis(t)
        if mix is not None:
            w = w @ mix
        weights[a] = w

    slot_terms = []
    for b in SURFACE_PARAMS[inner.axis_id]:
        if b in outer:
            p = per_axis[b][0]
            slot_terms.append([(weights[b][..., k], tau, o) for k, (tau, o) in enumerate(zip(p.taus, p.orders))])
        else:
            slot_terms.append([(None, coords[b], 1 if diff_axis == b else 0)])

    out = np.zeros(shape + (3,))
    w_in = weights[inner.axis_id]
    for m, surf in enumerate(inner.data):
        acc = np.zeros(shape + (3,))
        for w1, p1, o1 in slot_terms[0]:
            for w2, p2, o2 in slot_terms[1]:
                val = surf.evaluate(p1, p2, o1, o2)
                scale = np.ones(shape)
                if w1 is not None:
                    scale = scale * w1
                if w2 is not None:
                    scale = scale * w2
                acc = acc + scale[..., None] * val
        out = out + w_in[..., m, None] * acc
    return out


def eval_projector(p, xi, eta, kappa):
    """Point given by projector ``p`` at reference coordinates (xi, eta, kappa)."""
    return _apply([p], _coords(xi, eta, kappa))


def eval_projector_axis_derivative(p, xi, eta, kappa):
    """Exact derivative of :func:`eval_projector` along the projector's own axis."""
    return _apply([p], _coords(xi, eta, kappa), diff_axis=p.axis_id)


def eval_projector_classical(p, xi, eta, kappa):
    """Lagrangian projector via the product-form weights; test oracle for the barycentric path."""
    if p.family != "lagrangian":
        raise ConstructionError("classical form only exists for lagrangian projectors")
    c = _coords(xi, eta, kappa)
    beta = lagrange_weights_classical(p.knots, c[p.axis_id])
    s1, s2 = SURFACE_PARAMS[p.axis_id]
    out = np.zeros(c[0].shape + (3,))
    for j, surf in enumerate(p.data):
        out = out + beta[..., j, None] * surf.evaluate(c[s1], c[s2])
    return out


def tensor_product(pA, pB, xi, eta, kappa, diff_axis=None):
    """Evaluate ``pA o pB``; ``pB`` may itself be a sequence of projectors (a product)."""
    inner = list(pB) if isinstance(pB, (list, tuple)) else [pB]
    d = None if diff_axis is None else axis_index(diff_axis)
    return _apply([pA, *inner], _coords(xi, eta, kappa), diff_axis=d)
