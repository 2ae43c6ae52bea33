"""One-dimensional blending bases: Lagrange (classical and barycentric) and cubic Hermite.

All functions broadcast over ``t``; the basis index is the trailing axis of
the result.
"""

import numpy as np

from .errors import ConstructionError, DomainError

# |t - knot| below this counts as "at the knot" in the barycentric form
CARDINAL_EPS = 1e-14
MAX_LAGRANGE_ORDER = 8


def check_unit(x, name="parameter"):
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        bad = arr[~((arr >= 0.0) & (arr <= 1.0))].ravel()[0]
        raise DomainError(f"{name} {bad!r} outside [0, 1]")
    return arr


def check_knots(knots, max_order=MAX_LAGRANGE_ORDER):
    """Validate a knot vector and return it as a float array."""
    k = np.asarray(knots, dtype=float)
    if k.ndim != 1 or k.size < 2:
        raise ConstructionError("need at least 2 knots")
    if not np.all(np.isfinite(k)):
        raise ConstructionError("knots must be finite")
    d = np.diff(k)
    if np.any(d == 0.0):
        raise ConstructionError("duplicate knots")
    if np.any(d < 0.0):
        raise ConstructionError("knots not ascending")
    if k[0] != 0.0 or k[-1] != 1.0:
        raise ConstructionError("knots must start at 0 and end at 1")
    if k.size - 1 > max_order:
        raise ConstructionError(f"Lagrangian order {k.size - 1} exceeds cap {max_order}")
    return k


def barycentric_weights(knots):
    """w_j = 1 / prod_{i != j} (x_j - x_i)."""
    k = check_knots(knots, max_order=np.inf)
    diff = k[:, None] - k[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_weights(knots, t, weights=None):
    """Lagrange basis values via the barycentric form ``Omega * w_j / (t - x_j)``.

    At a knot the 0/0 limit is replaced by the exact cardinal row.
    """
    k = np.asarray(knots, dtype=float)
    w = barycentric_weights(k) if weights is None else weights
    t = np.asarray(t, dtype=float)
    diff = t[..., None] - k
    at_knot = np.abs(diff) < CARDINAL_EPS
    hit = at_knot.any(axis=-1)
    safe = np.where(at_knot, 1.0, diff)
    omega = np.prod(diff, axis=-1)
    beta = omega[..., None] * w / safe
    if np.any(hit):
        beta = np.where(hit[..., None], at_knot.astype(float), beta)
    return beta


def lagrange_weights_classical(knots, t):
    """Lagrange basis values via the product formula prod_{i != j} (t - x_i)/(x_j - x_i)."""
    k = check_knots(knots, max_order=np.inf)
    t = np.asarray(t, dtype=float)
    n = k.size
    out = np.ones(t.shape + (n,))
    for j in range(n):
        for i in range(n):
            if i != j:
                out[..., j] *= (t - k[i]) / (k[j] - k[i])
    return out


def lagrange_weight_derivatives(knots, t, weights=None):
    """d/dt of each Lagrange basis polynomial, valid at knots as well."""
    k = np.asarray(knots, dtype=float)
    w = barycentric_weights(k) if weights is None else weights
    t = np.asarray(t, dtype=float)
    n = k.size
    diff = t[..., None] - k
    out = np.zeros(t.shape + (n,))
    for j in range(n):
        acc = np.zeros(t.shape)
        for i in range(n):
            if i == j:
                continue
            prod = np.ones(t.shape)
            for m in range(n):
                if m != i and m != j:
                    prod = prod * diff[..., m]
            acc = acc + prod
        out[..., j] = w[j] * acc
    return out


def hermite_basis(t):
    """Cubic Hermite blending functions ordered (value@0, value@1, slope@0, slope@1)."""
    t = np.asarray(t, dtype=float)
    t2 = t * t
    t3 = t2 * t
    return np.stack(
        [2 * t3 - 3 * t2 + 1, -2 * t3 + 3 * t2, t3 - 2 * t2 + t, t3 - t2], axis=-1
    )


def hermite_basis_derivative(t):
    t = np.asarray(t, dtype=float)
    t2 = t * t
    return np.stack([6 * t2 - 6 * t, -6 * t2 + 6 * t, 3 * t2 - 4 * t + 1, 3 * t2 - 2 * t], axis=-1)
