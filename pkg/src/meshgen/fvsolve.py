"""Two-point flux finite volumes for ``-div(K grad p) = f`` on a hexahedral mesh.

Cell-centered pressure, isotropic scalar permeability per material. The
scheme is only consistent on K-orthogonal grids; skewed cells lose accuracy.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ConfigError, ConvergenceError, SingularProblemError, TransmissibilityWarning
from .multiblock import _tag_matches

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dirichlet:
    """Prescribed pressure; ``value`` is a number or a callable of face centers (n, 3)."""

    value: object


@dataclass(frozen=True)
class Neumann:
    """Prescribed outward flux density (per unit area); positive means outflow."""

    value: object


@dataclass(frozen=True)
class PermeabilityField:
    values: dict

    def __post_init__(self):
        for name, k in self.values.items():
            if not (np.isfinite(k) and k > 0):
                raise ValueError(f"permeability of {name!r} must be positive, got {k!r}")

    def per_cell(self, mesh):
        try:
            return np.array([float(self.values[m]) for m in mesh.cell_material])
        except KeyError as exc:
            raise ConfigError(f"no permeability for material {exc.args[0]!r}") from None


@dataclass(frozen=True)
class PressureProblem:
    """Mesh plus permeability, source, boundary conditions and solver settings.

    ``source`` is a number, a per-cell array, or a callable of cell centers.
    ``boundary`` maps face tags (``"kappa0"`` or ``"<block>:kappa0"``) to a
    :class:`Dirichlet` or :class:`Neumann`; untagged boundary faces are no-flow.
    """

    mesh: object
    permeability: PermeabilityField
    source: object = 0.0
    boundary: dict = field(default_factory=dict)
    tol: float = 1e-10
    maxiter: int = 10000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("solver tolerance must be positive")
        if not isinstance(self.permeability, PermeabilityField):
            object.__setattr__(self, "permeability", PermeabilityField(dict(self.permeability)))


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Symmetric cell-by-cell matrix, right-hand side and per-face flux data.

    Face flux out of the owner is ``trans * (p_owner - p_other) + flux_offset``
    where ``p_other`` is the neighbor pressure (interior), the Dirichlet value,
    or zero with ``trans == 0`` for Neumann faces.
    """

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    trans: np.ndarray
    face_value: np.ndarray
    flux_offset: np.ndarray
    half_trans: np.ndarray
    source: np.ndarray


def _evaluate(value, points):
    if callable(value):
        return np.asarray(value(points), dtype=float).reshape(len(points))
    return np.full(len(points), float(value))


def _half_transmissibility(mesh, K, cell, normal):
    """K_c (A . d) / |d|^2 with ``normal`` the area vector pointing away from ``cell``."""
    d = mesh.face_center - mesh.cell_center[cell]
    return K[cell] * np.einsum("ij,ij->i", normal, d) / np.einsum("ij,ij->i", d, d)


def _boundary_conditions(problem):
    mesh = problem.mesh
    nf = mesh.n_faces
    kind = np.zeros(nf, dtype=int)  # 0 no-flow, 1 dirichlet, 2 neumann
    entry = np.full(nf, -1)  # which boundary entry applies; later entries win
    conditions = list(problem.boundary.items())
    tags = mesh.face_tag
    for f in np.flatnonzero(mesh.boundary):
        for k, (tag, bc) in enumerate(conditions):
            if _tag_matches(tags[f], tag):
                kind[f] = 1 if isinstance(bc, Dirichlet) else 2
                entry[f] = k
    values = np.zeros(nf)
    for k, (_, bc) in enumerate(conditions):
        sel = entry == k
        if np.any(sel):
            values[sel] = _evaluate(bc.value, mesh.face_center[sel])
    return kind, values


def assemble_tpfa(problem):
    """Build the TPFA system; raises SingularProblemError without Dirichlet faces."""
    mesh = problem.mesh
    n = mesh.n_cells
    K = problem.permeability.per_cell(mesh)
    kind, bvals = _boundary_conditions(problem)
    if not np.any(kind == 1):
        raise SingularProblemError("no Dirichlet boundary face: the pressure is determined only up to a constant")

    own = mesh.face_owner
    nbr = mesh.face_neighbor
    inner = nbr >= 0
    t_own = _half_transmissibility(mesh, K, own, mesh.face_normal)
    t_nbr = np.zeros(mesh.n_faces)
    t_nbr[inner] = _half_transmissibility(mesh, K, nbr, -mesh.face_normal)[inner]

    trans = np.zeros(mesh.n_faces)
    with np.errstate(divide="ignore", invalid="ignore"):
        trans[inner] = t_own[inner] * t_nbr[inner] / (t_own[inner] + t_nbr[inner])
    dir_faces = kind == 1
    trans[dir_faces] = t_own[dir_faces]
    bad = np.flatnonzero((inner | dir_faces) & ~(trans > 0))
    if len(bad):
        warnings.warn(f"nonpositive transmissibility on faces {bad.tolist()}", TransmissibilityWarning, stacklevel=2)

    area = np.linalg.norm(mesh.face_normal, axis=1)
    offset = np.where(kind == 2, bvals * area, 0.0)
    face_value = np.where(dir_faces, bvals, 0.0)

    src = problem.source
    if callable(src):
        f = _evaluate(src, mesh.cell_center)
    else:
        f = np.broadcast_to(np.asarray(src, dtype=float), (n,)).astype(float)
    rhs = f * mesh.cell_volume
    np.add.at(rhs, own[dir_faces], trans[dir_faces] * face_value[dir_faces])
    np.subtract.at(rhs, own, offset)

    diag = np.zeros(n)
    np.add.at(diag, own[inner | dir_faces], trans[inner | dir_faces])
    np.add.at(diag, nbr[inner], trans[inner])
    # strict upper triangle first, then mirror: the result is exactly symmetric
    lo = np.minimum(own[inner], nbr[inner])
    hi = np.maximum(own[inner], nbr[inner])
    upper = sparse.coo_matrix((-trans[inner], (lo, hi)), shape=(n, n)).tocsr()
    A = (upper + upper.T + sparse.diags(diag)).tocsr()
    A.sort_indices()
    return LinearSystem(A, rhs, trans, face_value, offset, t_own, f)


def conjugate_gradient(A, b, tol=1e-10, maxiter=10000, x0=None):
    """Unpreconditioned CG to relative residual ``tol``.

    Returns ``(x, iterations, relative_residual)``.
    """
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - A @ x
    d = r.copy()
    rr = r @ r
    res = np.sqrt(rr) / bnorm
    k = 0
    while res > tol:
        if k >= maxiter:
            raise ConvergenceError(f"CG did not converge in {maxiter} iterations (residual {res:.3e})", res, k)
        Ad = A @ d
        alpha = rr / (d @ Ad)
        x += alpha * d
        r -= alpha * Ad
        rr_new = r @ r
        d = r + (rr_new / rr) * d
        rr = rr_new
        k += 1
        res = np.sqrt(rr) / bnorm
    log.debug("CG converged in %d iterations, residual %.3e", k, res)
    return x, k, float(res)


def solve_pressure(system, tol=1e-10, maxiter=10000):
    """Cell pressures of an assembled system."""
    p, _, _ = conjugate_gradient(system.matrix, system.rhs, tol, maxiter)
    return p


def compute_fluxes(problem, p, system=None):
    """Darcy flux through every face, positive from owner to neighbor (or out of the domain)."""
    mesh = problem.mesh
    if system is None:
        system = assemble_tpfa(problem)
    p = np.asarray(p, dtype=float)
    other = np.where(mesh.face_neighbor >= 0, p[np.maximum(mesh.face_neighbor, 0)], system.face_value)
    return system.trans * (p[mesh.face_owner] - other) + system.flux_offset


def flux_balance(problem, fluxes, system=None):
    """Per-cell residual: sum of outward fluxes minus ``f * volume``."""
    mesh = problem.mesh
    if system is None:
        system = assemble_tpfa(problem)
    out = np.zeros(mesh.n_cells)
    np.add.at(out, mesh.face_owner, fluxes)
    inner = mesh.face_neighbor >= 0
    np.subtract.at(out, mesh.face_neighbor[inner], fluxes[inner])
    return out - system.source * mesh.cell_volume


def face_pressures(problem, p, system=None):
    """Pressure reconstructed at face centers from the two-point flux."""
    mesh = problem.mesh
    if system is None:
        system = assemble_tpfa(problem)
    p = np.asarray(p, dtype=float)
    own = mesh.face_owner
    nbr = mesh.face_neighbor
    inner = nbr >= 0
    out = np.empty(mesh.n_faces)
    flux = compute_fluxes(problem, p, system)
    # p_face = p_owner - flux / t_owner on every face with a usable half transmissibility
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:] = p[own] - flux / system.half_trans
    dir_faces = ~inner & (system.trans > 0)
    out[dir_faces] = system.face_value[dir_faces]
    return out


def solve(problem):
    """Assemble, solve and post-process; returns a dict of results."""
    system = assemble_tpfa(problem)
    p, iterations, residual = conjugate_gradient(system.matrix, system.rhs, problem.tol, problem.maxiter)
    fluxes = compute_fluxes(problem, p, system)
    balance = flux_balance(problem, fluxes, system)
    return {
        "pressure": p,
        "fluxes": fluxes,
        "residual": balance,
        "iterations": iterations,
        "relative_residual": residual,
        "system": system,
    }
