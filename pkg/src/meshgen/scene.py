"""Scene files: JSON documents declaring blocks, materials and an optional flow problem.

See ``docs/scene-format.md`` for the grammar. :func:`parse_spec` either
returns a fully built :class:`SceneSpec` or raises
:class:`SceneValidationError` carrying every problem found.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._basis import MAX_LAGRANGE_ORDER
from .builders import box_block, layer_block
from .errors import ConstructionError, MeshgenError
from .fvsolve import Dirichlet, Neumann, PermeabilityField, PressureProblem
from .multiblock import assemble_multiblock
from .projectors import AXES, ProjectorSpec
from .surfaces import EDGES, BilinearPatch, DiscreteSurface, GraphSurface, LoftSurface, Plane, constant_field
from .tfi import BlockSpec, Grading, generate_grid

SIDES = tuple(f"{a}{s}" for a in AXES for s in (0, 1))

# code -> short meaning; every code is emitted by exactly one kind of check
CODES = {
    "E001": "syntax error",
    "E002": "malformed document",
    "E010": "duplicate block id",
    "E011": "missing or invalid block id",
    "E012": "undefined material",
    "E013": "invalid resolution",
    "E014": "block shape must be exactly one of box, layer, projectors",
    "E015": "invalid box or layer geometry",
    "E020": "unknown surface form",
    "E021": "invalid surface parameters",
    "E022": "unknown surface reference",
    "E030": "unknown projector family",
    "E031": "knots not ascending",
    "E032": "duplicate knots",
    "E033": "knots must start at 0 and end at 1",
    "E034": "knot count does not match surface count",
    "E035": "Lagrangian order cap exceeded",
    "E036": "missing projector for an axis",
    "E037": "wrong number of surfaces or derivative fields",
    "E040": "invalid grading",
    "E050": "boundary surfaces do not conform at a block edge",
    "E060": "invalid permeability",
    "E070": "unknown boundary condition type",
    "E071": "boundary tag matches no block side",
    "E072": "invalid solver settings",
    "E073": "no Dirichlet boundary (singular problem)",
    "E074": "invalid source term",
    "E080": "invalid output settings",
}


@dataclass(frozen=True)
class Issue:
    code: str
    where: str
    message: str

    def __str__(self):
        loc = f" at {self.where}" if self.where else ""
        return f"{self.code}{loc}: {self.message}"


class SceneValidationError(MeshgenError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class ProblemSpec:
    source: float
    boundary: dict
    tol: float = 1e-10
    maxiter: int = 10000


@dataclass(frozen=True)
class SceneSpec:
    blocks: tuple
    materials: dict
    problem: ProblemSpec = None
    merge_tol: float = None
    title: str = "meshgen"
    path: str = None
    notes: dict = field(default_factory=dict, compare=False)

    def block(self, name):
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


class _Parser:
    def __init__(self):
        self.issues = []
        self.named = {}

    def err(self, code, where, message):
        self.issues.append(Issue(code, where, message))

    # --- primitive readers ------------------------------------------------

    def number(self, x, where, code="E021", positive=False):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not np.isfinite(x):
            self.err(code, where, f"expected a finite number, got {x!r}")
            return None
        if positive and x <= 0:
            self.err(code, where, f"expected a positive number, got {x!r}")
            return None
        return float(x)

    def array(self, x, shape, where, code="E021"):
        try:
            a = np.asarray(x, dtype=float)
        except (TypeError, ValueError):
            self.err(code, where, f"expected numeric array of shape {shape}")
            return None
        ok = a.ndim == len(shape) and all(s is None or s == n for s, n in zip(shape, a.shape))
        if not ok or not np.all(np.isfinite(a)):
            self.err(code, where, f"expected finite numeric array of shape {shape}, got shape {a.shape}")
            return None
        return a

    # --- surfaces ---------------------------------------------------------

    def surface(self, d, where, default_range=None):
        if isinstance(d, str):
            if d not in self.named:
                self.err("E022", where, f"no surface named {d!r}")
                return None
            s = self.named[d]
            if s is None:
                return None
            return s
        if isinstance(d, (int, float)) and not isinstance(d, bool) and default_range is not None:
            return GraphSurface(default_range, offset=float(d))
        if not isinstance(d, dict) or "form" not in d:
            self.err("E021", where, "surface must be an object with a 'form' key")
            return None
        form = d["form"]
        try:
            if form == "plane":
                o = self.array(d.get("origin"), (3,), f"{where}.origin")
                u = self.array(d.get("u"), (3,), f"{where}.u")
                v = self.array(d.get("v"), (3,), f"{where}.v")
                return None if o is None or u is None or v is None else Plane(o, u, v)
            if form == "bilinear":
                c = self.array(d.get("corners"), (4, 3), f"{where}.corners")
                return None if c is None else BilinearPatch(*c)
            if form == "constant":
                v = self.array(d.get("vector"), (3,), f"{where}.vector")
                return None if v is None else constant_field(v)
            if form == "graph":
                rng = d.get("range", None if default_range is None else [list(r) for r in default_range])
                rng = self.array(rng, (2, 2), f"{where}.range")
                offset = self.number(d.get("offset", 0.0), f"{where}.offset")
                poly = self.array(d.get("poly", []) or np.zeros((0, 3)), (None, 3), f"{where}.poly")
                sine = self.array(d.get("sine", []) or np.zeros((0, 4)), (None, 4), f"{where}.sine")
                axis = d.get("axis", "z")
                if axis not in ("x", "y", "z"):
                    self.err("E021", f"{where}.axis", f"graph axis must be x, y or z, got {axis!r}")
                    return None
                if poly is not None and (np.any(poly[:, 1:] < 0) or np.any(poly[:, 1:] != np.round(poly[:, 1:]))):
                    self.err("E021", f"{where}.poly", "polynomial exponents must be nonnegative integers")
                    return None
                if rng is None or offset is None or poly is None or sine is None:
                    return None
                return GraphSurface(rng, offset, poly.tolist(), sine.tolist(), axis)
            if form == "discrete":
                pts = self.array(d.get("points"), (None, None, 3), f"{where}.points")
                return None if pts is None else DiscreteSurface(pts)
            if form == "loft":
                curves = d.get("curves")
                if not isinstance(curves, list) or len(curves) < 2:
                    self.err("E021", f"{where}.curves", "loft needs a list of at least two curves")
                    return None
                parsed = []
                for i, c in enumerate(curves):
                    cw = f"{where}.curves[{i}]"
                    if not isinstance(c, dict) or c.get("edge") not in EDGES:
                        self.err("E021", cw, f"curve needs 'surface' and 'edge' in {EDGES}")
                        return None
                    s = self.surface(c.get("surface"), f"{cw}.surface", default_range)
                    if s is None:
                        return None
                    parsed.append((s, c["edge"]))
                knots = d.get("knots")
                if knots is not None and not self.knots(knots, len(parsed), f"{where}.knots"):
                    return None
                return LoftSurface(parsed, knots)
        except ConstructionError as exc:
            self.err("E021", where, str(exc))
            return None
        self.err("E020", f"{where}.form", f"unknown surface form {form!r}")
        return None

    def knots(self, knots, count, where):
        k = self.array(knots, (None,), where, code="E031")
        if k is None:
            return None
        ok = True
        d = np.diff(k)
        if np.any(d < 0):
            self.err("E031", where, f"knots not ascending: {k.tolist()}")
            ok = False
        if np.any(d == 0):
            self.err("E032", where, f"duplicate knots: {k.tolist()}")
            ok = False
        if k.size < 2 or k[0] != 0.0 or k[-1] != 1.0:
            self.err("E033", where, f"knots must start at 0 and end at 1: {k.tolist()}")
            ok = False
        if count is not None and k.size != count:
            self.err("E034", where, f"{k.size} knots but {count} surfaces")
            ok = False
        if k.size - 1 > MAX_LAGRANGE_ORDER:
            self.err("E035", where, f"order {k.size - 1} exceeds the cap of {MAX_LAGRANGE_ORDER}")
            ok = False
        return k if ok else None

    # --- blocks -----------------------------------------------------------

    def projector(self, axis, d, where):
        if not isinstance(d, dict):
            self.err("E036", where, f"missing projector for {axis}")
            return None
        family = d.get("family")
        surfaces = d.get("surfaces")
        if family not in ("linear", "lagrangian", "hermite"):
            self.err("E030", f"{where}.family", f"unknown projector family {family!r}")
            return None
        if not isinstance(surfaces, list):
            self.err("E037", f"{where}.surfaces", "expected a list of surfaces")
            return None
        if family in ("linear", "hermite") and len(surfaces) != 2:
            self.err("E037", f"{where}.surfaces", f"{family} projector takes 2 surfaces, got {len(surfaces)}")
            return None
        knots = None
        if family == "lagrangian":
            knots = self.knots(d.get("knots"), len(surfaces), f"{where}.knots")
        surfs = [self.surface(s, f"{where}.surfaces[{i}]") for i, s in enumerate(surfaces)]
        derivs = []
        if family == "hermite":
            dd = d.get("derivatives")
            if not isinstance(dd, list) or len(dd) != 2:
                self.err("E037", f"{where}.derivatives", "hermite projector takes 2 derivative fields")
                return None
            derivs = [self.surface(s, f"{where}.derivatives[{i}]") for i, s in enumerate(dd)]
        if any(s is None for s in surfs + derivs) or (family == "lagrangian" and knots is None):
            return None
        if family == "linear":
            return ProjectorSpec.linear(axis, *surfs)
        if family == "lagrangian":
            return ProjectorSpec.lagrangian(axis, knots, surfs)
        return ProjectorSpec.hermite(axis, *surfs, *derivs)

    def grading(self, d, where):
        out = [None, None, None]
        if d is None:
            return out
        if not isinstance(d, dict):
            self.err("E040", where, "grading must map axis names to grading objects")
            return None
        ok = True
        for axis, g in d.items():
            gw = f"{where}.{axis}"
            if axis not in AXES:
                self.err("E040", gw, f"unknown axis {axis!r}")
                ok = False
                continue
            if not isinstance(g, dict):
                self.err("E040", gw, "grading entry must be an object")
                ok = False
                continue
            kind = g.get("type", "identity")
            param = {"power": "exponent", "tanh": "strength"}.get(kind)
            try:
                gr = Grading(kind, g.get(param) if param else None)
            except ConstructionError as exc:
                self.err("E040", gw, str(exc))
                ok = False
                continue
            if not gr.is_increasing():
                self.err("E040", gw, "grading map is not strictly increasing")
                ok = False
                continue
            out[AXES.index(axis)] = gr
        return out if ok else None

    def block(self, d, where, materials):
        bid = d.get("id")
        if not isinstance(bid, str) or not bid or ":" in bid:
            self.err("E011", f"{where}.id", "block id must be a nonempty string without ':'")
            bid = None
        mat = d.get("material")
        if mat not in materials:
            self.err("E012", f"{where}.material", f"material {mat!r} is not defined")
        res = d.get("resolution")
        res_ok = (
            isinstance(res, list)
            and len(res) == 3
            and all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in res)
        )
        if not res_ok:
            self.err("E013", f"{where}.resolution", f"resolution must be three positive integers, got {res!r}")
        grading = self.grading(d.get("grading"), f"{where}.grading")
        shapes = [k for k in ("box", "layer", "projectors") if k in d]
        if len(shapes) != 1:
            self.err("E014", where, f"found {shapes or 'none'}")
            return None
        shape = shapes[0]
        kw = {}
        if shape == "box":
            box = d["box"]
            lo = self.array(box.get("min") if isinstance(box, dict) else None, (3,), f"{where}.box.min", "E015")
            hi = self.array(box.get("max") if isinstance(box, dict) else None, (3,), f"{where}.box.max", "E015")
            if lo is not None and hi is not None and np.any(hi <= lo):
                self.err("E015", f"{where}.box", "box needs min < max in every coordinate")
                lo = None
            make = None if lo is None or hi is None else (lambda **k: box_block(lo, hi, **k))
        elif shape == "layer":
            make = self.layer(d["layer"], f"{where}.layer")
        else:
            pd = d["projectors"]
            if not isinstance(pd, dict):
                self.err("E036", f"{where}.projectors", "expected an object keyed by axis")
                return None
            projs = [self.projector(a, pd.get(a), f"{where}.projectors.{a}") for a in AXES]
            make = None if any(p is None for p in projs) else (lambda **k: BlockSpec(*projs, **k))
        if make is None or bid is None or not res_ok or grading is None:
            return None
        try:
            b = make(resolution=tuple(res), material=mat, grading=tuple(grading), name=bid)
        except ConstructionError as exc:
            self.err("E021", where, str(exc))
            return None
        for desc, gap in b.conformity_issues():
            self.err("E050", where, f"{desc}: gap {gap:.3e}")
        return b

    def layer(self, d, where):
        if not isinstance(d, dict):
            self.err("E015", where, "layer must be an object")
            return None
        xr = self.array(d.get("x"), (2,), f"{where}.x", "E015")
        yr = self.array(d.get("y"), (2,), f"{where}.y", "E015")
        if xr is None or yr is None:
            return None
        if xr[1] <= xr[0] or yr[1] <= yr[0]:
            self.err("E015", where, "layer ranges must be increasing")
            return None
        rng = (tuple(xr), tuple(yr))
        bottom = self.surface(d.get("bottom"), f"{where}.bottom", rng)
        top = self.surface(d.get("top"), f"{where}.top", rng)
        horizons = []
        raw = d.get("horizons", [])
        if not isinstance(raw, list):
            self.err("E015", f"{where}.horizons", "horizons must be a list")
            return None
        for i, h in enumerate(raw):
            hw = f"{where}.horizons[{i}]"
            if not isinstance(h, dict):
                self.err("E015", hw, "horizon must be an object with 'knot' and 'surface'")
                return None
            k = self.number(h.get("knot"), f"{hw}.knot", "E031")
            s = self.surface(h.get("surface"), f"{hw}.surface", rng)
            if k is None or s is None:
                return None
            horizons.append((k, s))
        if horizons:
            knots = [0.0] + [k for k, _ in horizons] + [1.0]
            if self.knots(knots, None, f"{where}.horizons") is None:
                return None
        if bottom is None or top is None:
            return None
        return lambda **k: layer_block(xr, yr, bottom, top, horizons, **k)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SceneValidationError([Issue("E002", str(path), f"cannot read file: {exc.strerror}")]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneValidationError(
            [Issue("E001", f"line {exc.lineno}, column {exc.colno}", exc.msg)]
        ) from None


def parse_spec(path):
    """Read, validate and build a scene file."""
    return build_scene(_load_json(path), path=str(path))


def build_scene(data, path=None):
    """Validate and build a scene from already-decoded JSON data."""
    p = _Parser()
    if not isinstance(data, dict):
        raise SceneValidationError([Issue("E002", "", "top level must be an object")])

    materials = {}
    raw_mats = data.get("materials", {})
    if not isinstance(raw_mats, dict):
        p.err("E002", "materials", "materials must be an object")
        raw_mats = {}
    for name, m in raw_mats.items():
        k = m.get("permeability") if isinstance(m, dict) else m
        k = p.number(k, f"materials.{name}.permeability", "E060", positive=True)
        materials[name] = k

    raw_surfaces = data.get("surfaces", {})
    if not isinstance(raw_surfaces, dict):
        p.err("E002", "surfaces", "surfaces must be an object of named surfaces")
        raw_surfaces = {}
    for name, sd in raw_surfaces.items():
        p.named[name] = None
        p.named[name] = p.surface(sd, f"surfaces.{name}")

    raw_blocks = data.get("blocks")
    blocks = []
    if not isinstance(raw_blocks, list) or not raw_blocks:
        p.err("E002", "blocks", "expected a nonempty list of blocks")
        raw_blocks = []
    seen = set()
    for i, bd in enumerate(raw_blocks):
        where = f"blocks[{i}]"
        if not isinstance(bd, dict):
            p.err("E002", where, "block must be an object")
            continue
        bid = bd.get("id")
        if isinstance(bid, str):
            if bid in seen:
                p.err("E010", f"{where}.id", f"duplicate block id {bid!r}")
            seen.add(bid)
        b = p.block(bd, where, materials)
        if b is not None:
            blocks.append(b)

    problem = None
    if "problem" in data:
        problem = _problem(p, data["problem"], seen)

    merge_tol = None
    title = "meshgen"
    out = data.get("output", {})
    if not isinstance(out, dict):
        p.err("E080", "output", "output must be an object")
    else:
        if out.get("merge_tol") is not None:
            merge_tol = p.number(out["merge_tol"], "output.merge_tol", "E080", positive=True)
        title = out.get("title", title)
        if not isinstance(title, str) or "\n" in title or len(title) > 200:
            p.err("E080", "output.title", "title must be a single-line string of at most 200 characters")

    if p.issues:
        raise SceneValidationError(p.issues)
    return SceneSpec(tuple(blocks), materials, problem, merge_tol, title, path)


def _problem(p, d, block_ids):
    if not isinstance(d, dict):
        p.err("E002", "problem", "problem must be an object")
        return None
    src = d.get("source", 0.0)
    src = p.number(src, "problem.source", "E074")
    tol = p.number(d.get("tolerance", 1e-10), "problem.tolerance", "E072", positive=True)
    maxiter = d.get("max_iterations", 10000)
    if isinstance(maxiter, bool) or not isinstance(maxiter, int) or maxiter < 1:
        p.err("E072", "problem.max_iterations", f"expected a positive integer, got {maxiter!r}")
        maxiter = None
    bcs = {}
    raw = d.get("boundary", {})
    if not isinstance(raw, dict):
        p.err("E070", "problem.boundary", "boundary must map tags to conditions")
        raw = {}
    for tag, bc in raw.items():
        where = f"problem.boundary.{tag}"
        blk, _, side = tag.rpartition(":")
        if side not in SIDES or (blk and blk not in block_ids):
            p.err("E071", where, f"tag {tag!r} names no block side (sides are {', '.join(SIDES)})")
            continue
        kind = bc.get("type") if isinstance(bc, dict) else None
        if kind not in ("dirichlet", "neumann"):
            p.err("E070", where, f"unknown boundary condition type {kind!r}")
            continue
        if "linear" in bc:
            coef = p.array(bc["linear"], (4,), f"{where}.linear", "E070")
            if coef is None:
                continue
            value = _LinearField(tuple(coef.tolist()))
        else:
            value = p.number(bc.get("value"), f"{where}.value", "E070")
            if value is None:
                continue
        bcs[tag] = Dirichlet(value) if kind == "dirichlet" else Neumann(value)
    if not any(isinstance(b, Dirichlet) for b in bcs.values()):
        p.err("E073", "problem.boundary", "at least one Dirichlet condition is required")
    if src is None or tol is None or maxiter is None:
        return None
    return ProblemSpec(src, bcs, tol, maxiter)


@dataclass(frozen=True)
class _LinearField:
    """a*x + b*y + c*z + d evaluated at face centers."""

    coef: tuple

    def __call__(self, pts):
        a, b, c, d = self.coef
        pts = np.asarray(pts, dtype=float)
        return a * pts[:, 0] + b * pts[:, 1] + c * pts[:, 2] + d


def generate_grids(scene, threads=1):
    """Grids of every block, in declaration order; blocks run in parallel when ``threads > 1``."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda b: generate_grid(b, check=False), scene.blocks))
    return [generate_grid(b, check=False) for b in scene.blocks]


def build_mesh(scene, threads=1):
    return assemble_multiblock(generate_grids(scene, threads), scene.merge_tol)


def make_problem(scene, mesh):
    if scene.problem is None:
        raise MeshgenError("scene has no problem section")
    pr = scene.problem
    return PressureProblem(
        mesh, PermeabilityField(dict(scene.materials)), pr.source, dict(pr.boundary), pr.tol, pr.maxiter
    )
