"""Acceptance criteria 1-8, each reported as one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v``; the lines appear in the
"acceptance criteria" section of the terminal summary.
"""

import itertools
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from meshgen._basis import lagrange_weights, lagrange_weights_classical
from meshgen.builders import affine_block, box_block, layer_block
from meshgen.fvsolve import Dirichlet, PressureProblem, face_pressures, solve
from meshgen.geometry import (
    HEX_FACES,
    cell_face_normals,
    face_normal_covariant,
    hex_volume,
    unit_normal,
)
from meshgen.multiblock import assemble_multiblock, interface_report
from meshgen.projectors import ProjectorSpec, eval_projector, eval_projector_axis_derivative, tensor_product
from meshgen.scene import build_mesh, make_problem, parse_spec
from meshgen.surfaces import GraphSurface, constant_field
from meshgen.tfi import boolean_sum, boolean_sum_eval, generate_grid, mesh_counts

from acceptance_log import record
from oracles import (
    AnalyticMap,
    brute_force_unique,
    gauss_legendre_3d,
    lattice_counts,
    mapped_block,
    one_sided_difference,
    trilinear_volume,
)

ROOT = Path(__file__).resolve().parent.parent
SCENES = ROOT / "scenes"
CUBE = np.array([(i & 1, (i >> 1) & 1, (i >> 2) & 1) for i in range(8)], dtype=float)
FAMILIES = [
    ("linear", "linear", "linear"),
    ("lagrangian", "linear", "hermite"),
    ("hermite", "lagrangian", "linear"),
    ("linear", "hermite", "lagrangian"),
    ("lagrangian", "lagrangian", "lagrangian"),
]


def curved_block(seed, resolution=(1, 1, 1)):
    F = AnalyticMap.random(np.random.default_rng(seed))
    return mapped_block(F, FAMILIES[seed % 5], knots=(0.0, 0.35, 0.7, 1.0), resolution=resolution)


def cells_of(grid):
    return grid.points[grid.cell_nodes()]


def test_criterion_1_projector_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    checks = []

    card, unity, dual = 0.0, 0.0, 0.0
    for n in range(1, 9):
        knots = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 0.95, n - 1)), [1.0]])
        card = max(card, float(np.max(np.abs(lagrange_weights(knots, knots) - np.eye(n + 1)))))
        t = rng.uniform(0, 1, 1000)
        b = lagrange_weights(knots, t)
        c = lagrange_weights_classical(knots, t)
        unity = max(unity, float(np.max(np.abs(b.sum(-1) - 1))))
        dual = max(dual, float(np.max(np.abs(b - c) / np.abs(c).max(-1, keepdims=True))))
    checks += [
        ("cardinality", card == 0.0, f"max deviation {card:.2e}"),
        ("partition of unity <= 1e-12", unity <= 1e-12, f"{unity:.2e}"),
        ("classical vs barycentric <= 1e-10 rel", dual <= 1e-10, f"{dual:.2e}"),
    ]

    b = curved_block(102)
    px, pe, pk = b.projectors
    x, e, k = rng.uniform(0, 1, (3, 128))
    worst_idem = max(float(np.max(np.abs(boolean_sum([p, p], x, e, k) - eval_projector(p, x, e, k)))) for p in b.projectors)
    ref = boolean_sum([px, pe, pk], x, e, k)
    worst_comm = max(
        float(np.max(np.abs(boolean_sum(list(perm), x, e, k) - ref))) for perm in itertools.permutations(b.projectors)
    )
    worst_comm = max(worst_comm, float(np.max(np.abs(boolean_sum_eval(b, x, e, k) - ref))))
    tp_comm = max(
        float(np.max(np.abs(tensor_product(a, c, x, e, k) - tensor_product(c, a, x, e, k))))
        for a, c in itertools.combinations(b.projectors, 2)
    )
    tp_self = max(float(np.max(np.abs(tensor_product(p, p, x, e, k) - eval_projector(p, x, e, k)))) for p in b.projectors)
    checks += [
        ("boolean-sum idempotence", worst_idem <= 1e-12, f"{worst_idem:.2e}"),
        ("boolean-sum commutativity", worst_comm <= 1e-12, f"{worst_comm:.2e}"),
        ("tensor-product commutativity", tp_comm <= 1e-12, f"{tp_comm:.2e}"),
        ("P(xi o xi) = P(xi)", tp_self <= 1e-12, f"{tp_self:.2e}"),
    ]
    elapsed = time.perf_counter() - t0
    checks.append(("runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s"))
    assert record(1, "projector algebra", checks)


def test_criterion_2_boundary_reproduction():
    t0 = time.perf_counter()
    checks = []
    worst = 0.0
    for seed in range(5):
        b = curved_block(200 + seed, (8, 8, 8))
        g = generate_grid(b)
        L = g.lattice()
        for axis, p in enumerate(b.projectors):
            U, V = np.meshgrid(*[t for a, t in enumerate(g.params) if a != axis], indexing="ij")
            for s, idx in ((p.surfaces[0], 0), (p.surfaces[-1], -1)):
                worst = max(worst, float(np.max(np.abs(np.take(L, idx, axis=axis) - s(U, V)))))
    checks.append(("curved boundary nodes on surfaces <= 1e-12", worst <= 1e-12, f"{worst:.2e}"))

    rng = np.random.default_rng(210)
    worst = 0.0
    for _ in range(5):
        A = np.eye(3) + 0.3 * rng.uniform(-1, 1, (3, 3))
        c = rng.uniform(-3, 3, 3)
        g = generate_grid(affine_block(A, c, (8, 8, 8)))
        ref = np.stack(np.meshgrid(*g.params, indexing="ij"), -1) @ A.T + c
        t = rng.uniform(0, 1, (500, 3))
        worst = max(worst, float(np.max(np.abs(g.lattice() - ref))))
        worst = max(worst, float(np.max(np.abs(boolean_sum_eval(affine_block(A, c), *t.T) - (t @ A.T + c)))))
    checks.append(("affine map reproduced <= 1e-12", worst <= 1e-12, f"{worst:.2e}"))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime < 5 s", elapsed < 5.0, f"{elapsed:.2f} s"))
    assert record(2, "TFI boundary reproduction", checks)


def test_criterion_3_hermite_contract():
    checks = []
    s0 = GraphSurface(((0, 1), (0, 1)), 0.0, sine=[(0.1, 2.0, 1.5, 0.0)])
    s1 = GraphSurface(((0, 1), (0, 1)), 1.0, sine=[(0.1, 1.0, 2.5, 0.4)])
    d0, d1 = constant_field((0.3, 0.0, 1.4)), constant_field((-0.2, 0.1, 0.6))
    p = ProjectorSpec.hermite("kappa", s0, s1, d0, d1)
    u, v = np.random.default_rng(300).uniform(0, 1, (2, 100))
    exact_ends = (
        np.array_equal(eval_projector(p, u, v, 0.0), s0(u, v))
        and np.array_equal(eval_projector(p, u, v, 1.0), s1(u, v))
        and np.array_equal(eval_projector_axis_derivative(p, u, v, 0.0), d0(u, v))
        and np.array_equal(eval_projector_axis_derivative(p, u, v, 1.0), d1(u, v))
    )
    checks.append(("endpoint values and derivatives exact", exact_ends, "mismatch"))
    for end, sign, field in ((0.0, 1.0, d0), (1.0, -1.0, d1)):
        target = field(0.35, 0.65)
        errs = [
            np.linalg.norm(one_sided_difference(lambda t: eval_projector(p, 0.35, 0.65, t), end, sign * h) - target)
            for h in (0.02, 0.01)
        ]
        ratio = errs[0] / errs[1]
        checks.append((f"FD ratio at kappa={end:g} in [3, 5]", 3.0 <= ratio <= 5.0, f"{ratio:.3f}"))
    assert record(3, "Hermite contract", checks)


def test_criterion_4_geometry():
    checks = []
    v = hex_volume(CUBE)
    checks.append(("unit cube volume == 1", v == 1.0, repr(v)))

    rng = np.random.default_rng(400)
    worst = 0.0
    for _ in range(20):
        A = np.eye(3) + 0.4 * rng.uniform(-1, 1, (3, 3))
        c = CUBE @ A.T + rng.uniform(-10, 10, 3)
        exact = trilinear_volume(c)
        worst = max(worst, abs(hex_volume(c) - exact) / exact)
    checks.append(("6-tet sum vs exact, 20 affine cells, <= 1e-12 rel", worst <= 1e-12, f"{worst:.2e}"))

    amp = 0.2
    top = GraphSurface(((0, 1), (0, 1)), 1.0, sine=[(amp, np.pi, 0.0, 0.0)])
    exact = gauss_legendre_3d(lambda x, y, z: 1.0 + amp * np.sin(np.pi * x), order=24)
    errs = []
    for n in (4, 8, 16, 32):
        g = generate_grid(layer_block((0, 1), (0, 1), 0.0, top, resolution=(n, n, 2)))
        errs.append(abs(float(hex_volume(cells_of(g)).sum()) - exact))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    checks.append(("curved volume ratio in [3, 5]", all(3.0 <= r <= 5.0 for r in ratios), ", ".join(f"{r:.3f}" for r in ratios)))

    worst = 0.0
    for seed in range(5):
        g = generate_grid(curved_block(410 + seed, (4, 4, 4)))
        cells = cells_of(g)
        scale = np.ptp(cells, axis=1).max(axis=1)
        total = np.abs(cell_face_normals(cells).sum(axis=1)).max(axis=1)
        worst = max(worst, float(np.max(total / scale**2)))
    checks.append(("closed-surface normal sum <= 1e-12 scale^2", worst <= 1e-12, f"{worst:.2e}"))

    angles = []
    k1 = list(HEX_FACES).index(("kappa", 1))
    for n in (32, 64, 128, 256, 512):
        b = layer_block((0, 1), (0, 1), 0.0, top, resolution=(n, 1, 1))
        diag = cell_face_normals(cells_of(generate_grid(b)))[:, k1]
        cov = face_normal_covariant(b, (np.arange(n) + 0.5) / n, 0.5, 1.0, "kappa")
        cosang = np.clip(np.einsum("ij,ij->i", unit_normal(diag), unit_normal(cov)), -1, 1)
        angles.append(float(np.max(np.arccos(cosang))))
    shrinking = all(a > b for a, b in zip(angles, angles[1:]))
    checks.append(
        ("covariant vs diagonal normal <= 1e-6 rad under refinement", shrinking and angles[-1] <= 1e-6,
         ", ".join(f"{a:.1e}" for a in angles))
    )
    assert record(4, "geometry", checks)


def test_criterion_5_counting():
    bad = [r for r in itertools.product(range(1, 5), repeat=3) if mesh_counts(r) != lattice_counts(*r)]
    assert record(5, "counting, 64 cases vs brute-force enumeration", [("all match", not bad, f"mismatches {bad}")])


def test_criterion_6_multiblock():
    checks = []
    g0 = generate_grid(box_block((0, 0, 0), (1, 1, 1), (2, 2, 1), name="lower"))
    g1 = generate_grid(box_block((0, 0, 1), (1, 1, 2), (2, 2, 1), name="upper"))
    m = assemble_multiblock([g0, g1], merge_tol=1e-9)
    checks += [
        ("2-block stack: 45 nodes", m.n_nodes == 45, f"got {m.n_nodes}"),
        ("2-block stack: 8 cells", m.n_cells == 8, f"got {m.n_cells}"),
        ("2-block stack: 4 interface faces", len(m.interface_faces("lower", "upper")) == 4,
         f"got {len(m.interface_faces('lower', 'upper'))}"),
    ]

    scene = parse_spec(SCENES / "nine_layer.json")
    mesh = build_mesh(scene)
    rep = interface_report(mesh)
    cells = [int(np.prod(b.resolution)) for b in scene.blocks]
    dense = sum(c > min(cells) for c in cells)
    checks += [
        ("nine-layer: 9 blocks", len(scene.blocks) == 9, f"got {len(scene.blocks)}"),
        ("nine-layer: 8 interfaces", len(rep["pairs"]) == 8, f"got {len(rep['pairs'])}"),
        ("nine-layer: 4 denser layers", dense == 4, f"got {dense}"),
    ]

    worst = []
    for n_layers, res in [(2, (2, 2, 1)), (3, (3, 2, 2)), (4, (4, 3, 2))]:
        hz = [GraphSurface(((0, 2), (0, 1)), float(k), sine=[(0.15, 2.0, 3.0, 0.3 * k)]) for k in range(n_layers + 1)]
        grids = [generate_grid(layer_block((0, 2), (0, 1), hz[k], hz[k + 1], resolution=res, name=f"L{k}")) for k in range(n_layers)]
        pts = np.concatenate([g.points for g in grids])
        mm = assemble_multiblock(grids)
        kept, _ = brute_force_unique(pts, mm.merge_tol)
        same = len(pts) <= 500 and mm.n_nodes == len(kept) and np.array_equal(
            np.sort(mm.points, axis=0), np.sort(pts[kept], axis=0)
        )
        worst.append(same)
    checks.append(("dedup agrees with O(N^2) oracle", all(worst), f"{worst}"))
    assert record(6, "multiblock assembly", checks)


def test_criterion_7_fv_demo():
    t0 = time.perf_counter()
    checks = []
    sides = ("xi0", "xi1", "eta0", "eta1", "kappa0", "kappa1")

    m = assemble_multiblock([generate_grid(box_block((0, 0, 0), (1, 1, 1), (4, 4, 4), material="r"))])
    grad = np.array([0.7, -1.3, 2.1])

    def p_lin(x):
        return 3.0 + x @ grad

    res = solve(PressureProblem(m, {"r": 1.0}, 0.0, {s: Dirichlet(p_lin) for s in sides}, tol=1e-13))
    err = float(np.max(np.abs(res["pressure"] - p_lin(m.cell_center))))
    checks.append(("linear pressure at centers <= 1e-8", err <= 1e-8, f"{err:.2e}"))

    m = assemble_multiblock([generate_grid(box_block(resolution=(1, 1, 2), material="r"))])
    res = solve(PressureProblem(m, {"r": 1.0}, 0.0, {"kappa0": Dirichlet(1.0), "kappa1": Dirichlet(0.0)}, tol=1e-12))
    err = float(np.max(np.abs(res["pressure"] - [0.75, 0.25])))
    checks.append(("2-cell column (0.75, 0.25) <= 1e-10", err <= 1e-10, f"{err:.2e}"))

    K1, K2, L1, L2 = 0.05, 3.0, 0.4, 0.6
    grids = [
        generate_grid(box_block((0, 0, 0), (1, 1, L1), (2, 2, 3), material="a", name="lower")),
        generate_grid(box_block((0, 0, L1), (1, 1, L1 + L2), (2, 2, 5), material="b", name="upper")),
    ]
    m = assemble_multiblock(grids)
    prob = PressureProblem(m, {"a": K1, "b": K2}, 0.0, {"lower:kappa0": Dirichlet(1.0), "upper:kappa1": Dirichlet(0.0)}, tol=1e-14)
    res = solve(prob)
    q = 1.0 / (L1 / K1 + L2 / K2)
    fp = face_pressures(prob, res["pressure"], res["system"])[m.interface_faces("lower", "upper")]
    err = float(np.max(np.abs(fp - (1.0 - q * L1 / K1))))
    checks.append(("harmonic interface pressure <= 1e-10", err <= 1e-10, f"{err:.2e}"))

    scene = parse_spec(SCENES / "nine_layer.json")
    prob = make_problem(scene, build_mesh(scene))
    res = solve(prob)
    bal = float(np.max(np.abs(res["residual"])))
    scale = float(np.max(np.abs(res["system"].rhs)))
    net = abs(float(res["fluxes"][prob.mesh.boundary].sum()))
    ok = bal <= 10 * prob.tol * scale and net <= 10 * prob.tol * scale * prob.mesh.n_cells
    checks.append(("global conservation within solver tolerance", ok, f"max cell imbalance {bal:.2e}, net {net:.2e}"))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime < 5 s", elapsed < 5.0, f"{elapsed:.2f} s"))
    assert record(7, "finite-volume demo", checks)


def test_criterion_8_determinism(tmp_path):
    exe = shutil.which("meshgen")
    cmd = [exe] if exe else [sys.executable, "-m", "meshgen.cli"]
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.vtk"
        r = subprocess.run(cmd + ["generate", str(SCENES / "nine_layer.json"), "-o", str(out)], capture_output=True, text=True)
        outs.append(out.read_bytes() if r.returncode == 0 else None)
    same = outs[0] is not None and outs[0] == outs[1]
    assert record(8, "determinism of meshgen generate", [("byte-identical VTK", same, "outputs differ or command failed")])
