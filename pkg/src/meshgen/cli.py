"""Command line driver: ``meshgen {generate,solve,inspect,check} <scene.json>``.

Exit codes: 0 success, 1 scene validation failure, 2 runtime failure.
Diagnostics go to stderr; ``--report`` writes a JSON report to stdout.
Set ``MESHGEN_LOG`` (DEBUG, INFO, WARNING, ...) to change verbosity.
"""

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from .errors import MeshgenError
from .fvsolve import solve
from .multiblock import assemble_multiblock, interface_report
from .scene import CODES, SceneValidationError, build_mesh, generate_grids, make_problem, parse_spec
from .tfi import jacobian_determinant
from .vtk import export_vtk

log = logging.getLogger("meshgen")


def _setup_logging():
    level = os.environ.get("MESHGEN_LOG", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.captureWarnings(True)


def _cell_center_params(b, grid):
    mids = [0.5 * (t[1:] + t[:-1]) for t in grid.params]
    Z, Y, X = np.meshgrid(mids[2], mids[1], mids[0], indexing="ij")
    return X, Y, Z


def mesh_report(scene, grids, mesh):
    blocks = []
    for b, g in zip(scene.blocks, grids):
        n, c, f = g.counts()
        det = jacobian_determinant(b, *_cell_center_params(b, g))
        blocks.append(
            {
                "id": b.name,
                "material": b.material,
                "resolution": list(b.resolution),
                "nodes": n,
                "cells": c,
                "faces": f,
                "min_jacobian": float(det.min()),
                "inverted_cells": int(np.count_nonzero(det <= 0)),
            }
        )
    vol = mesh.cell_volume
    return {
        "blocks": blocks,
        "interfaces": interface_report(mesh),
        "volume": {"min": float(vol.min()), "max": float(vol.max()), "total": float(vol.sum())},
    }


def _print_inspect(rep, out):
    for b in rep["blocks"]:
        print(
            f"block {b['id']} ({b['material']}, {'x'.join(map(str, b['resolution']))}): "
            f"nodes {b['nodes']}, cells {b['cells']}, faces {b['faces']}",
            file=out,
        )
    ir = rep["interfaces"]
    print(f"mesh: nodes {ir['nodes']}, cells {ir['cells']}, faces {ir['faces']} "
          f"({ir['interior_faces']} interior, {ir['boundary_faces']} boundary)", file=out)
    print(f"shared across interfaces: nodes {ir['shared']['nodes']}, faces {ir['shared']['faces']}", file=out)
    for p in ir["pairs"]:
        print(f"interface {p['blocks'][0]}|{p['blocks'][1]}: shared nodes {p['shared_nodes']}, "
              f"faces {p['faces']}, max gap {p['max_gap']:.3e}", file=out)
    v = rep["volume"]
    print(f"cell volume: min {v['min']:.6g}, max {v['max']:.6g}, total {v['total']:.6g}", file=out)
    worst = min(b["min_jacobian"] for b in rep["blocks"])
    bad = sum(b["inverted_cells"] for b in rep["blocks"])
    status = "all positive" if bad == 0 else f"{bad} inverted cell(s)"
    print(f"min jacobian at cell centers: {worst:.6g} ({status})", file=out)


def cmd_check(args):
    scene = parse_spec(args.scene_file)
    print(f"{args.scene_file}: ok ({len(scene.blocks)} block(s))", file=sys.stderr)
    return 0


def cmd_generate(args):
    scene = parse_spec(args.scene_file)
    grids = generate_grids(scene, args.threads)
    mesh = assemble_multiblock(grids, scene.merge_tol)
    export_vtk(mesh, args.output, title=scene.title)
    log.info("wrote %s (%d nodes, %d cells)", args.output, mesh.n_nodes, mesh.n_cells)
    if args.report:
        json.dump(mesh_report(scene, grids, mesh), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_solve(args):
    scene = parse_spec(args.scene_file)
    mesh = build_mesh(scene, args.threads)
    result = solve(make_problem(scene, mesh))
    p = result["pressure"]
    export_vtk(mesh, args.output, {"pressure": p}, title=scene.title)
    log.info("solved in %d CG iterations", result["iterations"])
    if args.report:
        rep = {
            "cells": mesh.n_cells,
            "iterations": result["iterations"],
            "relative_residual": result["relative_residual"],
            "pressure": {"min": float(p.min()), "max": float(p.max())},
            "max_balance_residual": float(np.abs(result["residual"]).max()),
        }
        json.dump(rep, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_inspect(args):
    scene = parse_spec(args.scene_file)
    grids = generate_grids(scene, args.threads)
    mesh = assemble_multiblock(grids, scene.merge_tol)
    rep = mesh_report(scene, grids, mesh)
    if args.json:
        json.dump(rep, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        _print_inspect(rep, sys.stdout)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="maximum number of blocks generated in parallel")
    ap = argparse.ArgumentParser(prog="meshgen", description="Block-structured hexahedral mesh generation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="generate the mesh and write VTK")
    p.add_argument("scene_file", metavar="scene")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", action="store_true", help="print a JSON report to stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="generate, solve the pressure problem and write VTK")
    p.add_argument("scene_file", metavar="scene")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("inspect", parents=[common], help="print mesh counts, interfaces and quality")
    p.add_argument("scene_file", metavar="scene")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("check", parents=[common], help="validate a scene file")
    p.add_argument("scene_file", metavar="scene")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except SceneValidationError as exc:
        for issue in exc.issues:
            print(f"error: {issue} [{CODES.get(issue.code, '')}]", file=sys.stderr)
        return 1
    except (MeshgenError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
