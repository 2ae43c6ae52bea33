import numpy as np
import pytest

from meshgen.builders import box_block
from meshgen.geometry import hex_volume
from meshgen.multiblock import assemble_multiblock
from meshgen.tfi import generate_grid
from meshgen.vtk import VTK_ORDER, export_vtk, read_vtk_cell_data


def mesh_of(*blocks):
    return assemble_multiblock([generate_grid(b) for b in blocks])


def test_single_cube(tmp_path):
    path = tmp_path / "cube.vtk"
    export_vtk(mesh_of(box_block(name="c", material="rock")), path)
    text = path.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "POINTS 8 double" in text and "CELLS 1 9" in text
    d = read_vtk_cell_data(path)
    assert d["types"].tolist() == [12]
    assert d["cell_data"]["volume"].tolist() == [1.0]


def test_vtk_corner_order_is_positive(tmp_path):
    # VTK hexahedron: bottom quad counterclockwise seen from the top, then the top quad
    path = tmp_path / "c.vtk"
    export_vtk(mesh_of(box_block(hi=(2, 3, 4))), path)
    d = read_vtk_cell_data(path)
    p = d["points"][d["cells"][0]]
    bottom, top = p[:4], p[4:]
    n = np.cross(bottom[1] - bottom[0], bottom[2] - bottom[1])
    assert n @ (top.mean(0) - bottom.mean(0)) > 0
    np.testing.assert_array_equal(top[:, :2], bottom[:, :2])
    assert sorted(VTK_ORDER) == list(range(8))


def test_two_block_stack(tmp_path):
    m = mesh_of(
        box_block((0, 0, 0), (1, 1, 1), (2, 2, 1), name="low", material="shale"),
        box_block((0, 0, 1), (1, 1, 2), (2, 2, 1), name="high", material="sand"),
    )
    path = tmp_path / "s.vtk"
    export_vtk(m, path, {"pressure": np.linspace(0, 1, 8)}, title="stack")
    d = read_vtk_cell_data(path)
    assert len(d["points"]) == m.n_nodes and len(d["cells"]) == 8
    assert d["cell_data"]["material"].tolist() == [0] * 4 + [1] * 4
    assert d["cell_data"]["block"].tolist() == [0] * 4 + [1] * 4
    np.testing.assert_array_equal(d["cell_data"]["pressure"], np.linspace(0, 1, 8))
    assert path.read_text().splitlines()[1] == "stack; materials: 0=shale 1=sand"


def test_round_trip_precision(tmp_path):
    m = mesh_of(box_block((0.1, 0.2, 0.3), (1 / 3, 2 / 7, 0.9), (2, 3, 1)))
    path = tmp_path / "p.vtk"
    export_vtk(m, path)
    d = read_vtk_cell_data(path)
    np.testing.assert_array_equal(d["points"], m.points)
    np.testing.assert_array_equal(d["cell_data"]["volume"], m.cell_volume)
    np.testing.assert_allclose(hex_volume(d["points"][d["cells"][:, np.argsort(VTK_ORDER)]]), m.cell_volume, rtol=1e-14)


def test_deterministic(tmp_path):
    a, b = tmp_path / "a.vtk", tmp_path / "b.vtk"
    export_vtk(mesh_of(box_block(resolution=(3, 2, 2))), a)
    export_vtk(mesh_of(box_block(resolution=(3, 2, 2))), b)
    assert a.read_bytes() == b.read_bytes()


def test_bad_field(tmp_path):
    with pytest.raises(ValueError):
        export_vtk(mesh_of(box_block()), tmp_path / "x.vtk", {"p": [1.0, 2.0]})


def test_unwritable(tmp_path):
    with pytest.raises(OSError):
        export_vtk(mesh_of(box_block()), tmp_path / "missing" / "x.vtk")
