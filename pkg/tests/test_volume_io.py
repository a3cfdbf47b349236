"""Tests for STL loading, voxelization and the volume file format."""
import math

import numpy as np
import pytest
import stl
from stl import mesh as stl_mesh

from app.models.lattice import IndicatorGrid, Lattice, ScalarField
from app.models.mesh import TriangleMesh
from app.services.volume_io import (
    boundary_edge_count,
    export_vtk,
    load_mesh,
    read_grid,
    read_volume,
    voxelize,
    write_volume,
    write_volumes,
)
from app.utils.exceptions import (
    GeometryException,
    InputException,
    MeshParseException,
    NonWatertightMeshWarning,
    UsageException,
    VolumeFormatException,
)
from tests.geometry import ascii_stl, binary_stl, cube_triangles, random_grid, sphere_triangles


# ── mesh input ───────────────────────────────────────────────────────────────

def test_load_ascii_cube(tmp_path):
    path = tmp_path / "cube.stl"
    path.write_text(ascii_stl(cube_triangles(10.0), name="block"), encoding="utf-8")
    mesh = load_mesh(path)
    assert len(mesh) == 12
    assert mesh.name == "block"
    lo, hi = mesh.bounds
    assert lo.tolist() == [0.0, 0.0, 0.0] and hi.tolist() == [10.0, 10.0, 10.0]


def test_load_binary_cube(tmp_path):
    path = tmp_path / "cube.stl"
    path.write_bytes(binary_stl(cube_triangles(10.0)))
    mesh = load_mesh(path)
    assert len(mesh) == 12
    assert mesh.name == "cube"
    assert np.array_equal(mesh.triangles, cube_triangles(10.0))


@pytest.mark.parametrize("mode", [stl.Mode.ASCII, stl.Mode.BINARY])
def test_load_mesh_written_by_numpy_stl(tmp_path, mode):
    triangles = cube_triangles(10.0, offset=(1.0, -2.0, 0.5))
    written = stl_mesh.Mesh(np.zeros(len(triangles), dtype=stl_mesh.Mesh.dtype))
    written.vectors[:] = triangles
    path = tmp_path / "exported.stl"
    written.save(str(path), mode=mode)
    mesh = load_mesh(path)
    assert len(mesh) == 12
    assert np.allclose(mesh.triangles, triangles)
    assert boundary_edge_count(mesh) == 0


def test_truncated_binary_reports_offset(tmp_path):
    path = tmp_path / "cut.stl"
    path.write_bytes(binary_stl(cube_triangles())[:-10])
    with pytest.raises(MeshParseException) as excinfo:
        load_mesh(path)
    assert excinfo.value.byte_offset == 84 + 50 * 12 - 10
    assert "at byte" in excinfo.value.detail


def test_truncated_ascii_reports_end(tmp_path):
    text = ascii_stl(cube_triangles())
    cut = text[: text.index("endloop", len(text) // 2)]
    path = tmp_path / "cut.stl"
    path.write_text(cut, encoding="utf-8")
    with pytest.raises(MeshParseException) as excinfo:
        load_mesh(path)
    assert excinfo.value.byte_offset == len(cut.encode())


def test_bad_ascii_keyword_reports_its_offset(tmp_path):
    text = ascii_stl(cube_triangles()).replace("outer loop", "outer lop", 1)
    path = tmp_path / "bad.stl"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(MeshParseException) as excinfo:
        load_mesh(path)
    assert excinfo.value.byte_offset == text.index("lop")


def test_missing_mesh_names_path(tmp_path):
    path = tmp_path / "absent.stl"
    with pytest.raises(InputException) as excinfo:
        load_mesh(path)
    assert str(path) in excinfo.value.detail


def test_empty_ascii_mesh_rejected(tmp_path):
    path = tmp_path / "empty.stl"
    path.write_text("solid nothing\nendsolid nothing\n", encoding="utf-8")
    with pytest.raises(MeshParseException):
        load_mesh(path)


def test_mesh_keeps_its_own_copy():
    triangles = cube_triangles()
    kept = triangles.copy()
    mesh = TriangleMesh(triangles)
    triangles += 1.0
    assert triangles.flags.writeable
    assert np.array_equal(mesh.triangles, kept)
    assert not mesh.triangles.flags.writeable


def test_boundary_edges_of_closed_and_open_cubes():
    assert boundary_edge_count(TriangleMesh(cube_triangles())) == 0
    assert boundary_edge_count(TriangleMesh(cube_triangles()[:-1])) == 3


# ── voxelization ─────────────────────────────────────────────────────────────

def test_voxelize_cube_fills_every_cell():
    grid = voxelize(TriangleMesh(cube_triangles(10.0)), 1.0)
    assert grid.lattice.dims == (10, 10, 10)
    assert grid.lattice.origin == (0.5, 0.5, 0.5)
    assert grid.count == 1000
    assert grid.volume == pytest.approx(1000.0)


def test_voxelize_offset_cube_at_half_spacing():
    grid = voxelize(TriangleMesh(cube_triangles(4.0, offset=(-2.0, 1.0, 3.0))), 0.5)
    assert grid.lattice.dims == (8, 8, 8)
    assert grid.count == 512
    assert grid.lattice.origin == (-1.75, 1.25, 3.25)


def test_voxelize_sphere_volume():
    radius = 10.0
    grid = voxelize(TriangleMesh(sphere_triangles(radius, center=(0.3, 0.2, 0.1))), 1.0)
    exact = 4.0 / 3.0 * math.pi * radius ** 3
    assert abs(grid.volume - exact) / exact < 0.05


def test_voxelize_is_independent_of_worker_count():
    mesh = TriangleMesh(sphere_triangles(6.0, center=(0.1, -0.2, 0.3), n_lat=16, n_lon=32))
    serial = voxelize(mesh, 0.5, workers=1)
    threaded = voxelize(mesh, 0.5, workers=4)
    assert serial.lattice.same_as(threaded.lattice)
    assert np.array_equal(serial.cells, threaded.cells)


def test_voxelize_open_mesh_warns(caplog):
    with pytest.warns(NonWatertightMeshWarning):
        voxelize(TriangleMesh(cube_triangles(4.0)[:-1], name="patch"), 1.0)
    assert "boundary edges" in caplog.text


def test_voxelize_rejects_bad_spacing():
    with pytest.raises(UsageException):
        voxelize(TriangleMesh(cube_triangles()), 0.0)


def test_voxelize_rejects_non_finite_vertices():
    triangles = cube_triangles()
    triangles[0, 0, 0] = np.nan
    with pytest.raises(GeometryException):
        voxelize(TriangleMesh(triangles), 1.0)


def test_mesh_shape_validated():
    with pytest.raises(GeometryException):
        TriangleMesh(np.zeros((4, 3)))


# ── volume files ─────────────────────────────────────────────────────────────

def test_grid_file_keeps_cells_and_lattice(tmp_path, rng):
    grid = random_grid(rng, (5, 7, 3), 0.5, spacing=0.25, origin=(0.125, -1.375, 2.0))
    path = write_volume(tmp_path / "grid.vox", grid)
    loaded = read_grid(path)
    assert loaded.lattice == grid.lattice
    assert np.array_equal(loaded.cells, grid.cells)


def test_field_file_keeps_values_bit_exact(tmp_path, rng):
    field = ScalarField(Lattice((4, 3, 2), 0.1, (0.05, 0.05, 0.05)), rng.random((4, 3, 2)) / 3.0)
    loaded = read_volume(write_volume(tmp_path / "field.vox", field))
    assert isinstance(loaded, ScalarField)
    assert loaded.lattice.spacing == 0.1
    assert np.array_equal(loaded.cells, field.cells)


def test_field_is_not_a_grid(tmp_path):
    path = write_volume(tmp_path / "field.vox", ScalarField.constant(Lattice((2, 2, 2), 1.0), 0.5))
    with pytest.raises(VolumeFormatException):
        read_grid(path)


def test_dims_disagreeing_with_payload_rejected(tmp_path):
    path = write_volume(tmp_path / "grid.vox", IndicatorGrid.full(Lattice((3, 4, 5), 1.0)))
    data = path.read_bytes().replace(b"dims 3 4 5", b"dims 3 4 9", 1)
    path.write_bytes(data)
    with pytest.raises(VolumeFormatException):
        read_volume(path)


def test_foreign_file_rejected(tmp_path):
    path = tmp_path / "other.vox"
    path.write_bytes(b"P6\n4 4\n255\nend\n")
    with pytest.raises(VolumeFormatException):
        read_volume(path)


def test_unterminated_header_rejected(tmp_path):
    path = tmp_path / "short.vox"
    path.write_bytes(b"VOXV 1\ndims 1 1 1\n")
    with pytest.raises(VolumeFormatException):
        read_volume(path)


def test_missing_volume_names_path(tmp_path):
    with pytest.raises(InputException, match="absent.vox"):
        read_volume(tmp_path / "absent.vox")


def test_write_volumes_uses_suffixes(tmp_path):
    grid = IndicatorGrid.empty(Lattice((1, 1, 1), 1.0))
    paths = write_volumes(tmp_path / "run", [("accessible", grid), ("secluded", grid)])
    assert [p.name for p in paths] == ["run_accessible.vox", "run_secluded.vox"]
    assert all(p.is_file() for p in paths)


# ── export ───────────────────────────────────────────────────────────────────

def test_vtk_export_layout(tmp_path):
    cells = np.zeros((2, 3, 1), dtype=bool)
    cells[1, 0, 0] = True
    grid = IndicatorGrid(Lattice((2, 3, 1), 0.5, (1.0, 2.0, 3.0)), cells)
    lines = export_vtk(tmp_path / "grid.vtk", grid).read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[3] == "DATASET STRUCTURED_POINTS"
    assert lines[4] == "DIMENSIONS 2 3 1"
    assert lines[5] == "ORIGIN 1.0 2.0 3.0"
    assert lines[6] == "SPACING 0.5 0.5 0.5"
    assert lines[7] == "POINT_DATA 6"
    # x varies fastest
    assert lines[10:] == ["0", "1", "0", "0", "0", "0"]
