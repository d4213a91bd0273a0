"""Tests for mesh generation, OFF parsing and mesh specifications."""

import logging
from pathlib import Path

import numpy as np
import pytest

from dirac_shell.core.errors import MeshFormatError, MeshSpecError
from dirac_shell.core.surface_mesh import (
    SurfaceMesh,
    euler_characteristic,
    is_watertight,
    load_off,
    make_flat_patch,
    make_sphere,
    resolve_mesh_spec,
    signed_volume,
    split_mesh_specs,
)

from tests.factories import OCTAHEDRON_INWARD_OFF, TETRAHEDRON_OFF, TRIANGLE_OFF, write_off


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_sphere_panel_count_and_topology(level: int) -> None:
    """20 * 4^level panels, watertight, Euler characteristic 2."""
    mesh = make_sphere(level)
    assert mesh.n_panels == 20 * 4**level
    assert mesh.closed
    assert is_watertight(mesh.faces)
    assert euler_characteristic(mesh) == 2


def test_sphere_vertices_on_sphere_and_outward() -> None:
    """Vertices lie on the sphere and normals point away from the origin."""
    mesh = make_sphere(2, radius=2.0)
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 2.0, rtol=1e-14)
    assert np.all(np.einsum("ij,ij->i", mesh.centroids, mesh.normals) > 0)
    assert mesh.label == "sphere:2,2"


def test_sphere_area_converges() -> None:
    """Total area approaches 4 pi from below under refinement."""
    errors = [4 * np.pi - make_sphere(level).total_area for level in (1, 2, 3)]
    assert all(e > 0 for e in errors)
    assert errors[0] > errors[1] > errors[2]


def test_sphere_diameter_halves() -> None:
    """Mean panel diameter roughly halves per level."""
    h = [make_sphere(level).mean_panel_diameter for level in (1, 2, 3)]
    assert h[1] / h[0] == pytest.approx(0.5, abs=0.05)
    assert h[2] / h[1] == pytest.approx(0.5, abs=0.05)


def test_sphere_level_guard() -> None:
    """Levels outside the guard and non-positive radii are rejected."""
    with pytest.raises(ValueError):
        make_sphere(-1)
    with pytest.raises(ValueError):
        make_sphere(8)
    with pytest.raises(ValueError):
        make_sphere(1, radius=0.0)


def test_flat_patch_geometry() -> None:
    """A w x w patch with n cells per side: 2 n^2 panels, normal -e3, open."""
    mesh = make_flat_patch(1.0, 4)
    assert mesh.n_panels == 32
    assert not mesh.closed
    np.testing.assert_allclose(mesh.normals, np.tile([0.0, 0.0, -1.0], (32, 1)))
    assert mesh.total_area == pytest.approx(4.0)
    assert mesh.label == "patch:1,4"


def test_mesh_arrays_read_only() -> None:
    """Derived arrays cannot be modified in place."""
    mesh = make_sphere(0)
    with pytest.raises(ValueError):
        mesh.areas[0] = 1.0


def test_panels_view() -> None:
    """Panel records mirror the per-panel arrays."""
    mesh = make_sphere(0)
    panel = mesh.panels[3]
    np.testing.assert_array_equal(panel.centroid, mesh.centroids[3])
    assert panel.area == mesh.areas[3]


def test_degenerate_triangle_rejected() -> None:
    """Collinear vertices make a zero-area panel."""
    with pytest.raises(MeshFormatError, match="degenerate"):
        SurfaceMesh.from_arrays([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]], "bad")


def test_load_tetrahedron(tmp_path: Path) -> None:
    """A watertight OFF file loads closed, labelled by its stem."""
    mesh = load_off(write_off(tmp_path, TETRAHEDRON_OFF, "tet.off"))
    assert mesh.n_panels == 4
    assert mesh.closed
    assert mesh.label == "tet"
    assert signed_volume(mesh) > 0


def test_load_flips_inward_octahedron(tmp_path: Path) -> None:
    """Inward-wound closed meshes are reoriented outward."""
    mesh = load_off(write_off(tmp_path, OCTAHEDRON_INWARD_OFF))
    assert signed_volume(mesh) == pytest.approx(4.0 / 3.0)
    assert np.all(np.einsum("ij,ij->i", mesh.centroids, mesh.normals) > 0)


def test_open_mesh_warns(tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    """A non-watertight file loads as open with a warning."""
    with caplog.at_level(logging.WARNING):
        mesh = load_off(write_off(tmp_path, TRIANGLE_OFF))
    assert not mesh.closed
    assert "not watertight" in caplog.text


def test_non_triangular_face_reports_line(tmp_path: Path) -> None:
    """A quad face is rejected with its line number."""
    text = TRIANGLE_OFF.replace("3 0 1 2", "4 0 1 2 0")
    with pytest.raises(MeshFormatError, match="non-triangular") as info:
        load_off(write_off(tmp_path, text))
    assert info.value.line == 6


def test_degenerate_face_reports_line(tmp_path: Path) -> None:
    """A zero-area face is rejected with its line number."""
    text = TRIANGLE_OFF.replace("0 1 0\n", "2 0 0\n")
    with pytest.raises(MeshFormatError, match="degenerate") as info:
        load_off(write_off(tmp_path, text))
    assert info.value.line == 6


def test_missing_header(tmp_path: Path) -> None:
    """Files without the OFF header fail on line 1."""
    with pytest.raises(MeshFormatError) as info:
        load_off(write_off(tmp_path, "3 1 0\n"))
    assert info.value.line == 1


def test_missing_file() -> None:
    """A missing path raises FileNotFoundError."""
    with pytest.raises(FileNotFoundError):
        load_off("does/not/exist.off")


def test_split_mesh_specs() -> None:
    """Numeric tokens stay with the spec they follow."""
    assert split_mesh_specs("sphere:1,sphere:2,sphere:3") == ["sphere:1", "sphere:2", "sphere:3"]
    assert split_mesh_specs("patch:1,8, sphere:2,0.5") == ["patch:1,8", "sphere:2,0.5"]


def test_resolve_mesh_spec(tmp_path: Path) -> None:
    """Generators and OFF paths resolve; anything else is a MeshSpecError."""
    assert resolve_mesh_spec("sphere:1").n_panels == 80
    assert resolve_mesh_spec("patch:2,3").n_panels == 18
    path = write_off(tmp_path, TETRAHEDRON_OFF, "tet.off")
    assert resolve_mesh_spec(str(path)).label == "tet"
    with pytest.raises(MeshSpecError):
        resolve_mesh_spec("cube:3")
    with pytest.raises(MeshSpecError):
        resolve_mesh_spec("sphere:x")
