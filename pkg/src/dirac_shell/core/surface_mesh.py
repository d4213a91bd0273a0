"""Triangulated surfaces carrying the one-point quadrature data.

A mesh stores vertex and face arrays; centroids, areas, unit normals and
panel diameters are derived once at construction.  Closed meshes are
oriented so that the signed volume is positive (normals point out of the
bounded region, which is the + side of the jump relations).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

from dirac_shell.core.errors import MeshFormatError, MeshSpecError
from dirac_shell.schemas.defaults import MAX_SPHERE_LEVEL

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int64]

# Relative area below which a triangle counts as degenerate.
_DEGENERATE_RATIO = 1e-14

# Unit icosahedron, faces wound counter-clockwise seen from outside.
_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
_ICOSAHEDRON_VERTICES = np.array(
    [
        [-1.0, _GOLDEN, 0.0],
        [1.0, _GOLDEN, 0.0],
        [-1.0, -_GOLDEN, 0.0],
        [1.0, -_GOLDEN, 0.0],
        [0.0, -1.0, _GOLDEN],
        [0.0, 1.0, _GOLDEN],
        [0.0, -1.0, -_GOLDEN],
        [0.0, 1.0, -_GOLDEN],
        [_GOLDEN, 0.0, -1.0],
        [_GOLDEN, 0.0, 1.0],
        [-_GOLDEN, 0.0, -1.0],
        [-_GOLDEN, 0.0, 1.0],
    ]
)
_ICOSAHEDRON_FACES = np.array(
    [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [5, 4, 9],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ]
)


@dataclass(frozen=True)
class Panel:
    """One triangle with its quadrature node."""

    vertices: FloatArray  # (3, 3), one vertex per row
    centroid: FloatArray
    area: float
    normal: FloatArray


def _face_geometry(
    vertices: FloatArray, faces: IndexArray
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, FloatArray]:
    corners = vertices[faces]  # (F, 3, 3)
    edge_1 = corners[:, 1] - corners[:, 0]
    edge_2 = corners[:, 2] - corners[:, 0]
    cross = np.cross(edge_1, edge_2)
    doubled = np.linalg.norm(cross, axis=1)
    edges = np.stack([edge_1, edge_2, corners[:, 2] - corners[:, 1]], axis=1)
    diameters = np.linalg.norm(edges, axis=2).max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        normals = cross / doubled[:, None]
    return corners.mean(axis=1), 0.5 * doubled, normals, diameters, cross


def degenerate_faces(vertices: FloatArray, faces: IndexArray) -> IndexArray:
    """Indices of faces whose area is zero relative to their longest edge."""
    _, areas, _, diameters, _ = _face_geometry(vertices, faces)
    return np.flatnonzero(areas <= _DEGENERATE_RATIO * diameters**2)


def _undirected_edges(faces: IndexArray) -> Counter[tuple[int, int]]:
    counts: Counter[tuple[int, int]] = Counter()
    for a, b, c in faces.tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            counts[(min(u, v), max(u, v))] += 1
    return counts


def is_watertight(faces: IndexArray) -> bool:
    """True when every edge is shared by exactly two triangles."""
    return all(n == 2 for n in _undirected_edges(faces).values())


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangulated surface with per-panel centroid, area and unit normal.

    Attributes:
        vertices: (V, 3) vertex coordinates.
        faces: (N, 3) vertex indices per triangle.
        closed: Whether the surface is watertight (and therefore oriented
            outward).
        label: Free text used to tie operators to their mesh.
    """

    vertices: FloatArray
    faces: IndexArray
    closed: bool
    label: str
    centroids: FloatArray = field(init=False, repr=False)
    areas: FloatArray = field(init=False, repr=False)
    normals: FloatArray = field(init=False, repr=False)
    diameters: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
            raise MeshFormatError(f"expected a non-empty (N, 3) face array, got {faces.shape}")
        centroids, areas, normals, diameters, _ = _face_geometry(vertices, faces)
        bad = np.flatnonzero(areas <= _DEGENERATE_RATIO * diameters**2)
        if bad.size:
            raise MeshFormatError(f"degenerate (zero-area) triangle {int(bad[0])}")
        for name, value in (
            ("vertices", vertices),
            ("faces", faces),
            ("centroids", centroids),
            ("areas", areas),
            ("normals", normals),
            ("diameters", diameters),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_arrays(
        cls,
        vertices: npt.ArrayLike,
        faces: npt.ArrayLike,
        label: str,
        closed: bool | None = None,
    ) -> SurfaceMesh:
        """Build a mesh, detecting watertightness and orienting closed meshes.

        Args:
            vertices: (V, 3) coordinates.
            faces: (N, 3) vertex indices.
            label: Mesh label.
            closed: Force the closed flag; detected from the edges when None.
        """
        verts = np.asarray(vertices, dtype=np.float64)
        tris = np.asarray(faces, dtype=np.int64)
        watertight = is_watertight(tris) if closed is None else closed
        mesh = cls(verts, tris, watertight, label)
        if watertight and signed_volume(mesh) < 0:
            logger.debug("Flipping faces of %s to orient normals outward", label)
            mesh = cls(verts, tris[:, ::-1].copy(), True, label)
        return mesh

    @property
    def n_panels(self) -> int:
        return len(self.faces)

    @property
    def panels(self) -> tuple[Panel, ...]:
        corners = self.vertices[self.faces]
        return tuple(
            Panel(corners[i], self.centroids[i], float(self.areas[i]), self.normals[i])
            for i in range(self.n_panels)
        )

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def mean_panel_diameter(self) -> float:
        """Mean longest edge, the mesh size h used by the convergence studies."""
        return float(self.diameters.mean())

    @property
    def extent(self) -> float:
        """Bounding-box diagonal, a cheap stand-in for the mesh diameter."""
        return float(np.linalg.norm(self.vertices.max(axis=0) - self.vertices.min(axis=0)))


def signed_volume(mesh: SurfaceMesh) -> float:
    """Sum of (centroid . normal) area / 3; positive for outward normals."""
    return float(np.sum(np.einsum("ij,ij->i", mesh.centroids, mesh.normals) * mesh.areas) / 3.0)


def euler_characteristic(mesh: SurfaceMesh) -> int:
    """V - E + F over the vertices actually referenced by faces."""
    n_vertices = len(np.unique(mesh.faces))
    n_edges = len(_undirected_edges(mesh.faces))
    return n_vertices - n_edges + mesh.n_panels


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def make_sphere(subdivision_level: int, radius: float = 1.0) -> SurfaceMesh:
    """Icosphere with 20 * 4^level panels, vertices on the sphere of `radius`.

    Raises:
        ValueError: If the level is negative or above the panel-count guard,
            or the radius is not positive.
    """
    if not 0 <= subdivision_level <= MAX_SPHERE_LEVEL:
        raise ValueError(
            f"sphere level must be in [0, {MAX_SPHERE_LEVEL}], got {subdivision_level}"
        )
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")

    vertices = list(_ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES[0]))
    faces = _ICOSAHEDRON_FACES.tolist()
    for _ in range(subdivision_level):
        midpoints: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                point = vertices[a] + vertices[b]
                vertices.append(point / np.linalg.norm(point))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = refined

    label = f"sphere:{subdivision_level}" + (f",{radius:g}" if radius != 1.0 else "")
    return SurfaceMesh.from_arrays(radius * np.array(vertices), faces, label, closed=True)


def make_flat_patch(half_width: float, n_per_side: int) -> SurfaceMesh:
    """Square [-w, w]^2 x {0} split into 2 n^2 triangles with normal (0, 0, -1)."""
    if half_width <= 0 or n_per_side < 1:
        raise ValueError(
            f"patch needs half_width > 0 and n_per_side >= 1, got {half_width}, {n_per_side}"
        )
    ticks = np.linspace(-half_width, half_width, n_per_side + 1)
    xs, ys = np.meshgrid(ticks, ticks, indexing="ij")
    vertices = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)])

    def index(i: int, j: int) -> int:
        return i * (n_per_side + 1) + j

    faces = []
    for i in range(n_per_side):
        for j in range(n_per_side):
            a, b = index(i, j), index(i + 1, j)
            c, d = index(i + 1, j + 1), index(i, j + 1)
            # clockwise seen from +z, so the normal is -e3
            faces += [[a, c, b], [a, d, c]]
    return SurfaceMesh.from_arrays(
        vertices, faces, f"patch:{half_width:g},{n_per_side}", closed=False
    )


# ---------------------------------------------------------------------------
# OFF files
# ---------------------------------------------------------------------------


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((number, stripped))
    return lines


def load_off(path: str | Path) -> SurfaceMesh:
    """Read a triangle mesh from an ASCII OFF file.

    Args:
        path: File path.

    Returns:
        Mesh labelled with the file stem; outward-oriented if watertight.

    Raises:
        FileNotFoundError: If the file does not exist.
        MeshFormatError: On malformed content, non-triangular or degenerate
            faces; the message carries the offending line number.
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Mesh file not found: {file_path}")
    lines = _content_lines(file_path.read_text(encoding="utf-8"))
    if not lines or lines[0][1] != "OFF":
        raise MeshFormatError("missing OFF header", lines[0][0] if lines else 1)

    try:
        count_line, counts = lines[1]
    except IndexError:
        raise MeshFormatError("missing counts line", lines[0][0] + 1) from None
    try:
        n_vertices, n_faces = (int(tok) for tok in counts.split()[:2])
    except ValueError:
        raise MeshFormatError("counts line must start with two integers", count_line) from None
    body = lines[2:]
    if len(body) < n_vertices + n_faces:
        last = body[-1][0] if body else count_line
        raise MeshFormatError(
            f"expected {n_vertices} vertices and {n_faces} faces, file ends early", last
        )

    vertices = np.empty((n_vertices, 3))
    for k, (number, text) in enumerate(body[:n_vertices]):
        tokens = text.split()
        try:
            vertices[k] = [float(tok) for tok in tokens[:3]]
        except ValueError:
            raise MeshFormatError("vertex line needs three numbers", number) from None
        if len(tokens) < 3:
            raise MeshFormatError("vertex line needs three numbers", number)

    faces = np.empty((n_faces, 3), dtype=np.int64)
    for k, (number, text) in enumerate(body[n_vertices : n_vertices + n_faces]):
        try:
            tokens = [int(tok) for tok in text.split()]
        except ValueError:
            raise MeshFormatError("face line must hold integers", number) from None
        if not tokens or tokens[0] != 3 or len(tokens) < 4:
            raise MeshFormatError("non-triangular face", number)
        face = tokens[1:4]
        if min(face) < 0 or max(face) >= n_vertices:
            raise MeshFormatError("face references a missing vertex", number)
        faces[k] = face
        if degenerate_faces(vertices, faces[k : k + 1]).size:
            raise MeshFormatError("degenerate (zero-area) triangle", number)

    watertight = is_watertight(faces)
    if not watertight:
        logger.warning("Mesh %s is not watertight; treating it as open", file_path.name)
    return SurfaceMesh.from_arrays(vertices, faces, file_path.stem, closed=watertight)


# ---------------------------------------------------------------------------
# CLI mesh specifications
# ---------------------------------------------------------------------------


def split_mesh_specs(text: str) -> list[str]:
    """Split a comma-separated list of specs, keeping numeric arguments attached.

    "sphere:1,sphere:2" -> ["sphere:1", "sphere:2"]; "patch:1,8" -> ["patch:1,8"].
    """
    specs: list[str] = []
    for token in (tok.strip() for tok in text.split(",")):
        if not token:
            continue
        try:
            float(token)
        except ValueError:
            specs.append(token)
        else:
            if not specs:
                raise MeshSpecError(f"mesh list cannot start with a number: {text!r}")
            specs[-1] += f",{token}"
    return specs


def resolve_mesh_spec(spec: str) -> SurfaceMesh:
    """Turn `sphere:L[,R]`, `patch:W,N` or an OFF path into a mesh.

    Raises:
        MeshSpecError: If the text matches no generator and no existing file.
    """
    kind, _, args = spec.partition(":")
    try:
        if kind == "sphere":
            level, _, radius = args.partition(",")
            return make_sphere(int(level), float(radius) if radius else 1.0)
        if kind == "patch":
            width, _, count = args.partition(",")
            return make_flat_patch(float(width), int(count))
    except ValueError as exc:
        raise MeshSpecError(f"bad mesh spec {spec!r}: {exc}") from exc
    if Path(spec).is_file():
        return load_off(spec)
    raise MeshSpecError(f"mesh spec {spec!r} is neither sphere:L, patch:W,N nor a file")
