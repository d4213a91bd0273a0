"""Discretized boundary operators on a triangulated surface.

Densities are constant on each panel: one spinor per panel.  An operator is
a (4N)x(4N) complex matrix whose (i, j) 4x4 block maps the spinor of panel j
to panel i.  The discrete L^2(sigma) inner product is
<u, v> = sum_i area_i u_i^* v_i, so W^{1/2} A W^{-1/2} (W = diag(area_i I4))
is the matrix that is Hermitian for operators that are self-adjoint on
L^2(sigma).

C is assembled in one of two ways (CauchyQuadrature):

- galerkin: block (i, j) is the panel average over T_i of the kernel
  integrated over T_j.  Nearby pairs get closed-form singular parts
  (panel_integrals) and are averaged with their W-adjoint, so C_w is
  Hermitian to rounding.
- centroid: one-point collocation at the centroids with a disk self-term.

Conventions: N is the outward normal, the + side is the bounded region, so

    C_+ = -(i/2) M + C      (limit from inside)
    C_- = +(i/2) M + C      (limit from outside)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cache
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy import sparse
from scipy.spatial import cKDTree
from tqdm import tqdm

from dirac_shell.core.dirac_algebra import alpha_dot, beta
from dirac_shell.core.errors import (
    EvaluationPointError,
    GuardViolation,
    MeshFormatError,
    MeshMismatchError,
)
from dirac_shell.core.green_kernel import anticommutator_kernel, phi
from dirac_shell.core.panel_integrals import (
    edge_frames,
    gauss_legendre_unit,
    solid_angle,
    triangle_potential,
)
from dirac_shell.core.surface_mesh import SurfaceMesh
from dirac_shell.schemas import CauchyQuadrature, KernelParams
from dirac_shell.schemas.defaults import (
    COINCIDENT_TOLERANCE,
    GALERKIN_EDGE_ORDER,
    GALERKIN_NEAR_RADIUS,
    GALERKIN_REFINE_LEVEL,
    MAX_PANELS,
    MIN_TARGET_DISTANCE,
    NEAR_RADIUS,
    NEAR_REFINE_LEVEL,
    POWER_ITERATIONS,
)

logger = logging.getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]

# Kernel evaluations per assembly chunk (rows * N).
_CHUNK_ENTRIES = 1 << 16
# Panel pairs per chunk of the near-field integrals.
_PAIR_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class DiscreteDensity:
    """One spinor per panel, shape (N, 4)."""

    values: ComplexArray
    mesh_label: str

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2 or values.shape[1] != 4:
            raise ValueError(f"density must have shape (N, 4), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("density has non-finite entries")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_flat(cls, vector: npt.ArrayLike, mesh_label: str) -> DiscreteDensity:
        return cls(np.asarray(vector, dtype=np.complex128).reshape(-1, 4), mesh_label)

    @property
    def n_panels(self) -> int:
        return len(self.values)

    def flat(self) -> ComplexArray:
        return self.values.reshape(-1)

    def norm(self, weights: npt.ArrayLike) -> float:
        """Discrete L^2(sigma) norm sqrt(sum_i area_i |g_i|^2)."""
        return math.sqrt(weighted_inner(self, self, weights).real)

    def normalized(self, weights: npt.ArrayLike) -> DiscreteDensity:
        return DiscreteDensity(self.values / self.norm(weights), self.mesh_label)


def weighted_inner(
    u: DiscreteDensity, v: DiscreteDensity, weights: npt.ArrayLike
) -> complex:
    """<u, v>_sigma = sum_i area_i u_i^* . v_i."""
    if u.mesh_label != v.mesh_label:
        raise MeshMismatchError(f"densities on {u.mesh_label!r} and {v.mesh_label!r}")
    w = np.asarray(weights, dtype=np.float64)
    return complex(np.sum(w[:, None] * u.values.conj() * v.values))


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """(4N)x(4N) operator together with the quadrature weights of its mesh.

    Attributes:
        matrix: Dense ndarray, or a scipy sparse array for block-diagonal
            operators.
        weights: Panel areas, the discrete measure sigma.
        mesh_label: Label of the mesh the operator was built on.
        m: Mass of the kernel, None for kernel-free operators.
    """

    matrix: Any
    weights: npt.NDArray[np.float64]
    mesh_label: str
    m: float | None = None

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        n = 4 * len(weights)
        if self.matrix.shape != (n, n):
            raise ValueError(
                f"operator shape {self.matrix.shape} does not match {len(weights)} panels"
            )
        if np.any(weights <= 0):
            raise ValueError("panel weights must be strictly positive")
        object.__setattr__(self, "weights", weights)

    @property
    def n_panels(self) -> int:
        return len(self.weights)

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    def dense(self) -> ComplexArray:
        if self.is_sparse:
            return self.matrix.toarray()
        return self.matrix

    def block(self, i: int, j: int) -> ComplexArray:
        rows, cols = slice(4 * i, 4 * i + 4), slice(4 * j, 4 * j + 4)
        if self.is_sparse:
            return self.matrix[rows, cols].toarray()
        return self.matrix[rows, cols]

    def weighted(self) -> ComplexArray:
        """Dense W^{1/2} A W^{-1/2}."""
        scale = np.repeat(np.sqrt(self.weights), 4)
        return self.dense() * scale[:, None] / scale[None, :]

    def apply(self, density: DiscreteDensity) -> DiscreteDensity:
        check_density(self, density)
        return DiscreteDensity.from_flat(self.matrix @ density.flat(), self.mesh_label)

    def apply_adjoint(self, vector: ComplexArray) -> ComplexArray:
        """Euclidean adjoint A^dagger applied to a flat vector."""
        if self.is_sparse:
            return self.matrix.conj().T @ vector
        return (vector.conj() @ self.matrix).conj()

    def with_matrix(self, matrix: Any) -> BoundaryOperator:
        return BoundaryOperator(matrix, self.weights, self.mesh_label, self.m)


def check_same_mesh(*operators: BoundaryOperator) -> None:
    first = operators[0]
    for other in operators[1:]:
        if other.mesh_label != first.mesh_label or not np.array_equal(
            other.weights, first.weights
        ):
            raise MeshMismatchError(
                f"operators on {first.mesh_label!r} and {other.mesh_label!r}"
            )


def check_density(op: BoundaryOperator, density: DiscreteDensity) -> None:
    if density.mesh_label != op.mesh_label or density.n_panels != op.n_panels:
        raise MeshMismatchError(
            f"density on {density.mesh_label!r} ({density.n_panels} panels) vs "
            f"operator on {op.mesh_label!r} ({op.n_panels} panels)"
        )


def check_mesh_density(mesh: SurfaceMesh, density: DiscreteDensity) -> None:
    if density.mesh_label != mesh.label or density.n_panels != mesh.n_panels:
        raise MeshMismatchError(
            f"density on {density.mesh_label!r} does not live on mesh {mesh.label!r}"
        )


def matmul(a: Any, b: Any) -> Any:
    """Matrix product accepting any mix of dense and sparse operands."""
    if sparse.issparse(a) and sparse.issparse(b):
        return (a @ b).tocsr()
    if sparse.issparse(b):
        return np.asarray((b.T @ a.T).T)
    return np.asarray(a @ b)


def _plus_sparse(dense: ComplexArray, sp: Any, coefficient: complex) -> ComplexArray:
    """dense + coefficient * sp as a new dense array."""
    out = np.array(dense, dtype=np.complex128, copy=True)
    coo = sp.tocoo()
    out[coo.row, coo.col] += coefficient * coo.data
    return out


def _guard_panels(mesh: SurfaceMesh) -> None:
    if mesh.n_panels > MAX_PANELS:
        raise GuardViolation(
            f"{mesh.label} has {mesh.n_panels} panels, dense assembly allows {MAX_PANELS}"
        )


def self_term(areas: npt.ArrayLike, p: KernelParams) -> ComplexArray:
    """Diagonal blocks of C: the 1/r mass term integrated over an equal-area disk.

    The odd parts of the kernel integrate to zero over a centrally symmetric
    neighbourhood, which leaves (m / 2) sqrt(area / pi) beta.
    """
    radius = np.sqrt(np.asarray(areas, dtype=np.float64) / np.pi)
    return (0.5 * p.m * radius)[..., None, None] * beta()


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def _assemble_blocks(mesh: SurfaceMesh, kernel: Any, diagonal: ComplexArray, desc: str) -> ComplexArray:
    """Fill a dense (4N)x(4N) matrix with kernel(i, j) * area_j off the diagonal."""
    _guard_panels(mesh)
    n = mesh.n_panels
    matrix = np.empty((4 * n, 4 * n), dtype=np.complex128)
    view = matrix.reshape(n, 4, n, 4)
    tolerance = COINCIDENT_TOLERANCE * mesh.extent
    rows_per_chunk = max(1, _CHUNK_ENTRIES // n)

    for start in tqdm(range(0, n, rows_per_chunk), desc=desc, disable=None, leave=False):
        rows = np.arange(start, min(start + rows_per_chunk, n))
        offsets = mesh.centroids[rows, None, :] - mesh.centroids[None, :, :]
        distances = np.linalg.norm(offsets, axis=-1)
        on_diagonal = rows[:, None] == np.arange(n)[None, :]
        clash = np.argwhere((distances < tolerance) & ~on_diagonal)
        if clash.size:
            i, j = clash[0]
            raise MeshFormatError(f"coincident centroids of panels {rows[i]} and {j}")
        offsets[on_diagonal] = (1.0, 0.0, 0.0)  # placeholder, overwritten below
        blocks = kernel(rows, offsets) * mesh.areas[None, :, None, None]
        blocks[on_diagonal] = diagonal[rows]
        view[rows] = blocks.transpose(0, 2, 1, 3)
    return matrix


def kernel_remainder(offsets: npt.ArrayLike, p: KernelParams) -> ComplexArray:
    """phi(v) - i alpha.v / (4 pi r^3) - m beta / (4 pi r).

    Bounded; tends to -m^2 beta / (4 pi) plus an odd part as v -> 0.
    """
    vec = np.asarray(offsets, dtype=np.float64)
    r = np.linalg.norm(vec, axis=-1)
    singular = (1j / (4 * np.pi)) * alpha_dot(vec / r[..., None] ** 3)
    singular += (p.m / (4 * np.pi) / r)[..., None, None] * beta()
    return phi(vec, p) - singular


def _galerkin_blocks(
    mesh: SurfaceMesh, p: KernelParams, targets: npt.NDArray[np.int64], sources: npt.NDArray[np.int64]
) -> ComplexArray:
    """(1/area_i) int_{T_i} int_{T_j} phi(x - y) dA(y) dA(x) for panel pairs (i, j).

    The 1/r^2 part is the edge sum plus solid angle of `triangle_field`,
    integrated over T_i after exchanging the order on the edges (Gauss-Legendre
    on the edges of T_j, subdivision nodes for the solid angle).  The 1/r part
    is the closed-form potential of T_j averaged on the subdivision nodes of
    T_i.  The bounded remainder uses the centroids, or its limit on the
    diagonal, where the odd parts cancel.
    """
    corners = mesh.vertices[mesh.faces]
    edge_nodes, edge_weights = gauss_legendre_unit(GALERKIN_EDGE_ORDER)
    bary = subdivision_nodes(GALERKIN_REFINE_LEVEL)
    out = np.empty((len(targets), 4, 4), dtype=np.complex128)
    chunks = range(0, len(targets), _PAIR_CHUNK)
    for start in tqdm(chunks, desc="near field", disable=None if len(chunks) > 1 else True, leave=False):
        chunk = slice(start, start + _PAIR_CHUNK)
        i, j = targets[chunk], sources[chunk]
        tri_i, tri_j = corners[i], corners[j]
        normal_i, normal_j = mesh.normals[i], mesh.normals[j]
        area_i = mesh.areas[i]

        nodes = np.einsum("sk,pkc->psc", bary, tri_i)
        single = area_i * triangle_potential(nodes, tri_j[:, None], normal_j[:, None]).mean(axis=1)

        frames = edge_frames(tri_j, normal_j)
        along = frames.starts[:, :, None, :] + (
            edge_nodes[None, None, :, None] * frames.lengths[:, :, None, None]
        ) * frames.tangents[:, :, None, :]
        on_edges = triangle_potential(along, tri_i[:, None, None], normal_i[:, None, None])
        edge_integrals = frames.lengths * (on_edges @ edge_weights)
        field = np.einsum("pe,pec->pc", edge_integrals, frames.outward)
        flux = area_i * solid_angle(nodes, tri_j[:, None]).mean(axis=1)
        field += flux[:, None] * normal_j

        same = i == j
        field[same] = 0.0
        blocks = (1j / (4 * np.pi)) * alpha_dot(field)
        blocks += (p.m / (4 * np.pi)) * single[:, None, None] * beta()
        blocks /= area_i[:, None, None]
        blocks[same] -= (p.m**2 / (4 * np.pi)) * mesh.areas[i[same], None, None] * beta()
        offsets = mesh.centroids[i[~same]] - mesh.centroids[j[~same]]
        blocks[~same] += kernel_remainder(offsets, p) * mesh.areas[j[~same], None, None]
        out[chunk] = blocks
    return out


def _symmetric_near_blocks(
    mesh: SurfaceMesh, p: KernelParams, targets: npt.NDArray[np.int64], sources: npt.NDArray[np.int64]
) -> ComplexArray:
    """Galerkin blocks averaged with their W-adjoint: (B_ij + (A_j / A_i) B_ji^dagger) / 2."""
    forward = _galerkin_blocks(mesh, p, targets, sources)
    backward = _galerkin_blocks(mesh, p, sources, targets)
    ratio = mesh.areas[sources] / mesh.areas[targets]
    return 0.5 * (forward + ratio[:, None, None] * backward.conj().transpose(0, 2, 1))


def _near_radius(mesh: SurfaceMesh) -> float:
    return GALERKIN_NEAR_RADIUS * mesh.mean_panel_diameter


def _write_near_field(mesh: SurfaceMesh, p: KernelParams, matrix: ComplexArray) -> int:
    """Overwrite the blocks of nearby pairs (and the diagonal) with Galerkin blocks."""
    n = mesh.n_panels
    view = matrix.reshape(n, 4, n, 4)
    tree = cKDTree(mesh.centroids)
    pairs = np.asarray(tree.query_pairs(_near_radius(mesh), output_type="ndarray")).reshape(-1, 2)
    diagonal = np.arange(n, dtype=np.int64)
    rows = np.concatenate([diagonal, pairs[:, 0].astype(np.int64)])
    cols = np.concatenate([diagonal, pairs[:, 1].astype(np.int64)])
    blocks = _symmetric_near_blocks(mesh, p, rows, cols)
    view[rows, :, cols, :] = blocks
    # C_ji = (A_i / A_j) C_ij^dagger
    mirrored = (mesh.areas[rows] / mesh.areas[cols])[:, None, None] * blocks.conj().transpose(0, 2, 1)
    upper = rows != cols
    view[cols[upper], :, rows[upper], :] = mirrored[upper]
    return len(pairs)


def assemble_cauchy(
    mesh: SurfaceMesh,
    p: KernelParams,
    quadrature: CauchyQuadrature = CauchyQuadrature.GALERKIN,
) -> BoundaryOperator:
    """Discretize the principal-value Cauchy operator C.

    galerkin: panel pairs closer than GALERKIN_NEAR_RADIUS * h, and the
    diagonal, get `_galerkin_blocks`; the others phi(x_i - x_j) area_j.
    centroid: phi(x_i - x_j) area_j off the diagonal, `self_term` on it.

    Raises:
        GuardViolation: If the mesh exceeds the dense panel guard.
        MeshFormatError: If two centroids coincide.
    """
    if quadrature == CauchyQuadrature.CENTROID:
        diagonal = self_term(mesh.areas, p)
    else:
        diagonal = np.zeros((mesh.n_panels, 4, 4), dtype=np.complex128)
    matrix = _assemble_blocks(
        mesh,
        lambda rows, offsets: phi(offsets, p),
        diagonal,
        desc="cauchy",
    )
    if quadrature == CauchyQuadrature.GALERKIN:
        near = _write_near_field(mesh, p, matrix)
        logger.debug("Galerkin near field on %s: %d panel pairs", mesh.label, near)
    logger.info(
        "Assembled C on %s (%d panels, m=%g, %s)",
        mesh.label,
        mesh.n_panels,
        p.m,
        CauchyQuadrature(quadrature).value,
    )
    return BoundaryOperator(matrix, mesh.areas, mesh.label, p.m)


def assemble_normal_mult(mesh: SurfaceMesh) -> BoundaryOperator:
    """Block-diagonal multiplication by alpha.N, stored sparse; M^2 = I."""
    n = mesh.n_panels
    blocks = alpha_dot(mesh.normals)  # (N, 4, 4)
    columns = 4 * np.repeat(np.arange(n), 16) + np.tile(np.arange(4), 4 * n)
    indptr = np.arange(0, 16 * n + 1, 4)
    matrix = sparse.csr_array(
        (blocks.reshape(-1), columns, indptr), shape=(4 * n, 4 * n)
    )
    return BoundaryOperator(matrix, mesh.areas, mesh.label)


def jump_operators(
    C: BoundaryOperator, M: BoundaryOperator
) -> tuple[BoundaryOperator, BoundaryOperator]:
    """Return (C_+, C_-) = (C - (i/2) M, C + (i/2) M)."""
    check_same_mesh(C, M)
    plus = C.with_matrix(_plus_sparse(C.dense(), sparse.csr_array(M.matrix), -0.5j))
    minus = C.with_matrix(_plus_sparse(C.dense(), sparse.csr_array(M.matrix), 0.5j))
    return plus, minus


def clifford_identity_residual(
    C: BoundaryOperator, M: BoundaryOperator, normal_first: bool = False
) -> float:
    """Relative Frobenius residual ||4 (CM)^2 + I|| / ||I|| of -4 (C alpha.N)^2 = I.

    Args:
        C: Cauchy operator.
        M: Normal multiplication on the same mesh.
        normal_first: Use (MC)^2 instead of (CM)^2.
    """
    check_same_mesh(C, M)
    square_root = matmul(M.matrix, C.matrix) if normal_first else matmul(C.matrix, M.matrix)
    defect = square_root @ square_root
    defect *= 4.0
    defect[np.diag_indices_from(defect)] += 1.0
    return float(np.linalg.norm(defect) / math.sqrt(defect.shape[0]))


def smooth_densities(mesh: SurfaceMesh) -> ComplexArray:
    """(4N, 16) matrix whose columns are e_k, x e_k, y e_k and z e_k at the centroids."""
    monomials = np.column_stack([np.ones(mesh.n_panels), mesh.centroids])
    columns = np.einsum("na,cb->ncab", monomials, np.eye(4))
    return columns.reshape(4 * mesh.n_panels, 16).astype(np.complex128)


def resolved_identity_residual(
    mesh: SurfaceMesh, C: BoundaryOperator, M: BoundaryOperator
) -> float:
    """||(4 (CM)^2 + I) G||_sigma / ||G||_sigma for G = `smooth_densities(mesh)`.

    The Frobenius residual weighs every discrete mode alike, including the
    panel-scale oscillations a piecewise-constant basis cannot resolve; this
    one only sees densities that the mesh resolves, and falls with h.

    Raises:
        MeshMismatchError: If the operators do not belong to `mesh`.
    """
    check_same_mesh(C, M)
    if C.mesh_label != mesh.label or C.n_panels != mesh.n_panels:
        raise MeshMismatchError(f"operators on {C.mesh_label!r} used with mesh {mesh.label!r}")
    smooth = smooth_densities(mesh)
    image = smooth
    for _ in range(2):
        image = C.matrix @ (M.matrix @ image)
    defect = 4.0 * image + smooth
    scale = np.repeat(np.sqrt(C.weights), 4)[:, None]
    return float(np.linalg.norm(scale * defect) / np.linalg.norm(scale * smooth))


def assemble_anticommutator(C: BoundaryOperator, M: BoundaryOperator) -> BoundaryOperator:
    """{alpha.N, C} = MC + CM."""
    check_same_mesh(C, M)
    total = matmul(M.matrix, C.matrix)
    total += matmul(C.matrix, M.matrix)
    return C.with_matrix(total)


def assemble_anticommutator_direct(mesh: SurfaceMesh, p: KernelParams) -> BoundaryOperator:
    """{alpha.N, C} assembled from its smooth kernel with the one-point rule.

    The diagonal blocks vanish: alpha.N anticommutes with the beta self-term.
    """
    normals = mesh.normals
    matrix = _assemble_blocks(
        mesh,
        lambda rows, offsets: anticommutator_kernel(
            offsets, normals[rows, None, :], normals[None, :, :], p
        ),
        np.zeros((mesh.n_panels, 4, 4), dtype=np.complex128),
        desc="anticommutator",
    )
    return BoundaryOperator(matrix, mesh.areas, mesh.label, p.m)


def assemble_K(C: BoundaryOperator, M: BoundaryOperator) -> BoundaryOperator:
    """K = C M (MC + CM), whose eigenvalues fix the critical couplings."""
    check_same_mesh(C, M)
    cm = matmul(C.matrix, M.matrix)
    anti = matmul(M.matrix, C.matrix)
    anti += cm
    matrix = cm @ anti
    logger.info("Assembled K on %s", C.mesh_label)
    return C.with_matrix(matrix)


def factorization_residual(
    C: BoundaryOperator, M: BoundaryOperator, K: BoundaryOperator, lam: float
) -> float:
    """Relative residual of (1/lam + C)(1/lam - C) = (1/lam^2 - 1/4) - K + ((CM)^2 + 1/4).

    The last bracket is the Clifford defect, kept so that the identity holds
    exactly for the discrete matrices.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    check_same_mesh(C, M, K)
    c = C.dense()
    inv = 1.0 / lam
    lhs = -(c @ c)
    lhs[np.diag_indices_from(lhs)] += inv**2
    cm = matmul(c, M.matrix)
    rhs = cm @ cm - K.dense()
    rhs[np.diag_indices_from(rhs)] += inv**2
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


# ---------------------------------------------------------------------------
# Weighted-space diagnostics
# ---------------------------------------------------------------------------


def weighted_hermiticity_residual(op: BoundaryOperator) -> float:
    """||A_w - A_w^dagger||_F / ||A_w||_F with A_w = W^{1/2} A W^{-1/2}."""
    weighted = op.weighted()
    scale = np.linalg.norm(weighted)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(weighted - weighted.conj().T) / scale)


def operator_norm(op: BoundaryOperator, iterations: int = POWER_ITERATIONS) -> float:
    """Estimate the L^2(sigma) operator norm by power iteration on A_w^dagger A_w."""
    scale = np.repeat(np.sqrt(op.weights), 4)
    vector = np.ones(4 * op.n_panels, dtype=np.complex128)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(iterations):
        image = scale * (op.matrix @ (vector / scale))
        estimate = float(np.linalg.norm(image))
        if estimate == 0.0:
            return 0.0
        vector = op.apply_adjoint(image * scale) / scale
        vector /= np.linalg.norm(vector)
    return estimate


# ---------------------------------------------------------------------------
# Matrix-free evaluation
# ---------------------------------------------------------------------------


def apply_cauchy_rows(
    mesh: SurfaceMesh,
    p: KernelParams,
    density: DiscreteDensity,
    rows: npt.ArrayLike,
    quadrature: CauchyQuadrature = CauchyQuadrature.GALERKIN,
) -> ComplexArray:
    """Rows of the assembled C applied to a density, without forming C.

    Returns:
        Array of shape (len(rows), 4).
    """
    check_mesh_density(mesh, density)
    indices = np.atleast_1d(np.asarray(rows, dtype=np.int64))
    weighted = mesh.areas[:, None] * density.values
    out = np.empty((len(indices), 4), dtype=np.complex128)
    if quadrature == CauchyQuadrature.CENTROID:
        diagonal = self_term(mesh.areas[indices], p)
        for k, i in enumerate(indices):
            others = np.arange(mesh.n_panels) != i
            kernels = phi(mesh.centroids[i] - mesh.centroids[others], p)
            out[k] = np.einsum("jab,jb->a", kernels, weighted[others])
            out[k] += diagonal[k] @ density.values[i]
        return out

    tree = cKDTree(mesh.centroids)
    radius = _near_radius(mesh)
    for k, i in enumerate(indices):
        near = np.asarray(tree.query_ball_point(mesh.centroids[i], radius), dtype=np.int64)
        far = np.ones(mesh.n_panels, dtype=bool)
        far[near] = False
        kernels = phi(mesh.centroids[i] - mesh.centroids[far], p)
        out[k] = np.einsum("jab,jb->a", kernels, weighted[far])
        blocks = _symmetric_near_blocks(mesh, p, np.full(len(near), i, dtype=np.int64), near)
        out[k] += np.einsum("jab,jb->a", blocks, density.values[near])
    return out


@cache
def subdivision_nodes(level: int) -> npt.NDArray[np.float64]:
    """Barycentric centroids of the 4^level congruent sub-triangles of a triangle."""
    n = 2**level
    nodes = []
    for i in range(n):
        for j in range(n - i):
            nodes.append(((i + 1 / 3) / n, (j + 1 / 3) / n))
            if i + j <= n - 2:
                nodes.append(((i + 2 / 3) / n, (j + 2 / 3) / n))
    uv = np.array(nodes)
    return np.column_stack([1.0 - uv.sum(axis=1), uv])


def single_layer_field(
    mesh: SurfaceMesh,
    p: KernelParams,
    density: DiscreteDensity,
    targets: npt.ArrayLike,
    near_radius: float = NEAR_RADIUS,
    refine_level: int = NEAR_REFINE_LEVEL,
) -> ComplexArray:
    """Evaluate Phi(g)(y) = sum_j int_panel_j phi(y - z) dsigma(z) g_j off the surface.

    Panels whose centroid lies within `near_radius * h` of y are integrated on
    a uniform 4^refine_level subdivision; the others use their centroid.

    Raises:
        EvaluationPointError: If a target lies within 1e-3 h of a quadrature
            node.
    """
    check_mesh_density(mesh, density)
    points = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    h = mesh.mean_panel_diameter
    bary = subdivision_nodes(refine_level)
    corners = mesh.vertices[mesh.faces]
    sub_weight = 1.0 / len(bary)

    out = np.empty((len(points), 4), dtype=np.complex128)
    for k, y in enumerate(points):
        distances = np.linalg.norm(y - mesh.centroids, axis=1)
        near = distances < near_radius * h
        far = ~near
        if np.min(distances) < MIN_TARGET_DISTANCE * h:
            raise EvaluationPointError(f"target {y} lies on the surface (h={h:g})")

        far_kernels = phi(y - mesh.centroids[far], p)
        total = np.einsum(
            "jab,jb->a", far_kernels, mesh.areas[far, None] * density.values[far]
        )
        if near.any():
            nodes = np.einsum("sk,jkc->jsc", bary, corners[near])  # (J, S, 3)
            offsets = y - nodes
            if np.min(np.linalg.norm(offsets, axis=-1)) < MIN_TARGET_DISTANCE * h:
                raise EvaluationPointError(f"target {y} lies on the surface (h={h:g})")
            kernels = phi(offsets, p).sum(axis=1) * sub_weight  # (J, 4, 4)
            total += np.einsum(
                "jab,jb->a", kernels, mesh.areas[near, None] * density.values[near]
            )
        out[k] = total
    return out


def reproduce_interior(
    mesh: SurfaceMesh,
    p: KernelParams,
    boundary_values: DiscreteDensity,
    points: npt.ArrayLike,
) -> ComplexArray:
    """Reproducing formula: int phi(x - z) (i alpha.N(z)) f(z) dsigma(z).

    For f annihilated by H inside a closed surface with boundary values
    `boundary_values`, this returns f(x) at interior points x.
    """
    check_mesh_density(mesh, boundary_values)
    targets = np.atleast_2d(np.asarray(points, dtype=np.float64))
    sources = 1j * np.einsum("jab,jb->ja", alpha_dot(mesh.normals), boundary_values.values)
    sources *= mesh.areas[:, None]
    out = np.empty((len(targets), 4), dtype=np.complex128)
    for k, x in enumerate(targets):
        out[k] = np.einsum("jab,jb->a", phi(x - mesh.centroids, p), sources)
    return out
