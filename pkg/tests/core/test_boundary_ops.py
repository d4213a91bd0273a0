"""Tests for the discretized boundary operators."""

import numpy as np
import pytest
from scipy import sparse

from dirac_shell.core.boundary_ops import (
    BoundaryOperator,
    DiscreteDensity,
    apply_cauchy_rows,
    assemble_anticommutator,
    assemble_anticommutator_direct,
    assemble_cauchy,
    assemble_K,
    assemble_normal_mult,
    clifford_identity_residual,
    factorization_residual,
    jump_operators,
    kernel_remainder,
    operator_norm,
    resolved_identity_residual,
    self_term,
    single_layer_field,
    smooth_densities,
    subdivision_nodes,
    weighted_hermiticity_residual,
    weighted_inner,
)
from dirac_shell.core.dirac_algebra import alpha_dot, beta, identity
from dirac_shell.core.errors import (
    EvaluationPointError,
    GuardViolation,
    MeshFormatError,
    MeshMismatchError,
)
from dirac_shell.core.green_kernel import phi
from dirac_shell.core.surface_mesh import SurfaceMesh, make_flat_patch, make_sphere
from dirac_shell.schemas import CauchyQuadrature, KernelParams
from dirac_shell.services.metrics import decreases_by


def test_centroid_blocks(sphere1, unit_mass: KernelParams) -> None:
    """Off-diagonal blocks are phi(x_i - x_j) a_j, diagonal blocks the self term."""
    mesh, _, _ = sphere1
    C = assemble_cauchy(mesh, unit_mass, CauchyQuadrature.CENTROID)
    assert C.matrix.shape == (320, 320)
    i, j = 3, 41
    expected = phi(mesh.centroids[i] - mesh.centroids[j], unit_mass) * mesh.areas[j]
    np.testing.assert_allclose(C.block(i, j), expected, rtol=1e-14)
    radius = np.sqrt(mesh.areas[i] / np.pi)
    np.testing.assert_allclose(C.block(i, i), 0.5 * radius * beta(), rtol=1e-14)


def test_galerkin_far_blocks_are_one_point(sphere2, unit_mass: KernelParams) -> None:
    """Pairs beyond the near radius keep phi(x_i - x_j) a_j."""
    mesh, C, _ = sphere2
    i = 0
    j = int(np.argmax(np.linalg.norm(mesh.centroids - mesh.centroids[i], axis=1)))
    expected = phi(mesh.centroids[i] - mesh.centroids[j], unit_mass) * mesh.areas[j]
    np.testing.assert_allclose(C.block(i, j), expected, rtol=1e-12)


def test_galerkin_diagonal_is_a_mass_term(sphere1, unit_mass: KernelParams) -> None:
    """The principal value leaves c beta on the diagonal, 0 < c < disk self term."""
    mesh, C, _ = sphere1
    for i in (0, 33, 79):
        block = C.block(i, i)
        c = block[0, 0].real
        np.testing.assert_allclose(block, c * beta(), atol=1e-15)
        assert 0.0 < c < self_term([mesh.areas[i]], unit_mass)[0, 0, 0].real


def test_galerkin_near_block_matches_refined_quadrature(sphere2, unit_mass: KernelParams) -> None:
    """A near, non-adjacent block agrees with a 256 x 256 node double sum."""
    mesh, C, _ = sphere2
    i = 0
    distances = np.linalg.norm(mesh.centroids - mesh.centroids[i], axis=1)
    j = int(np.argmin(np.abs(distances - 2.0 * mesh.mean_panel_diameter)))
    bary = subdivision_nodes(4)
    corners = mesh.vertices[mesh.faces]
    x = bary @ corners[i]
    y = bary @ corners[j]
    kernels = phi(x[:, None, :] - y[None, :, :], unit_mass)
    expected = kernels.mean(axis=(0, 1)) * mesh.areas[j]
    block = C.block(i, j)
    assert np.linalg.norm(block - expected) <= 1e-2 * np.linalg.norm(expected)


def test_kernel_remainder_is_bounded(unit_mass: KernelParams) -> None:
    """phi minus its singular parts tends to -m^2 beta / (4 pi) plus an odd part."""
    direction = np.array([0.6, 0.0, 0.8])
    small = kernel_remainder(1e-4 * direction, unit_mass)
    mirrored = kernel_remainder(-1e-4 * direction, unit_mass)
    even = 0.5 * (small + mirrored)
    np.testing.assert_allclose(even, -beta() / (4 * np.pi), atol=1e-4)
    assert np.max(np.abs(small)) < 0.2


def test_self_term_scales_with_mass() -> None:
    """(m / 2) sqrt(area / pi) beta."""
    block = self_term([np.pi], KernelParams(m=3.0))[0]
    np.testing.assert_allclose(block, 1.5 * beta())


def test_normal_mult_is_involution(sphere1) -> None:
    """M is sparse block-diagonal alpha.N with M^2 = I."""
    mesh, _, M = sphere1
    assert M.is_sparse
    np.testing.assert_allclose(M.block(5, 5), alpha_dot(mesh.normals[5]))
    square = (M.matrix @ M.matrix).toarray()
    np.testing.assert_allclose(square, np.eye(4 * mesh.n_panels), atol=1e-14)


def test_jump_difference(sphere1) -> None:
    """C_+ - C_- = -i M and C_+ + C_- = 2 C."""
    _, C, M = sphere1
    plus, minus = jump_operators(C, M)
    np.testing.assert_allclose(plus.dense() - minus.dense(), -1j * M.dense(), atol=1e-15)
    np.testing.assert_allclose(plus.dense() + minus.dense(), 2 * C.dense(), atol=1e-15)


def test_w_symmetry_to_rounding(sphere2) -> None:
    """W^{1/2} C W^{-1/2} is Hermitian up to rounding."""
    _, C, _ = sphere2
    assert weighted_hermiticity_residual(C) <= 1e-12


@pytest.mark.slow
def test_resolved_identity_converges(sphere1, sphere2, sphere3) -> None:
    """-4 (C alpha.N)^2 = I on smooth densities improves by >= 1.3 per level, <= 0.15 at level 3."""
    residuals = [
        resolved_identity_residual(mesh, C, M) for mesh, C, M in (sphere1, sphere2, sphere3)
    ]
    assert decreases_by(residuals, 1.3)
    assert residuals[-1] <= 0.15


def test_resolved_identity_sees_fewer_modes_than_frobenius(sphere1) -> None:
    """Smooth densities carry a smaller defect than the all-mode Frobenius norm."""
    mesh, C, M = sphere1
    assert resolved_identity_residual(mesh, C, M) < clifford_identity_residual(C, M)


def test_resolved_identity_rejects_other_mesh(sphere1, sphere2) -> None:
    mesh, _, _ = sphere1
    _, C, M = sphere2
    with pytest.raises(MeshMismatchError):
        resolved_identity_residual(mesh, C, M)


def test_smooth_densities(sphere1) -> None:
    """Columns 4 + k hold x e_k at every panel."""
    mesh, _, _ = sphere1
    smooth = smooth_densities(mesh)
    assert smooth.shape == (4 * mesh.n_panels, 16)
    values = smooth.reshape(mesh.n_panels, 4, 16)
    np.testing.assert_array_equal(values[:, 2, 2], 1.0)
    np.testing.assert_array_equal(values[:, 2, 4 + 2], mesh.centroids[:, 0])
    np.testing.assert_array_equal(values[:, 1, 4 + 2], 0.0)


def test_clifford_identity_normal_first_agrees(sphere1) -> None:
    """(MC)^2 and (CM)^2 are similar matrices, so both residuals match."""
    _, C, M = sphere1
    assert clifford_identity_residual(C, M, normal_first=True) == pytest.approx(
        clifford_identity_residual(C, M), rel=1e-10
    )


def test_anticommutator_direct_matches_products(sphere1, unit_mass: KernelParams) -> None:
    """Assembling the smooth kernel directly reproduces MC + CM."""
    mesh, _, M = sphere1
    C = assemble_cauchy(mesh, unit_mass, CauchyQuadrature.CENTROID)
    products = assemble_anticommutator(C, M).dense()
    direct = assemble_anticommutator_direct(mesh, unit_mass).dense()
    np.testing.assert_allclose(direct, products, atol=1e-12 * np.max(np.abs(C.dense())))


@pytest.mark.parametrize("quadrature", list(CauchyQuadrature))
def test_flat_patch_anticommutator_vanishes(
    unit_mass: KernelParams, quadrature: CauchyQuadrature
) -> None:
    """On a flat patch MC + CM and hence K vanish."""
    mesh = make_flat_patch(1.0, 8)
    C, M = assemble_cauchy(mesh, unit_mass, quadrature), assemble_normal_mult(mesh)
    assert np.max(np.abs(assemble_anticommutator(C, M).dense())) <= 1e-12
    assert np.linalg.norm(assemble_K(C, M).dense()) <= 1e-12


def test_factorization_identity_exact(sphere1) -> None:
    """The factorization holds to rounding once the Clifford defect is kept."""
    _, C, M = sphere1
    K = assemble_K(C, M)
    for lam in (0.5, 1.5, -2.3):
        assert factorization_residual(C, M, K, lam) <= 1e-12


def test_factorization_rejects_zero(sphere1) -> None:
    """lambda = 0 is not a coupling."""
    _, C, M = sphere1
    with pytest.raises(ValueError):
        factorization_residual(C, M, assemble_K(C, M), 0.0)


def test_operator_norm_of_normal_mult(sphere1) -> None:
    """alpha.N is unitary, so its norm is 1."""
    _, _, M = sphere1
    assert operator_norm(M) == pytest.approx(1.0, rel=1e-12)


def test_operator_norm_scales(sphere1) -> None:
    """||2 C|| = 2 ||C||."""
    _, C, _ = sphere1
    assert operator_norm(C.with_matrix(2 * C.dense())) == pytest.approx(2 * operator_norm(C))


def test_apply_cauchy_rows_matches_matrix(sphere1, unit_mass: KernelParams, rng) -> None:
    """Matrix-free rows agree with the assembled operator."""
    mesh, C, _ = sphere1
    values = rng.normal(size=(mesh.n_panels, 4)) + 1j * rng.normal(size=(mesh.n_panels, 4))
    density = DiscreteDensity(values, mesh.label)
    rows = [0, 17, 79]
    full = C.apply(density).values[rows]
    np.testing.assert_allclose(
        apply_cauchy_rows(mesh, unit_mass, density, rows), full, atol=1e-12 * np.max(np.abs(full))
    )


def test_apply_cauchy_rows_centroid(sphere1, unit_mass: KernelParams, rng) -> None:
    mesh, _, _ = sphere1
    C = assemble_cauchy(mesh, unit_mass, CauchyQuadrature.CENTROID)
    density = DiscreteDensity(rng.normal(size=(mesh.n_panels, 4)).astype(np.complex128), mesh.label)
    rows = [3, 61]
    full = C.apply(density).values[rows]
    rows_only = apply_cauchy_rows(mesh, unit_mass, density, rows, CauchyQuadrature.CENTROID)
    np.testing.assert_allclose(rows_only, full, atol=1e-12 * np.max(np.abs(full)))


def test_single_layer_far_field_is_one_point_sum(sphere1, unit_mass: KernelParams) -> None:
    """Far from the surface no panel is refined."""
    mesh, _, _ = sphere1
    density = DiscreteDensity(np.ones((mesh.n_panels, 4)), mesh.label)
    target = np.array([10.0, 0.0, 0.0])
    kernels = phi(target - mesh.centroids, unit_mass)
    expected = np.einsum("jab,jb->a", kernels, mesh.areas[:, None] * density.values)
    np.testing.assert_allclose(
        single_layer_field(mesh, unit_mass, density, target)[0], expected, atol=1e-13 * np.max(np.abs(expected))
    )


def test_single_layer_rejects_points_on_surface(sphere1, unit_mass: KernelParams) -> None:
    """Targets at a quadrature node are refused."""
    mesh, _, _ = sphere1
    density = DiscreteDensity(np.ones((mesh.n_panels, 4)), mesh.label)
    with pytest.raises(EvaluationPointError):
        single_layer_field(mesh, unit_mass, density, mesh.centroids[:1])


@pytest.mark.parametrize("level", [0, 1, 3])
def test_subdivision_nodes(level: int) -> None:
    """4^level barycentric nodes averaging to the centroid."""
    nodes = subdivision_nodes(level)
    assert nodes.shape == (4**level, 3)
    np.testing.assert_allclose(nodes.sum(axis=1), 1.0)
    np.testing.assert_allclose(nodes.mean(axis=0), [1 / 3, 1 / 3, 1 / 3])
    assert np.all(nodes > 0)


def test_density_validation() -> None:
    """Densities need shape (N, 4) and finite values."""
    with pytest.raises(ValueError):
        DiscreteDensity(np.ones((3, 3)), "x")
    with pytest.raises(ValueError):
        DiscreteDensity(np.full((2, 4), np.nan), "x")


def test_weighted_norm(sphere1) -> None:
    """A unit spinor everywhere has norm sqrt(total area)."""
    mesh, _, _ = sphere1
    values = np.zeros((mesh.n_panels, 4))
    values[:, 0] = 1.0
    density = DiscreteDensity(values, mesh.label)
    assert density.norm(mesh.areas) == pytest.approx(np.sqrt(mesh.total_area))
    assert density.normalized(mesh.areas).norm(mesh.areas) == pytest.approx(1.0)
    assert weighted_inner(density, density, mesh.areas) == pytest.approx(mesh.total_area)


def test_mesh_mismatch(sphere1, sphere2) -> None:
    """Operators and densities from different meshes cannot be combined."""
    _, C1, _ = sphere1
    _, C2, M2 = sphere2
    with pytest.raises(MeshMismatchError):
        assemble_K(C1, M2)
    with pytest.raises(MeshMismatchError):
        C2.apply(DiscreteDensity(np.ones((80, 4)), C1.mesh_label))


def test_operator_shape_validation() -> None:
    """The matrix must be (4N)x(4N) for N weights."""
    with pytest.raises(ValueError):
        BoundaryOperator(np.eye(8), np.ones(3), "x")
    op = BoundaryOperator(sparse.identity(8, format="csr"), np.ones(2), "x")
    np.testing.assert_array_equal(op.dense(), np.eye(8))
    np.testing.assert_array_equal(op.block(1, 1), identity())


def test_panel_guard(unit_mass: KernelParams) -> None:
    """Dense assembly refuses meshes above the panel guard."""
    with pytest.raises(GuardViolation):
        assemble_cauchy(make_flat_patch(1.0, 60), unit_mass)


def test_coincident_centroids(unit_mass: KernelParams) -> None:
    """Two panels with the same centroid are a mesh error."""
    vertices = [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
    mesh = SurfaceMesh.from_arrays(vertices, [[0, 1, 2], [0, 2, 1]], "doubled", closed=False)
    with pytest.raises(MeshFormatError, match="coincident"):
        assemble_cauchy(mesh, unit_mass)


def test_cauchy_on_coarse_sphere_is_w_symmetric(unit_mass: KernelParams) -> None:
    """W-symmetry holds for meshes with unequal panel areas too."""
    mesh = make_sphere(0, radius=1.5)
    C = assemble_cauchy(mesh, unit_mass)
    assert weighted_hermiticity_residual(C) <= 1e-12
