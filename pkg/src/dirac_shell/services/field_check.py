"""Off-surface checks of the jump formulae and the reproducing formula.

The single-layer field of a density g is evaluated at x_i -+ t N_i for a
sample of panels i and offsets t proportional to the mean panel diameter h.
As t -> 0 the inner values approach (C_+ g)_i, the outer ones (C_- g)_i, and
their difference approaches -i (alpha.N) g.
"""

import logging

import numpy as np
from tqdm import tqdm

from dirac_shell.core.boundary_ops import (
    DiscreteDensity,
    apply_cauchy_rows,
    check_mesh_density,
    reproduce_interior,
    single_layer_field,
)
from dirac_shell.core.dirac_algebra import alpha_dot
from dirac_shell.core.sphere_oracle import boundary_values, critical_lambda_roots, phi_lambda
from dirac_shell.core.surface_mesh import SurfaceMesh
from dirac_shell.schemas import CauchyQuadrature, FieldCheckReport, KernelParams
from dirac_shell.schemas.defaults import (
    FIELD_OFFSET_FACTORS,
    FIELD_SAMPLE_SIZE,
    REPRODUCING_POINT,
)
from dirac_shell.services.metrics import relative_deviation, sample_indices

logger = logging.getLogger(__name__)

# Vertex radii within this of 1 identify the unit sphere.
_UNIT_SPHERE_TOLERANCE = 1e-9


def constant_density(mesh: SurfaceMesh) -> DiscreteDensity:
    """g_i = (1, 0, 0, 0) on every panel."""
    values = np.zeros((mesh.n_panels, 4), dtype=np.complex128)
    values[:, 0] = 1.0
    return DiscreteDensity(values, mesh.label)


def is_unit_sphere(mesh: SurfaceMesh) -> bool:
    radii = np.linalg.norm(mesh.vertices, axis=1)
    return mesh.closed and bool(np.all(np.abs(radii - 1.0) < _UNIT_SPHERE_TOLERANCE))


def reproducing_residual(
    mesh: SurfaceMesh, p: KernelParams, point: tuple[float, float, float] = REPRODUCING_POINT
) -> float:
    """Relative error of the reproducing formula for the interior zero mode.

    The inside branch of the sphere eigenfunction solves H f = 0 in the ball,
    so its boundary values must reproduce f at `point`.
    """
    lam = critical_lambda_roots(p.m)[1]
    traces = DiscreteDensity(boundary_values(mesh.centroids, lam, p.m, "inside"), mesh.label)
    reproduced = reproduce_interior(mesh, p, traces, [point])[0]
    return relative_deviation(reproduced, phi_lambda(np.asarray(point), lam, p.m))


def field_check(
    mesh: SurfaceMesh,
    p: KernelParams,
    density: DiscreteDensity,
    offset_factors: tuple[float, ...] = FIELD_OFFSET_FACTORS,
    sample_size: int = FIELD_SAMPLE_SIZE,
    quadrature: CauchyQuadrature = CauchyQuadrature.GALERKIN,
) -> FieldCheckReport:
    """Compare the single-layer field near the surface with C_+- g.

    Args:
        mesh: Closed or open surface.
        p: Kernel parameters.
        density: Density on `mesh`.
        offset_factors: Offsets t in units of the mean panel diameter h.
        sample_size: Number of panels evaluated.
        quadrature: Discretization of C whose rows give the limits.

    Raises:
        MeshMismatchError: If the density lives on another mesh.
        EvaluationPointError: If an offset point falls onto the surface.
    """
    check_mesh_density(mesh, density)
    h = mesh.mean_panel_diameter
    rows = sample_indices(mesh.n_panels, sample_size)
    normals = mesh.normals[rows]
    anchors = mesh.centroids[rows]

    cauchy = apply_cauchy_rows(mesh, p, density, rows, quadrature)
    jump = np.einsum("iab,ib->ia", alpha_dot(normals), density.values[rows])
    inside_limit = cauchy - 0.5j * jump
    outside_limit = cauchy + 0.5j * jump

    offsets, inside, outside, jumps = [], [], [], []
    for factor in tqdm(offset_factors, desc="offsets", disable=None, leave=False):
        t = factor * h
        field_in = single_layer_field(mesh, p, density, anchors - t * normals)
        field_out = single_layer_field(mesh, p, density, anchors + t * normals)
        offsets.append(t)
        inside.append(relative_deviation(field_in, inside_limit))
        outside.append(relative_deviation(field_out, outside_limit))
        jumps.append(relative_deviation(field_in - field_out, -1j * jump))
        logger.debug(
            "t=%.4g: inside %.3e, outside %.3e, jump %.3e", t, inside[-1], outside[-1], jumps[-1]
        )

    reproducing = reproducing_residual(mesh, p) if is_unit_sphere(mesh) else None
    logger.info("Field check on %s: %d panels sampled", mesh.label, len(rows))
    return FieldCheckReport(
        mesh_label=mesh.label,
        h=h,
        offsets=offsets,
        inside_deviation=inside,
        outside_deviation=outside,
        jump_deviation=jumps,
        max_deviation=[max(a, b) for a, b in zip(inside, outside)],
        reproducing_residual=reproducing,
    )
