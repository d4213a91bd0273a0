"""Command runner: turns a validated RunConfig into a report and artifacts.

Each command has one handler returning a CommandOutcome.  `run` wraps the
handler, writes the JSON report, the optional CSV table and operator dump,
and maps failures to the documented exit codes.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError
from tqdm import tqdm

from dirac_shell.core import dirac_algebra, green_kernel, plane_oracle, sphere_oracle
from dirac_shell.core.boundary_ops import (
    BoundaryOperator,
    DiscreteDensity,
    assemble_cauchy,
    assemble_K,
    assemble_normal_mult,
    clifford_identity_residual,
    factorization_residual,
    operator_norm,
    resolved_identity_residual,
    weighted_hermiticity_residual,
)
from dirac_shell.core.errors import (
    EvaluationPointError,
    GuardViolation,
    MeshFormatError,
    MeshMismatchError,
    MeshSpecError,
)
from dirac_shell.core.shell_spectra import (
    SingularValueProfile,
    ZeroModeResult,
    build_lambda_t3,
    build_lambda_t4,
    combo_tau_coefficients,
    critical_couplings,
    lambda_t4_closed_form,
    zero_mode_scan,
)
from dirac_shell.core.surface_mesh import SurfaceMesh, resolve_mesh_spec, split_mesh_specs
from dirac_shell.schemas import Command, ConvergenceRow, PotentialKind, RunConfig, RunReport
from dirac_shell.schemas.columns import ColumnNames
from dirac_shell.schemas.defaults import PROFILE_RADII, VERIFY_SAMPLES, VERIFY_SEED
from dirac_shell.services import export
from dirac_shell.services.field_check import constant_density, field_check, is_unit_sphere
from dirac_shell.services.metrics import decreases_by, relative_deviation

logger = logging.getLogger(__name__)

# Finite-difference test points of the sphere eigenfunction (inside, outside).
_SPHERE_PROBES = ((0.3, 0.2, 0.4), (1.5, 0.0, 0.2))
# Generic spinor for the plane energy identity; it has a kernel component at every xi.
_PLANE_SPINOR = (0.5, 0.5, 0.5, 0.5)
# Bound on the quadratic residual of the analytic sphere couplings.
_ROOT_TOLERANCE = 1e-12


class ExitCode(IntEnum):
    OK = 0
    TOLERANCE = 1
    USAGE = 2
    MESH = 3
    GUARD = 4
    MISMATCH = 5
    NUMERICAL = 6


@dataclass
class CommandOutcome:
    """What a handler produced: JSON result, pass flag and optional artifacts."""

    result: dict[str, Any]
    passed: bool = True
    rows: list[dict[str, Any]] | None = None
    columns: list[str] | None = None
    operator: BoundaryOperator | None = None


def exit_code_for(exc: BaseException) -> ExitCode:
    """Map an exception raised by a handler to its exit code."""
    match exc:
        case MeshFormatError() | MeshSpecError() | FileNotFoundError():
            return ExitCode.MESH
        case GuardViolation():
            return ExitCode.GUARD
        case MeshMismatchError() | EvaluationPointError():
            return ExitCode.MISMATCH
        case np.linalg.LinAlgError():
            return ExitCode.NUMERICAL
        case ValidationError() | ValueError():
            return ExitCode.USAGE
    raise exc


def _operators(mesh: SurfaceMesh, config: RunConfig) -> tuple[BoundaryOperator, BoundaryOperator]:
    return assemble_cauchy(mesh, config.kernel, config.quadrature), assemble_normal_mult(mesh)


def _mesh(config: RunConfig) -> SurfaceMesh:
    mesh = resolve_mesh_spec(config.mesh)
    logger.info("Mesh %s: %d panels, h=%.4g", mesh.label, mesh.n_panels, mesh.mean_panel_diameter)
    return mesh


# ---------------------------------------------------------------------------
# verify-*
# ---------------------------------------------------------------------------


def verify_algebra(config: RunConfig) -> CommandOutcome:
    rng = np.random.default_rng(VERIFY_SEED)
    vectors = rng.normal(size=(VERIFY_SAMPLES, 3))
    squares = dirac_algebra.alpha_dot(vectors) @ dirac_algebra.alpha_dot(vectors)
    lengths = np.sum(vectors**2, axis=1)[:, None, None] * dirac_algebra.identity()
    square_residual = float(np.max(np.abs(squares - lengths) / lengths[:, :1, :1].real))
    hermiticity = max(
        dirac_algebra.hermiticity_defect(m)
        for m in (*dirac_algebra.alphas(), dirac_algebra.beta())
    )
    anticommutation = dirac_algebra.clifford_residual()
    worst = max(anticommutation, square_residual, hermiticity)
    return CommandOutcome(
        {
            "anticommutation_residual": anticommutation,
            "square_residual": square_residual,
            "hermiticity_defect": hermiticity,
        },
        passed=worst <= config.tol_algebra,
    )


def verify_kernel(config: RunConfig) -> CommandOutcome:
    p = config.kernel
    rng = np.random.default_rng(VERIFY_SEED)
    offsets = rng.normal(size=(VERIFY_SAMPLES, 3))
    frequencies = rng.normal(size=(VERIFY_SAMPLES, 3))

    values = green_kernel.phi(offsets, p)
    scale = np.max(np.abs(values), axis=(-2, -1))
    mirrored = np.conj(np.swapaxes(green_kernel.phi(-offsets, p), -2, -1))
    symmetry = float(np.max(np.max(np.abs(values - mirrored), axis=(-2, -1)) / scale))
    parts = green_kernel.kernel_split(offsets, p)
    # the split terms are individually larger than phi far out; compare at their scale
    split_scale = np.max(np.abs(parts[2]), axis=(-2, -1))
    split = float(np.max(np.max(np.abs(sum(parts) - values), axis=(-2, -1)) / split_scale))
    product = green_kernel.dirac_symbol(frequencies, p) @ green_kernel.phi_symbol(frequencies, p)
    inverse = float(np.max(np.abs(product - dirac_algebra.identity())))
    return CommandOutcome(
        {"symmetry_residual": symmetry, "split_residual": split, "symbol_inverse_residual": inverse},
        passed=max(symmetry, split, inverse) <= config.tol_kernel,
    )


def verify_identity(config: RunConfig) -> CommandOutcome:
    specs = split_mesh_specs(config.mesh)
    if not specs:
        raise MeshSpecError(f"no mesh in {config.mesh!r}")
    rows: list[ConvergenceRow] = []
    last_cauchy: BoundaryOperator | None = None
    for spec in tqdm(specs, desc="meshes", disable=None):
        mesh = resolve_mesh_spec(spec)
        C, M = _operators(mesh, config)
        residual = resolved_identity_residual(mesh, C, M)
        frobenius = clifford_identity_residual(C, M)
        logger.info(
            "Clifford residual on %s: %.4e resolved, %.4e all modes", mesh.label, residual, frobenius
        )
        rows.append(
            ConvergenceRow(
                label=mesh.label,
                panels=mesh.n_panels,
                h=mesh.mean_panel_diameter,
                residual=residual,
                frobenius_residual=frobenius,
            )
        )
        last_cauchy = C
    residuals = [row.residual for row in rows]
    decreasing = decreases_by(residuals)
    return CommandOutcome(
        {
            "rows": [row.model_dump() for row in rows],
            "decreasing": decreasing,
            "w_symmetry_residual": weighted_hermiticity_residual(last_cauchy) if last_cauchy is not None else None,
        },
        passed=decreasing and residuals[-1] <= config.tol_identity,
        rows=[row.model_dump() for row in rows],
        columns=[
            ColumnNames.LABEL,
            ColumnNames.PANELS,
            ColumnNames.H,
            ColumnNames.RESIDUAL,
            ColumnNames.FROBENIUS_RESIDUAL,
        ],
        operator=last_cauchy,
    )


# ---------------------------------------------------------------------------
# Spectral commands
# ---------------------------------------------------------------------------


def spectrum(config: RunConfig) -> CommandOutcome:
    mesh = _mesh(config)
    C, M = _operators(mesh, config)
    K = assemble_K(C, M)
    report = critical_couplings(K)
    result: dict[str, Any] = {
        "mesh_label": report.mesh_label,
        "m": report.m,
        "pairs": report.entries(),
        "excluded_count": report.excluded_count,
    }
    result["clifford_residual"] = clifford_identity_residual(C, M)
    result["resolved_identity_residual"] = resolved_identity_residual(mesh, C, M)
    result["factorization_residual"] = factorization_residual(C, M, K, config.lam)
    if is_unit_sphere(mesh):
        roots = sphere_oracle.critical_lambda_roots(config.m)
        result["sphere_a_values"] = [1.0 / lam**2 - 0.25 for lam in roots]
    return CommandOutcome(
        result,
        rows=report.entries(),
        columns=[ColumnNames.A, ColumnNames.LAMBDA, ColumnNames.RESIDUAL],
        operator=K,
    )


def _scan(
    config: RunConfig, mesh: SurfaceMesh, C: BoundaryOperator, M: BoundaryOperator
) -> tuple[SingularValueProfile, list[ZeroModeResult]]:
    profile = SingularValueProfile(C)
    results = zero_mode_scan(
        C,
        (config.lambda_min, config.lambda_max),
        config.steps,
        identity_residual=resolved_identity_residual(mesh, C, M),
        profile=profile,
    )
    return profile, results


def zero_modes(config: RunConfig) -> CommandOutcome:
    mesh = _mesh(config)
    C, M = _operators(mesh, config)
    profile, results = _scan(config, mesh, C, M)
    grid = np.linspace(config.lambda_min, config.lambda_max, config.steps)
    grid = grid[grid != 0.0]
    curve = profile.curve(grid)
    result: dict[str, Any] = {
        "mesh_label": mesh.label,
        "minima": [r.to_record().model_dump() for r in results],
        "hermitian_profile": profile.hermitian,
    }
    if is_unit_sphere(mesh):
        result["sphere_roots"] = list(sphere_oracle.critical_lambda_roots(config.m))
    return CommandOutcome(
        result,
        rows=[{ColumnNames.LAMBDA: lam, ColumnNames.S_MIN: s} for lam, s in zip(grid, curve)],
        columns=[ColumnNames.LAMBDA, ColumnNames.S_MIN],
        operator=C,
    )


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def oracle_sphere(config: RunConfig) -> CommandOutcome:
    m = config.m
    roots = sphere_oracle.critical_lambda_roots(m)
    residuals = [sphere_oracle.quadratic_residual(lam, m) for lam in roots]
    rows = []
    for lam in roots:
        for r in PROFILE_RADII:
            rows.append(
                {
                    ColumnNames.LAMBDA: lam,
                    ColumnNames.RADIUS: r,
                    ColumnNames.F: sphere_oracle.f_lambda(r, lam, m),
                    ColumnNames.F_PRIME: sphere_oracle.f_lambda_derivative(r, lam, m),
                }
            )
    dirac = [
        max(sphere_oracle.dirac_residual(x, lam, m) for x in _SPHERE_PROBES) for lam in roots
    ]
    return CommandOutcome(
        {
            "m": m,
            "roots": list(roots),
            "quadratic_residuals": residuals,
            "root_product": roots[0] * roots[1],
            "limits": [list(sphere_oracle.f_lambda_limits(lam, m)) for lam in roots],
            "dirac_residuals": dirac,
        },
        passed=max(residuals) <= _ROOT_TOLERANCE,
        rows=rows,
        columns=[ColumnNames.LAMBDA, ColumnNames.RADIUS, ColumnNames.F, ColumnNames.F_PRIME],
    )


def oracle_plane(config: RunConfig) -> CommandOutcome:
    p = config.kernel
    xi = config.xi
    symbol = plane_oracle.lambda_symbol(xi, p)
    eigenvalues = symbol.eigenvalues()
    eigen_residual = float(np.max(np.abs(eigenvalues - np.array([-1.0, -1.0, 0.0, 0.0]))))
    s_hat, plus, minus = plane_oracle.s_symbol(xi, p)
    s_squared = 4.0 * np.pi**2 * (xi[0] ** 2 + xi[1] ** 2) + p.m**2
    square_residual = float(
        np.max(np.abs(s_hat.value @ s_hat.value - s_squared * dirac_algebra.identity()))
    )
    projector_residual = float(
        np.max(np.abs(plus.value + minus.value - dirac_algebra.identity()))
    )
    balance = plane_oracle.energy_identity_check(xi, p, _PLANE_SPINOR)
    return CommandOutcome(
        {
            "xi": list(xi),
            "m": p.m,
            "lambda_eigenvalues": eigenvalues.tolist(),
            "eigenvalue_residual": eigen_residual,
            "s_square_residual": square_residual,
            "projector_residual": projector_residual,
            "energy_left": balance.left,
            "energy_right": balance.right,
            "energy_defect": balance.defect,
        },
        passed=max(eigen_residual, square_residual / s_squared, projector_residual)
        <= config.tol_symbol
        and balance.defect <= config.tol_energy,
    )


# ---------------------------------------------------------------------------
# Field check and Lambda constructions
# ---------------------------------------------------------------------------


def _density(config: RunConfig, mesh: SurfaceMesh) -> DiscreteDensity:
    if config.density == "constant":
        return constant_density(mesh)
    if config.density == "zero-mode":
        C, M = _operators(mesh, config)
        _, results = _scan(config, mesh, C, M)
        if not results:
            raise ValueError("the scan found no minimum to take a density from")
        logger.info("Using the zero-mode density at lambda=%.6g", results[0].lambda_star)
        return results[0].density
    return export.read_density(Path(config.density), mesh.label, mesh.n_panels)


def field_check_command(config: RunConfig) -> CommandOutcome:
    mesh = _mesh(config)
    report = field_check(
        mesh, config.kernel, _density(config, mesh), quadrature=config.quadrature
    )
    rows = []
    for t, inside, outside in zip(report.offsets, report.inside_deviation, report.outside_deviation):
        rows.append({ColumnNames.OFFSET: t, ColumnNames.SIDE: "inside", ColumnNames.DEVIATION: inside})
        rows.append({ColumnNames.OFFSET: t, ColumnNames.SIDE: "outside", ColumnNames.DEVIATION: outside})
    result = report.model_dump()
    result["decreasing"] = decreases_by(report.max_deviation)
    return CommandOutcome(
        result,
        rows=rows,
        columns=[ColumnNames.OFFSET, ColumnNames.SIDE, ColumnNames.DEVIATION],
    )


def lambda_build(config: RunConfig) -> CommandOutcome:
    mesh = _mesh(config)
    C, M = _operators(mesh, config)
    spec = config.potential
    builder = build_lambda_t4 if config.construction == "t4" else build_lambda_t3
    Lambda = builder(mesh, C, M, spec)
    result: dict[str, Any] = {
        "construction": config.construction,
        "potential": spec.model_dump(mode="json"),
        "hermiticity_residual": weighted_hermiticity_residual(Lambda),
        "cauchy_w_symmetry_residual": weighted_hermiticity_residual(C),
        "norm": operator_norm(Lambda),
    }
    if (
        config.construction == "t4"
        and spec.kind is PotentialKind.SCALAR_LAMBDA
        and spec.c == 0.5
    ):
        closed = lambda_t4_closed_form(C, M, spec.lam)
        result["closed_form_deviation"] = relative_deviation(Lambda.dense(), closed.dense())
    if spec.kind is PotentialKind.CAUCHY_COMBO:
        p_coeff, q_coeff = combo_tau_coefficients(spec.r, spec.s, spec.c)
        result["tau_coefficients"] = [str(p_coeff), str(q_coeff)]
        result["tau_determinant"] = str(p_coeff**2 + q_coeff**2 / 4)
    return CommandOutcome(result, operator=Lambda)


HANDLERS: dict[Command, Callable[[RunConfig], CommandOutcome]] = {
    Command.VERIFY_ALGEBRA: verify_algebra,
    Command.VERIFY_KERNEL: verify_kernel,
    Command.VERIFY_IDENTITY: verify_identity,
    Command.SPECTRUM: spectrum,
    Command.ZERO_MODES: zero_modes,
    Command.ORACLE_SPHERE: oracle_sphere,
    Command.ORACLE_PLANE: oracle_plane,
    Command.FIELD_CHECK: field_check_command,
    Command.LAMBDA_BUILD: lambda_build,
}


def execute(config: RunConfig) -> tuple[RunReport, CommandOutcome]:
    """Run the handler of `config.command` and wrap its result in a RunReport."""
    outcome = HANDLERS[config.command](config)
    report = RunReport(
        command=config.command.value,
        config=config.model_dump(mode="json"),
        result=outcome.result,
        passed=outcome.passed,
    )
    return report, outcome


def run(config: RunConfig, echo: Callable[[str], Any] = print) -> int:
    """Execute a command and write its artifacts.

    The JSON report goes to `config.out`, or to `echo` when unset.

    Returns:
        Exit code (see ExitCode).
    """
    try:
        report, outcome = execute(config)
    except Exception as exc:
        code = exit_code_for(exc)
        logger.error("%s failed (%s): %s", config.command.value, type(exc).__name__, exc)
        return code

    text = export.write_report(report, config.out)
    if config.out is None:
        echo(text.rstrip("\n"))
    if config.csv is not None and outcome.rows is not None and outcome.columns is not None:
        export.write_table(outcome.rows, outcome.columns, config.csv)
    if config.dump_operator is not None:
        if outcome.operator is None:
            logger.warning("%s produces no operator to dump", config.command.value)
        else:
            export.dump_operator(outcome.operator, config.dump_operator, config.dump_format)

    if not report.passed:
        logger.error("%s: declared tolerance violated", config.command.value)
        return ExitCode.TOLERANCE
    return ExitCode.OK
