"""Critical couplings, zero modes and the Lambda operators of shell potentials.

A delta-shell potential of strength lam has a zero-energy eigenfunction
exactly when (I + lam C) has a kernel.  Two discrete views of that condition
are implemented:

- spectral: the eigenvalues a_j of K = C M (MC + CM) give the candidate
  couplings 2 (1 + 4 a_j)^(-1/2);
- scanning: s_min(I + lam C) over a lambda grid, refined at local minima.

The Lambda builders discretize the operators whose self-adjointness decides
the self-adjointness of H + V for the two families of coupling operators
omega (commuting with C(alpha.N), or small).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.optimize import minimize_scalar
from tqdm import tqdm

from dirac_shell.core.boundary_ops import (
    BoundaryOperator,
    DiscreteDensity,
    check_density,
    check_same_mesh,
    matmul,
    operator_norm,
    weighted_hermiticity_residual,
    weighted_inner,
)
from dirac_shell.core.errors import GuardViolation, MeshMismatchError
from dirac_shell.core.surface_mesh import SurfaceMesh
from dirac_shell.schemas import PotentialKind, PotentialSpec, SpectrumReport, ZeroModeRecord
from dirac_shell.schemas.defaults import (
    COMMUTATOR_TOLERANCE,
    CONDITION_GUARD,
    CRITICAL_WINDOW,
    GOLDEN_TOLERANCE,
    HERMITIAN_TOLERANCE,
    ZERO_MODE_FACTOR,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Critical couplings from K
# ---------------------------------------------------------------------------


def coupling_from_eigenvalue(a: float) -> float | None:
    """lam = 2 (1 + 4a)^(-1/2), or None when a <= -1/4."""
    if a <= -0.25:
        return None
    return 2.0 / math.sqrt(1.0 + 4.0 * a)


def eigenvalue_from_coupling(lam: float) -> float:
    """Inverse map a = 1/lam^2 - 1/4."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return 1.0 / lam**2 - 0.25


def critical_couplings(K: BoundaryOperator) -> SpectrumReport:
    """Eigenvalues of the Hermitian part of W^{1/2} K W^{-1/2} and their couplings.

    Args:
        K: Operator from `assemble_K`.

    Returns:
        SpectrumReport with eigenvalues in descending order, so that the
        couplings come out ascending.  Residuals are ||K_w v - a v|| for the
        unsymmetrized K_w.

    Raises:
        numpy.linalg.LinAlgError: If the eigensolver fails.
    """
    weighted = K.weighted()
    hermitian = 0.5 * (weighted + weighted.conj().T)
    try:
        values, vectors = scipy.linalg.eigh(hermitian, driver="evd")
    except np.linalg.LinAlgError:
        logger.error("Eigensolve of K failed on %s", K.mesh_label)
        raise
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    residuals = np.linalg.norm(weighted @ vectors - vectors * values, axis=0)

    lambdas = [coupling_from_eigenvalue(float(a)) for a in values]
    kept = [lam for lam in lambdas if lam is not None]
    logger.info(
        "K on %s: %d eigenvalues, %d below -1/4", K.mesh_label, len(values), len(values) - len(kept)
    )
    return SpectrumReport(
        a_values=[float(a) for a in values],
        lambda_values=kept,
        residuals=[float(r) for r in residuals],
        excluded_count=len(values) - len(kept),
        mesh_label=K.mesh_label,
        m=K.m if K.m is not None else 1.0,
    )


# ---------------------------------------------------------------------------
# Zero-mode scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroModeResult:
    """Refined local minimum of s_min(I + lam C)."""

    lambda_star: float
    smallest_singular_value: float
    density: DiscreteDensity  # unit sigma-norm singular vector
    is_zero_mode: bool = False
    near_critical: bool = False

    def to_record(self) -> ZeroModeRecord:
        return ZeroModeRecord(
            lambda_star=self.lambda_star,
            s_min=self.smallest_singular_value,
            is_zero_mode=self.is_zero_mode,
            near_critical=self.near_critical,
        )


class SingularValueProfile:
    """s_min(lam): smallest singular value of W^{1/2}(I + lam C)W^{-1/2}.

    When the weighted C is Hermitian (to HERMITIAN_TOLERANCE) one
    eigendecomposition C_w = V diag(mu) V^dagger gives every s_min as
    min_k |1 + lam mu_k|; otherwise each call runs a full SVD.
    """

    def __init__(self, C: BoundaryOperator, hermitian_tolerance: float = HERMITIAN_TOLERANCE) -> None:
        self.operator = C
        self._scale = np.repeat(np.sqrt(C.weights), 4)
        weighted = C.weighted()
        self.hermitian = weighted_hermiticity_residual(C) <= hermitian_tolerance
        if self.hermitian:
            self.eigenvalues, self.eigenvectors = scipy.linalg.eigh(
                0.5 * (weighted + weighted.conj().T), driver="evd"
            )
            self._weighted = None
        else:
            logger.info("Weighted C on %s is not Hermitian; scanning with SVDs", C.mesh_label)
            self._weighted = weighted

    def __call__(self, lam: float) -> float:
        return self.singular_pair(lam)[0]

    def singular_pair(self, lam: float) -> tuple[float, npt.NDArray[np.complex128]]:
        """Smallest singular value and its right singular vector (weighted coordinates)."""
        if self._weighted is None:
            magnitudes = np.abs(1.0 + lam * self.eigenvalues)
            k = int(np.argmin(magnitudes))
            return float(magnitudes[k]), self.eigenvectors[:, k]
        shifted = lam * self._weighted
        shifted[np.diag_indices_from(shifted)] += 1.0
        _, singular, vh = scipy.linalg.svd(shifted)
        return float(singular[-1]), vh[-1].conj()

    def density(self, weighted_vector: npt.NDArray[np.complex128]) -> DiscreteDensity:
        """Map a unit vector in weighted coordinates to a unit sigma-norm density."""
        values = weighted_vector / self._scale
        return DiscreteDensity.from_flat(values, self.operator.mesh_label).normalized(
            self.operator.weights
        )

    def curve(self, grid: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """s_min on every grid point (lam = 0 gives exactly 1)."""
        points = np.asarray(grid, dtype=np.float64)
        return np.array([self(lam) for lam in tqdm(points, desc="s_min", disable=None, leave=False)])


def _refine(profile: Callable[[float], float], left: float, middle: float, right: float) -> float:
    """Golden-section search for the minimum bracketed by (left, middle, right)."""
    f_middle = profile(middle)
    bracketed = (
        left < middle < right and f_middle < profile(left) and f_middle < profile(right)
    )
    if bracketed:
        tolerance = GOLDEN_TOLERANCE / (2.0 * max(abs(middle), GOLDEN_TOLERANCE))
        result = minimize_scalar(
            profile, bracket=(left, middle, right), method="golden", tol=tolerance
        )
    else:
        # endpoint or plateau minimum
        result = minimize_scalar(
            profile,
            bounds=(left, right),
            method="bounded",
            options={"xatol": GOLDEN_TOLERANCE},
        )
    return float(result.x)


def zero_mode_scan(
    C: BoundaryOperator,
    lambda_range: tuple[float, float],
    steps: int,
    identity_residual: float | None = None,
    profile: SingularValueProfile | None = None,
) -> list[ZeroModeResult]:
    """Scan s_min(I + lam C) and refine its local minima.

    Args:
        C: Cauchy operator.
        lambda_range: Closed interval (lo, hi), lo < hi.  lam = 0 is skipped.
        steps: Number of grid points, at least 2.
        identity_residual: Discretization error of the mesh (see
            `resolved_identity_residual`).  Interior minima below
            ZERO_MODE_FACTOR times this value are marked as zero modes;
            minima on the ends of the grid never are.
        profile: Precomputed profile of C, reused across scans.

    Returns:
        Refined minima sorted by increasing s_min.

    Raises:
        ValueError: If the range is empty or steps < 2.
    """
    low, high = lambda_range
    if not low < high:
        raise ValueError(f"empty lambda range [{low}, {high}]")
    if steps < 2:
        raise ValueError(f"a scan needs at least 2 steps, got {steps}")
    profile = profile or SingularValueProfile(C)
    grid = np.linspace(low, high, steps)
    grid = grid[grid != 0.0]
    values = profile.curve(grid)
    threshold = None if identity_residual is None else ZERO_MODE_FACTOR * identity_residual

    last = len(grid) - 1
    refined: list[float] = []
    interior: list[bool] = []
    for k in range(len(grid)):
        below_left = k == 0 or values[k] <= values[k - 1]
        below_right = k == last or values[k] <= values[k + 1]
        if not (below_left and below_right):
            continue
        left, right = grid[max(k - 1, 0)], grid[min(k + 1, last)]
        lam = min(max(_refine(profile, left, grid[k], right), low), high)
        if not any(abs(lam - seen) <= 2 * GOLDEN_TOLERANCE for seen in refined):
            refined.append(lam)
            interior.append(0 < k < last)

    results = []
    for lam, inside in zip(refined, interior):
        s_min, vector = profile.singular_pair(lam)
        results.append(
            ZeroModeResult(
                lambda_star=lam,
                smallest_singular_value=s_min,
                density=profile.density(vector),
                is_zero_mode=inside and threshold is not None and s_min < threshold,
                near_critical=abs(abs(lam) - 2.0) < CRITICAL_WINDOW,
            )
        )
    results.sort(key=lambda result: result.smallest_singular_value)
    logger.info(
        "Scan of [%g, %g] on %s: %d minima, %d zero modes",
        low,
        high,
        C.mesh_label,
        len(results),
        sum(r.is_zero_mode for r in results),
    )
    return results


def zero_mode_subspace(
    profile: SingularValueProfile, lambda_star: float, window: float = 0.05
) -> list[DiscreteDensity]:
    """sigma-orthonormal densities whose coupling -1/mu lies within window * |lambda_star|.

    Raises:
        ValueError: If the profile has no Hermitian eigendecomposition.
    """
    if not profile.hermitian:
        raise ValueError("zero-mode subspace needs a Hermitian weighted C")
    mu = profile.eigenvalues
    with np.errstate(divide="ignore"):
        couplings = np.where(mu != 0, -1.0 / mu, np.inf)
    selected = np.flatnonzero(np.abs(couplings - lambda_star) <= window * abs(lambda_star))
    return [profile.density(profile.eigenvectors[:, k]) for k in selected]


def mode_alignment(
    g: DiscreteDensity, basis: list[DiscreteDensity], weights: npt.ArrayLike
) -> float:
    """Fraction ||P g|| / ||g|| of g inside the span of a sigma-orthonormal basis."""
    norm = g.norm(weights)
    if norm == 0:
        raise ValueError("cannot align a zero density")
    captured = sum(abs(weighted_inner(b, g, weights)) ** 2 for b in basis)
    return math.sqrt(captured) / norm


# ---------------------------------------------------------------------------
# Trace identities of the shell coupling
# ---------------------------------------------------------------------------


def _traces(
    C: BoundaryOperator, M: BoundaryOperator, g: DiscreteDensity, u_trace: DiscreteDensity
) -> tuple[np.ndarray, np.ndarray]:
    check_same_mesh(C, M)
    check_density(C, g)
    check_density(C, u_trace)
    cg = C.matrix @ g.flat()
    half_jump = 0.5j * (M.matrix @ g.flat())
    base = u_trace.flat() + cg
    return base - half_jump, base + half_jump


def potential_residual(
    C: BoundaryOperator,
    M: BoundaryOperator,
    lam: float,
    g: DiscreteDensity,
    u_trace: DiscreteDensity,
) -> float:
    """||(lam/2)(phi_+ + phi_-) + g||_sigma with phi_pm = u_trace + C_pm g.

    Zero when the pair (u, g) satisfies the shell coupling condition.
    """
    plus, minus = _traces(C, M, g, u_trace)
    defect = 0.5 * lam * (plus + minus) + g.flat()
    return DiscreteDensity.from_flat(defect, g.mesh_label).norm(C.weights)


def jump_potential(
    C: BoundaryOperator, M: BoundaryOperator, g: DiscreteDensity, u_trace: DiscreteDensity
) -> DiscreteDensity:
    """-i (alpha.N)(phi_+ - phi_-), which equals -g by the jump relations."""
    plus, minus = _traces(C, M, g, u_trace)
    return DiscreteDensity.from_flat(-1j * (M.matrix @ (plus - minus)), g.mesh_label)


# ---------------------------------------------------------------------------
# Lambda constructions
# ---------------------------------------------------------------------------


def _identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def _check_mesh(mesh: SurfaceMesh, C: BoundaryOperator, M: BoundaryOperator) -> None:
    check_same_mesh(C, M)
    if mesh.label != C.mesh_label or mesh.n_panels != C.n_panels:
        raise MeshMismatchError(f"operators on {C.mesh_label!r} used with mesh {mesh.label!r}")


def _omega(spec: PotentialSpec, C: BoundaryOperator, M: BoundaryOperator) -> np.ndarray:
    n = 4 * C.n_panels
    match spec.kind:
        case PotentialKind.SCALAR_LAMBDA:
            return spec.lam * _identity(n)
        case PotentialKind.NORMAL_ALPHA:
            return spec.lam * M.dense()
        case PotentialKind.CAUCHY_COMBO:
            omega = spec.s * matmul(C.matrix, M.matrix)
            omega[np.diag_indices_from(omega)] += spec.r
            return omega
        case PotentialKind.NEUMANN_SMALL:
            omega = spec.delta * (1j * (0.5 - spec.c) * M.dense() + C.dense())
            omega[np.diag_indices_from(omega)] += spec.lam
            return omega
    raise ValueError(f"unknown potential kind {spec.kind}")


def _describe(spec: PotentialSpec) -> str:
    return (
        f"kind={spec.kind.value}, c={spec.c}, lam={spec.lam}, r={spec.r}, "
        f"s={spec.s}, delta={spec.delta}"
    )


def _guard_condition(tau: np.ndarray, spec: PotentialSpec) -> None:
    condition = float(np.linalg.cond(tau))
    logger.debug("cond(tau) = %.3e for %s", condition, _describe(spec))
    if not condition < CONDITION_GUARD:
        raise GuardViolation(
            f"tau is numerically singular (condition {condition:.3e} >= "
            f"{CONDITION_GUARD:.0e}) for {_describe(spec)}"
        )


def combo_tau_coefficients(r: float, s: float, c: complex) -> tuple[complex, complex]:
    """Coefficients (p, q) of tau = p I + q C(alpha.N) for omega = r I + s C(alpha.N).

    Uses (C(alpha.N))^2 = -1/4, so
        p = 1 + i(1 - 2c) r + c(1 - c)(r^2 - s^2/4),
        q = i(1 - 2c) s + 2 c(1 - c) r s,
    and since (p + q X)(p - q X) = (p^2 + q^2/4) I for X = C(alpha.N), tau is
    invertible exactly when p^2 + q^2/4 != 0.
    """
    weight = c * (1 - c)
    p = 1 + 1j * (1 - 2 * c) * r + weight * (r**2 - s**2 / 4)
    q = 1j * (1 - 2 * c) * s + 2 * weight * r * s
    return complex(p), complex(q)


def build_lambda_t4(
    mesh: SurfaceMesh, C: BoundaryOperator, M: BoundaryOperator, spec: PotentialSpec
) -> BoundaryOperator:
    """Lambda for a coupling omega that commutes with C(alpha.N).

        tau    = I + i(1 - 2c) omega + c(1 - c) omega^2
        Lambda = -(alpha.N) tau^{-1} (omega + i(1/2 - c) omega^2 - C(alpha.N) omega^2)

    Raises:
        ValueError: For potential kinds outside this family.
        GuardViolation: If omega does not commute with C(alpha.N) or tau is
            numerically singular.
    """
    _check_mesh(mesh, C, M)
    if spec.kind is PotentialKind.NEUMANN_SMALL:
        raise ValueError("neumann_small potentials are built with build_lambda_t3")
    c = spec.c
    cm = matmul(C.matrix, M.matrix)
    omega = _omega(spec, C, M)

    commutator = np.linalg.norm(omega @ cm - cm @ omega)
    scale = np.linalg.norm(omega) * np.linalg.norm(cm)
    if scale > 0 and commutator > COMMUTATOR_TOLERANCE * scale:
        raise GuardViolation(
            f"omega does not commute with C(alpha.N) "
            f"(relative commutator {commutator / scale:.3e}) for {_describe(spec)}"
        )

    omega_sq = omega @ omega
    tau = _identity(len(omega)) + 1j * (1 - 2 * c) * omega + c * (1 - c) * omega_sq
    _guard_condition(tau, spec)
    rhs = omega + 1j * (0.5 - c) * omega_sq - cm @ omega_sq
    solved = scipy.linalg.solve(tau, rhs)
    matrix = -matmul(M.matrix, solved)
    logger.info("Built t4 Lambda on %s for %s", mesh.label, _describe(spec))
    return C.with_matrix(matrix)


def lambda_t4_closed_form(C: BoundaryOperator, M: BoundaryOperator, lam: float) -> BoundaryOperator:
    """Lambda of omega = lam I with c = 1/2: 4 lam / (lam^2 + 4) (lam (alpha.N) C - 1)(alpha.N)."""
    check_same_mesh(C, M)
    mc = matmul(M.matrix, C.matrix) * lam
    mc[np.diag_indices_from(mc)] -= 1.0
    return C.with_matrix(4 * lam / (lam**2 + 4) * matmul(mc, M.matrix))


def build_lambda_t3(
    mesh: SurfaceMesh, C: BoundaryOperator, M: BoundaryOperator, spec: PotentialSpec
) -> BoundaryOperator:
    """Lambda = -tau^{-1} omega with tau = I + omega (i(1/2 - c)(alpha.N) + C).

    The Neumann bound ||omega|| (1/2 + |c| + ||C||) < 1 guarantees that tau is
    invertible; Lambda itself comes from a direct solve with tau.

    Raises:
        ValueError: For cauchy_combo potentials.
        GuardViolation: If the smallness bound fails or tau is singular.
    """
    _check_mesh(mesh, C, M)
    if spec.kind is PotentialKind.CAUCHY_COMBO:
        raise ValueError("cauchy_combo potentials are built with build_lambda_t4")
    c = spec.c
    omega = _omega(spec, C, M)
    omega_norm = operator_norm(C.with_matrix(omega))
    c_norm = operator_norm(C)
    bound = omega_norm * (0.5 + abs(c) + c_norm)
    if not bound < 1.0:
        raise GuardViolation(
            f"Neumann bound violated: ||omega|| = {omega_norm:.4g}, ||C|| = {c_norm:.4g}, "
            f"|c| = {abs(c):.4g}, product {bound:.4g} >= 1 for {_describe(spec)}"
        )

    trace_map = 1j * (0.5 - c) * M.dense() + C.dense()
    tau = omega @ trace_map
    tau[np.diag_indices_from(tau)] += 1.0
    _guard_condition(tau, spec)
    matrix = -scipy.linalg.solve(tau, omega)
    result = C.with_matrix(matrix)
    logger.info(
        "Built t3 Lambda on %s (bound %.3g, hermiticity %.3e)",
        mesh.label,
        bound,
        weighted_hermiticity_residual(result),
    )
    return result
