"""Configuration schemas for kernels, potentials and CLI runs."""

from enum import StrEnum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dirac_shell.schemas.defaults import (
    DEFAULT_COUPLING,
    DEFAULT_LAMBDA_MAX,
    DEFAULT_LAMBDA_MIN,
    DEFAULT_MASS,
    DEFAULT_MESH,
    DEFAULT_SCAN_STEPS,
    DEFAULT_TOL_ALGEBRA,
    DEFAULT_TOL_ENERGY,
    DEFAULT_TOL_IDENTITY,
    DEFAULT_TOL_KERNEL,
    DEFAULT_TOL_SYMBOL,
    DEFAULT_WEIGHT,
    DEFAULT_XI,
)


class KernelParams(BaseModel):
    """Parameters of the fundamental solution of H = -i alpha.grad + m beta."""

    m: float = Field(DEFAULT_MASS, gt=0, description="Mass (inverse length)")

    model_config = ConfigDict(frozen=True)


class CauchyQuadrature(StrEnum):
    """How the panel integrals of the Cauchy kernel are evaluated."""

    GALERKIN = "galerkin"  # panel averages, closed-form singular parts near the diagonal
    CENTROID = "centroid"  # one node per panel, disk self-term


class PotentialKind(StrEnum):
    """Shape of the coupling operator omega in the Lambda constructions."""

    SCALAR_LAMBDA = "scalar_lambda"  # omega = lam I
    NORMAL_ALPHA = "normal_alpha"  # omega = lam (alpha.N)
    CAUCHY_COMBO = "cauchy_combo"  # omega = r I + s C (alpha.N)
    NEUMANN_SMALL = "neumann_small"  # omega = lam I + delta (i(1/2 - c) M + C)


class PotentialSpec(BaseModel):
    """Coupling operator omega and trace weight c of a shell potential.

    The potential couples the two boundary traces of a spinor as
    omega (c phi_+ + (1 - c) phi_-).  Which of `lam`, `r`, `s`, `delta` is read
    depends on `kind`; unused parameters are ignored.
    """

    kind: PotentialKind = Field(
        PotentialKind.SCALAR_LAMBDA, description="Shape of omega"
    )
    lam: float = Field(DEFAULT_COUPLING, description="Scalar coupling lambda")
    r: float = Field(0.0, description="Identity weight of the Cauchy combination")
    s: float = Field(0.0, description="C(alpha.N) weight of the Cauchy combination")
    delta: float = Field(0.0, description="Weight of the Neumann-small term")
    c: complex = Field(complex(DEFAULT_WEIGHT), description="Trace weight c")

    model_config = ConfigDict(frozen=True)


class Command(StrEnum):
    """Commands understood by the CLI runner."""

    VERIFY_ALGEBRA = "verify-algebra"
    VERIFY_KERNEL = "verify-kernel"
    VERIFY_IDENTITY = "verify-identity"
    SPECTRUM = "spectrum"
    ZERO_MODES = "zero-modes"
    ORACLE_SPHERE = "oracle-sphere"
    ORACLE_PLANE = "oracle-plane"
    FIELD_CHECK = "field-check"
    LAMBDA_BUILD = "lambda-build"


class RunConfig(BaseModel):
    """Complete, validated configuration of one CLI run.

    Built by merging defaults, a `key = value` config file, DIRACSHELL_*
    environment variables and command-line flags (in increasing precedence).
    """

    command: Command = Field(..., description="Operation to run")
    mesh: str = Field(
        DEFAULT_MESH,
        description="sphere:L[,R] | patch:W,N | path to an OFF file; "
        "comma-separated list for verify-identity",
    )
    m: float = Field(DEFAULT_MASS, gt=0, description="Mass")
    quadrature: CauchyQuadrature = Field(
        CauchyQuadrature.GALERKIN, description="Discretization of C"
    )

    # --- couplings ---
    lam: float = Field(DEFAULT_COUPLING, description="Coupling lambda")
    lambda_min: float = Field(DEFAULT_LAMBDA_MIN, description="Scan lower end")
    lambda_max: float = Field(DEFAULT_LAMBDA_MAX, description="Scan upper end")
    steps: int = Field(DEFAULT_SCAN_STEPS, ge=2, description="Scan grid points")

    # --- Lambda construction ---
    construction: Literal["t4", "t3"] = Field(
        "t4", description="t4: commuting omega; t3: small omega (Neumann bound, direct solve)"
    )
    potential_kind: PotentialKind = Field(PotentialKind.SCALAR_LAMBDA)
    r: float = 0.0
    s: float = 0.0
    delta: float = 0.0
    c: complex = complex(DEFAULT_WEIGHT)

    # --- plane oracle / field check ---
    xi: tuple[float, float] = Field(DEFAULT_XI, description="Plane frequency")
    density: str = Field(
        "constant", description="constant | zero-mode | path to an N x 8 CSV"
    )

    # --- outputs ---
    out: Path | None = Field(None, description="JSON report path (stdout if unset)")
    csv: Path | None = Field(None, description="CSV table path")
    dump_operator: Path | None = Field(None, description="Operator dump path")
    dump_format: Literal["binary", "text"] = "binary"

    # --- tolerance overrides ---
    tol_algebra: float = Field(DEFAULT_TOL_ALGEBRA, gt=0)
    tol_kernel: float = Field(DEFAULT_TOL_KERNEL, gt=0)
    tol_symbol: float = Field(DEFAULT_TOL_SYMBOL, gt=0)
    tol_energy: float = Field(DEFAULT_TOL_ENERGY, gt=0)
    tol_identity: float = Field(DEFAULT_TOL_IDENTITY, gt=0)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_scan_range(self) -> "RunConfig":
        if self.command is Command.ZERO_MODES and self.lambda_min >= self.lambda_max:
            raise ValueError(
                f"empty scan range [{self.lambda_min}, {self.lambda_max}]"
            )
        return self

    @property
    def kernel(self) -> KernelParams:
        return KernelParams(m=self.m)

    @property
    def potential(self) -> PotentialSpec:
        return PotentialSpec(
            kind=self.potential_kind,
            lam=self.lam,
            r=self.r,
            s=self.s,
            delta=self.delta,
            c=self.c,
        )
