"""Report schemas produced by the spectral and verification operations."""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .defaults import SCHEMA_VERSION


class SpectrumReport(BaseModel):
    """Eigenvalues a_j of the symmetrized K and the couplings derived from them.

    `a_values` and `residuals` are sorted by decreasing a, so the first
    `len(lambda_values)` entries line up with `lambda_values`, which are
    ascending.  Eigenvalues a <= -1/4 have no coupling and are only counted.
    """

    a_values: list[float] = Field(..., description="Eigenvalues, descending")
    lambda_values: list[float] = Field(
        ..., description="2 (1 + 4a)^(-1/2) for a > -1/4, ascending"
    )
    residuals: list[float] = Field(..., description="||K v - a v|| per pair")
    excluded_count: int = Field(..., ge=0, description="Eigenvalues a <= -1/4")
    mesh_label: str
    m: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_alignment(self) -> "SpectrumReport":
        if len(self.residuals) != len(self.a_values):
            raise ValueError("one residual per eigenvalue required")
        if len(self.lambda_values) + self.excluded_count != len(self.a_values):
            raise ValueError("lambda values and excluded count must cover a_values")
        if any(lam <= 0 for lam in self.lambda_values):
            raise ValueError("critical couplings are positive")
        return self

    def entries(self) -> list[dict[str, float | None]]:
        """Rows {a, lambda, residual}; lambda is None for excluded eigenvalues."""
        lambdas: list[float | None] = list(self.lambda_values)
        lambdas += [None] * self.excluded_count
        return [
            {"a": a, "lambda": lam, "residual": res}
            for a, lam, res in zip(self.a_values, lambdas, self.residuals)
        ]


class ZeroModeRecord(BaseModel):
    """Serializable part of a zero-mode scan result."""

    lambda_star: float
    s_min: float = Field(..., ge=0)
    is_zero_mode: bool = Field(..., description="s_min below the detection threshold")
    near_critical: bool = Field(..., description="|lambda| close to 2")

    model_config = ConfigDict(frozen=True)


class ConvergenceRow(BaseModel):
    """One mesh of a refinement study."""

    label: str
    panels: int = Field(..., gt=0)
    h: float = Field(..., gt=0, description="Mean panel diameter")
    residual: float = Field(..., ge=0, description="Clifford residual on smooth densities")
    frobenius_residual: float = Field(..., ge=0, description="Clifford residual over all modes")

    model_config = ConfigDict(frozen=True)


class FieldCheckReport(BaseModel):
    """Plemelj-limit and reproducing-formula agreement of the single-layer field."""

    mesh_label: str
    h: float
    offsets: list[float] = Field(..., description="Distances t from the surface")
    inside_deviation: list[float] = Field(..., description="vs C_+ g, per offset")
    outside_deviation: list[float] = Field(..., description="vs C_- g, per offset")
    jump_deviation: list[float] = Field(..., description="vs -i(alpha.N) g")
    max_deviation: list[float] = Field(..., description="max of the two sides")
    reproducing_residual: float | None = Field(
        None, description="Relative error of the reproducing formula (sphere only)"
    )

    model_config = ConfigDict(frozen=True)


class RunReport(BaseModel):
    """Top-level JSON document written by every CLI command."""

    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    command: str
    config: dict[str, Any]
    result: dict[str, Any]
    passed: bool

    model_config = ConfigDict(frozen=True, populate_by_name=True)
