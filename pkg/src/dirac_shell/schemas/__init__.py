"""Schemas package.

- config.py: Configuration models (KernelParams, PotentialSpec, RunConfig, CauchyQuadrature)
- data.py: Report models (SpectrumReport, ZeroModeRecord, RunReport, etc.)
"""

from .config import (
    CauchyQuadrature,
    Command,
    KernelParams,
    PotentialKind,
    PotentialSpec,
    RunConfig,
)
from .data import (
    ConvergenceRow,
    FieldCheckReport,
    RunReport,
    SpectrumReport,
    ZeroModeRecord,
)

__all__ = [
    "CauchyQuadrature",
    "Command",
    "KernelParams",
    "PotentialKind",
    "PotentialSpec",
    "RunConfig",
    "ConvergenceRow",
    "FieldCheckReport",
    "RunReport",
    "SpectrumReport",
    "ZeroModeRecord",
]
