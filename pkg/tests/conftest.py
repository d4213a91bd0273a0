"""Shared test fixtures."""

from typing import Callable

import numpy as np
import pytest

from dirac_shell.core.boundary_ops import BoundaryOperator
from dirac_shell.core.shell_spectra import SingularValueProfile
from dirac_shell.core.surface_mesh import SurfaceMesh
from dirac_shell.schemas import KernelParams, RunConfig

from .factories import create_run_config, sphere_operators

Operators = tuple[SurfaceMesh, BoundaryOperator, BoundaryOperator]


@pytest.fixture
def run_config_factory() -> Callable[..., RunConfig]:
    """Fixture that returns the run config factory function."""
    return create_run_config


@pytest.fixture
def unit_mass() -> KernelParams:
    """Return kernel parameters with m = 1."""
    return KernelParams(m=1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so that sampled checks are reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def sphere1() -> Operators:
    """Level-1 icosphere (80 panels) with C and M at m = 1."""
    return sphere_operators(1)


@pytest.fixture(scope="session")
def sphere2() -> Operators:
    """Level-2 icosphere (320 panels) with C and M at m = 1."""
    return sphere_operators(2)


@pytest.fixture(scope="session")
def sphere3() -> Operators:
    """Level-3 icosphere (1280 panels) with C and M at m = 1."""
    return sphere_operators(3)


@pytest.fixture(scope="session")
def sphere3_profile(sphere3: Operators) -> SingularValueProfile:
    """Eigendecomposition of the level-3 weighted C, shared by the scans."""
    _, C, _ = sphere3
    return SingularValueProfile(C)
