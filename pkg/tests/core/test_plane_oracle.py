"""Tests for the Fourier-symbol analytics of the flat shell."""

import numpy as np
import pytest

from dirac_shell.core.dirac_algebra import identity
from dirac_shell.core.plane_oracle import (
    cauchy_symbol,
    energy_identity_check,
    kernel_projector,
    lambda_symbol,
    plane_wave_defect,
    s_symbol,
)
from dirac_shell.schemas import KernelParams

FREQUENCIES = [(0.0, 0.0), (0.3, 0.0), (0.5, -0.5), (1.0, 2.0), (-3.0, 0.7)]


def _random_spinor(rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=4) + 1j * rng.normal(size=4)


def test_lambda_symbol_eigenvalues(rng) -> None:
    """At lam = 2 the eigenvalues are {-1, -1, 0, 0} for every (xi, m)."""
    for _ in range(1000):
        xi = rng.uniform(-5.0, 5.0, size=2)
        p = KernelParams(m=float(rng.uniform(0.1, 10.0)))
        symbol = lambda_symbol(xi, p)
        assert symbol.hermiticity_defect <= 1e-14
        np.testing.assert_allclose(symbol.eigenvalues(), [-1.0, -1.0, 0.0, 0.0], atol=1e-12)


def test_lambda_symbol_other_couplings(unit_mass: KernelParams) -> None:
    """Away from lam = 2 the symbol is invertible; lam = 0 is rejected."""
    eigenvalues = lambda_symbol((0.4, 0.1), unit_mass, lam=1.0).eigenvalues()
    np.testing.assert_allclose(eigenvalues, [-1.5, -1.5, -0.5, -0.5], atol=1e-12)
    with pytest.raises(ValueError):
        lambda_symbol((0.4, 0.1), unit_mass, lam=0.0)


def test_cauchy_symbol_squares_to_quarter(unit_mass: KernelParams) -> None:
    """F(C)^2 = I / 4."""
    for xi in FREQUENCIES:
        value = cauchy_symbol(xi, unit_mass).value
        np.testing.assert_allclose(value @ value, 0.25 * identity(), atol=1e-14)


def test_frequency_must_be_planar(unit_mass: KernelParams) -> None:
    """Three-component frequencies are rejected."""
    with pytest.raises(ValueError):
        cauchy_symbol((0.1, 0.2, 0.3), unit_mass)


def test_s_symbol_and_projectors(unit_mass: KernelParams) -> None:
    """S is Hermitian with S^2 = s^2 I, and P_pm split it into +-s."""
    for xi in FREQUENCIES:
        s_hat, plus, minus = s_symbol(xi, unit_mass)
        s = np.sqrt(4 * np.pi**2 * (xi[0] ** 2 + xi[1] ** 2) + 1.0)
        assert s_hat.hermiticity_defect <= 1e-13
        np.testing.assert_allclose(s_hat.value @ s_hat.value, s**2 * identity(), atol=1e-12 * s**2)
        np.testing.assert_allclose(plus.value + minus.value, identity(), atol=1e-13)
        np.testing.assert_allclose(plus.value @ minus.value, np.zeros((4, 4)), atol=1e-13)
        np.testing.assert_allclose(s_hat.value @ plus.value, s * plus.value, atol=1e-12 * s)
        assert np.trace(plus.value).real == pytest.approx(2.0)


def test_kernel_projector(unit_mass: KernelParams) -> None:
    """(I - A/s)/2 is an orthogonal projector onto ker F(Lambda)."""
    for xi in FREQUENCIES:
        projector = kernel_projector(xi, unit_mass)
        value = projector.value
        assert projector.hermiticity_defect <= 1e-15
        np.testing.assert_allclose(value @ value, value, atol=1e-14)
        np.testing.assert_allclose(
            lambda_symbol(xi, unit_mass).value @ value, np.zeros((4, 4)), atol=1e-14
        )


def test_energy_identity(rng) -> None:
    """<|S|^-1 h, h> = 2 ||phi||^2 for random kernel vectors."""
    for m in (0.5, 1.0, 3.0):
        p = KernelParams(m=m)
        for xi in FREQUENCIES:
            for _ in range(20):
                balance = energy_identity_check(xi, p, _random_spinor(rng))
                assert balance.left > 0
                assert balance.defect <= 1e-8


def test_energy_identity_scales_quadratically(rng, unit_mass: KernelParams) -> None:
    """Doubling h multiplies both sides by four."""
    h = _random_spinor(rng)
    single = energy_identity_check((0.5, 0.25), unit_mass, h)
    double = energy_identity_check((0.5, 0.25), unit_mass, 2 * h)
    assert double.left == pytest.approx(4 * single.left, rel=1e-12)
    assert double.right == pytest.approx(4 * single.right, rel=1e-8)


def test_energy_identity_needs_kernel_component(rng, unit_mass: KernelParams) -> None:
    """A vector in the range of (I + A/s)/2 has nothing to integrate."""
    xi = (0.7, -0.2)
    outside = (identity() - kernel_projector(xi, unit_mass).value) @ _random_spinor(rng)
    with pytest.raises(ValueError, match="kernel"):
        energy_identity_check(xi, unit_mass, outside)
    with pytest.raises(ValueError):
        energy_identity_check(xi, unit_mass, np.ones(3))


def test_plane_wave_defect_shrinks_with_patch(unit_mass: KernelParams) -> None:
    """Larger, finer patches approach the symbol."""
    xi = (0.25, 0.0)
    defects = [
        plane_wave_defect(half_width, n, xi, unit_mass)
        for half_width, n in [(1.0, 4), (2.0, 16), (4.0, 64)]
    ]
    assert all(np.isfinite(defects))
    assert defects[-1] < defects[0]
