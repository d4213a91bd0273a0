"""Tests for the fundamental solution and its kernel split."""

import numpy as np
import pytest

from dirac_shell.core.dirac_algebra import alpha_dot, beta, identity
from dirac_shell.core.green_kernel import (
    anticommutator_kernel,
    dirac_symbol,
    kernel_split,
    phi,
    phi_symbol,
)
from dirac_shell.schemas import KernelParams

MASSES = [0.5, 1.0, 2.0]


@pytest.mark.parametrize("m", MASSES)
def test_kernel_symmetry(m: float, rng: np.random.Generator) -> None:
    """phi(x - y) = phi(y - x)^dagger for random offsets."""
    p = KernelParams(m=m)
    x = rng.normal(size=(1000, 3))
    forward = phi(x, p)
    backward = np.conj(np.swapaxes(phi(-x, p), -2, -1))
    scale = np.max(np.abs(forward), axis=(-2, -1))
    assert np.max(np.max(np.abs(forward - backward), axis=(-2, -1)) / scale) <= 1e-13


@pytest.mark.parametrize("m", MASSES)
def test_symbol_inverse(m: float, rng: np.random.Generator) -> None:
    """(2 pi alpha.xi + m beta) F(phi)(xi) = I."""
    p = KernelParams(m=m)
    xi = rng.normal(size=(1000, 3))
    product = dirac_symbol(xi, p) @ phi_symbol(xi, p)
    assert np.max(np.abs(product - identity())) <= 1e-13


def test_symbol_at_zero_frequency() -> None:
    """F(phi)(0) = beta / m."""
    p = KernelParams(m=2.0)
    np.testing.assert_allclose(phi_symbol(np.zeros(3), p), beta() / 2.0, atol=1e-15)


def test_phi_closed_form_on_axis() -> None:
    """At x = (0, 0, 1), m = 1: e^{-1}/(4 pi) (beta + 2 i alpha_3)."""
    value = phi([0.0, 0.0, 1.0], KernelParams(m=1.0))
    expected = np.exp(-1.0) / (4 * np.pi) * (beta() + 2j * alpha_dot([0, 0, 1]))
    np.testing.assert_allclose(value, expected, atol=1e-15)


def test_phi_rejects_zero_offset() -> None:
    """The kernel is singular at the origin."""
    with pytest.raises(ValueError):
        phi(np.zeros(3), KernelParams())


def test_split_sums_to_phi(rng: np.random.Generator) -> None:
    """omega_1 + omega_2 + omega_3 = phi."""
    p = KernelParams(m=1.5)
    x = rng.normal(size=(200, 3))
    total = sum(kernel_split(x, p))
    np.testing.assert_allclose(total, phi(x, p), rtol=1e-12, atol=1e-14)


def test_split_near_origin_bounds() -> None:
    """|x| |omega_1| and |x| |omega_2| stay bounded; |x|^2 |omega_3| is constant."""
    p = KernelParams(m=1.0)
    direction = np.array([0.0, 0.0, 1.0])
    for r in (1e-2, 1e-4, 1e-6, 1e-8):
        omega_1, omega_2, omega_3 = kernel_split(r * direction, p)
        assert r * np.max(np.abs(omega_1)) <= 2.0 / (4 * np.pi)
        assert r * np.max(np.abs(omega_2)) == pytest.approx(1.0 / (4 * np.pi), rel=1e-2)
        assert r**2 * np.max(np.abs(omega_3)) == pytest.approx(1.0 / (4 * np.pi), rel=1e-12)


def test_split_expm1_accuracy_tiny_radius() -> None:
    """omega_2 keeps full relative accuracy where exp(-mr) - 1 cancels."""
    p = KernelParams(m=1.0)
    r = 1e-12
    _, omega_2, _ = kernel_split([r, 0.0, 0.0], p)
    expected = np.expm1(-r) / (4 * np.pi * r**2)
    assert omega_2[0, 3] == pytest.approx(1j * expected, rel=1e-12)


def test_anticommutator_kernel_flat_vanishes(rng: np.random.Generator) -> None:
    """For coplanar points with a common normal the kernel is zero."""
    p = KernelParams(m=1.0)
    normal = np.array([0.0, 0.0, -1.0])
    offsets = np.column_stack([rng.normal(size=(50, 2)), np.zeros(50)])
    values = anticommutator_kernel(offsets, normal, normal, p)
    assert np.max(np.abs(values)) == 0.0


def test_anticommutator_kernel_matches_products(rng: np.random.Generator) -> None:
    """Kernel equals alpha.N(x) phi + phi alpha.N(z) pointwise."""
    p = KernelParams(m=1.0)
    x = rng.normal(size=(20, 3))
    n_x = rng.normal(size=(20, 3))
    n_x /= np.linalg.norm(n_x, axis=1, keepdims=True)
    n_z = rng.normal(size=(20, 3))
    n_z /= np.linalg.norm(n_z, axis=1, keepdims=True)
    kernel = phi(x, p)
    expected = alpha_dot(n_x) @ kernel + kernel @ alpha_dot(n_z)
    np.testing.assert_allclose(anticommutator_kernel(x, n_x, n_z, p), expected, atol=1e-13)
