"""Fundamental solution of the free Dirac operator and its kernel split.

    phi(x) = exp(-m|x|) / (4 pi |x|) * (m beta + (1 + m|x|) i alpha.x / |x|^2)

solves (-i alpha.grad + m beta) phi = delta_0 I4.  The Fourier convention is
F(f)(xi) = int f(x) exp(-2 pi i x.xi) dx, under which the symbol of phi is
(2 pi alpha.xi + m beta) / (4 pi^2 |xi|^2 + m^2).

All kernels accept a single offset of shape (3,) or a stack (..., 3).
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from dirac_shell.core.dirac_algebra import SpinorMatrix, alpha_dot, beta, identity
from dirac_shell.schemas import KernelParams

_FOUR_PI = 4.0 * np.pi


def _radius(x: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {vec.shape}")
    r = np.linalg.norm(vec, axis=-1)
    if np.any(r == 0.0):
        raise ValueError("kernel is singular at zero offset")
    return vec, r


def phi(x: npt.ArrayLike, p: KernelParams) -> SpinorMatrix:
    """Evaluate the fundamental solution at nonzero offsets.

    Args:
        x: Offset x - y, shape (3,) or (..., 3).
        p: Kernel parameters.

    Returns:
        Kernel values of shape (4, 4) or (..., 4, 4).

    Raises:
        ValueError: If any offset is zero.
    """
    vec, r = _radius(x)
    m = p.m
    prefactor = np.exp(-m * r) / (_FOUR_PI * r)
    radial = (1.0 + m * r) / r**2
    value = m * beta() + 1j * radial[..., None, None] * alpha_dot(vec)
    return prefactor[..., None, None] * value


def dirac_symbol(xi: npt.ArrayLike, p: KernelParams) -> SpinorMatrix:
    """Symbol 2 pi alpha.xi + m beta of H; inverse of `phi_symbol`."""
    vec = np.asarray(xi, dtype=np.float64)
    return 2.0 * np.pi * alpha_dot(vec) + p.m * beta()


def phi_symbol(xi: npt.ArrayLike, p: KernelParams) -> SpinorMatrix:
    """Fourier symbol of phi, (2 pi alpha.xi + m beta) / (4 pi^2 |xi|^2 + m^2)."""
    vec = np.asarray(xi, dtype=np.float64)
    denominator = 4.0 * np.pi**2 * np.sum(vec**2, axis=-1) + p.m**2
    return dirac_symbol(vec, p) / np.asarray(denominator)[..., None, None]


def kernel_split(
    x: npt.ArrayLike, p: KernelParams
) -> tuple[SpinorMatrix, SpinorMatrix, SpinorMatrix]:
    """Split phi into (omega_1, omega_2, omega_3) for singular quadrature.

    omega_1 carries the mass term and is O(1/|x|), omega_2 collects the
    difference exp(-m|x|) - 1 of the Coulomb-like part and is also O(1/|x|),
    omega_3 = i alpha.x / (4 pi |x|^3) is the odd, strongly singular part.
    The three sum to phi(x).
    """
    vec, r = _radius(x)
    m = p.m
    direction = vec / r[..., None]
    i_alpha_hat = 1j * alpha_dot(direction)

    decay = np.exp(-m * r)
    omega_1 = (m * decay / (_FOUR_PI * r))[..., None, None] * (beta() + i_alpha_hat)
    # expm1 keeps (exp(-mr) - 1) accurate as r -> 0
    omega_2 = (np.expm1(-m * r) / (_FOUR_PI * r**2))[..., None, None] * i_alpha_hat
    omega_3 = (1.0 / (_FOUR_PI * r**2))[..., None, None] * i_alpha_hat
    return omega_1, omega_2, omega_3


def anticommutator_kernel(
    offset: npt.ArrayLike,
    normal_target: npt.ArrayLike,
    normal_source: npt.ArrayLike,
    p: KernelParams,
) -> SpinorMatrix:
    """Kernel of {alpha.N, C} between a target point x and a source point z.

        K(x, z) = phi(x - z) alpha.(N(z) - N(x))
                  + i exp(-m r) (1 + m r) / (2 pi r^3) (N(x).(x - z)) I4

    Args:
        offset: x - z, shape (..., 3).
        normal_target: N(x), broadcastable to offset.
        normal_source: N(z), broadcastable to offset.
        p: Kernel parameters.
    """
    vec, r = _radius(offset)
    n_x = np.asarray(normal_target, dtype=np.float64)
    n_z = np.asarray(normal_source, dtype=np.float64)
    first = phi(vec, p) @ alpha_dot(np.broadcast_to(n_z - n_x, vec.shape))
    scale = np.exp(-p.m * r) * (1.0 + p.m * r) / (2.0 * np.pi * r**3)
    projection = np.sum(np.broadcast_to(n_x, vec.shape) * vec, axis=-1)
    second = (1j * scale * projection)[..., None, None] * identity()
    return first + second
