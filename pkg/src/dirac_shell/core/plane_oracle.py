"""Exact Fourier-symbol analytics for the flat shell R^2 x {0}.

On the plane the Cauchy operator is a Fourier multiplier.  Integrating the
symbol of phi over the normal frequency gives

    F(C)(xi) = A / (2 s),   A = 2 pi (xi_1 alpha_1 + xi_2 alpha_2) + m beta,
                            s = sqrt(4 pi^2 |xi|^2 + m^2),

and A^2 = s^2 I, so every symbol here is a polynomial in A / s.  The upper
half space x_3 > 0 is the + side; its outward normal is -e_3, which matches
`make_flat_patch`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.integrate import quad

from dirac_shell.core.boundary_ops import DiscreteDensity, apply_cauchy_rows
from dirac_shell.core.dirac_algebra import Spinor, SpinorMatrix, alpha, alpha_dot, beta, identity
from dirac_shell.core.surface_mesh import make_flat_patch
from dirac_shell.schemas import KernelParams
from dirac_shell.schemas.defaults import DECAY_LENGTHS

# h is treated as having no kernel component below this fraction of |h|.
_KERNEL_FLOOR = 1e-12


@dataclass(frozen=True)
class SymbolMatrix:
    """4x4 symbol of a translation-invariant operator on the plane at one frequency."""

    xi: tuple[float, float]
    value: SpinorMatrix
    m: float

    @property
    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.value - self.value.conj().T)))

    def eigenvalues(self) -> npt.NDArray[np.float64]:
        """Ascending eigenvalues of the Hermitian part."""
        return scipy.linalg.eigvalsh(0.5 * (self.value + self.value.conj().T))

    def apply(self, h: npt.ArrayLike) -> Spinor:
        return self.value @ np.asarray(h, dtype=np.complex128)


class EnergyBalance(NamedTuple):
    """Both sides of <|S|^{-1} h, h> = 2 ||phi||^2 at one frequency."""

    left: float
    right: float

    @property
    def defect(self) -> float:
        return abs(self.left - self.right) / max(abs(self.left), abs(self.right))


def _frequency(xi: npt.ArrayLike) -> tuple[float, float]:
    values = np.asarray(xi, dtype=np.float64).reshape(-1)
    if values.shape != (2,):
        raise ValueError(f"plane frequency must have 2 components, got {values.shape[0]}")
    return float(values[0]), float(values[1])


def _core(xi: tuple[float, float], p: KernelParams) -> tuple[SpinorMatrix, float]:
    """(A, s) at frequency xi."""
    matrix = 2.0 * np.pi * alpha_dot([xi[0], xi[1], 0.0]) + p.m * beta()
    s = math.sqrt(4.0 * np.pi**2 * (xi[0] ** 2 + xi[1] ** 2) + p.m**2)
    return matrix, s


def cauchy_symbol(xi: npt.ArrayLike, p: KernelParams) -> SymbolMatrix:
    """F(C)(xi) = A / (2 s)."""
    point = _frequency(xi)
    matrix, s = _core(point, p)
    return SymbolMatrix(point, matrix / (2.0 * s), p.m)


def lambda_symbol(xi: npt.ArrayLike, p: KernelParams, lam: float = 2.0) -> SymbolMatrix:
    """Symbol of -(1/lam + C).

    At the critical coupling lam = 2 this is -(1/2)(I + A/s), whose
    eigenvalues are 0 and -1, each twice.

    Raises:
        ValueError: If lam is zero.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    point = _frequency(xi)
    matrix, s = _core(point, p)
    return SymbolMatrix(point, -(identity() / lam + matrix / (2.0 * s)), p.m)


def kernel_projector(xi: npt.ArrayLike, p: KernelParams) -> SymbolMatrix:
    """Orthogonal projector (I - A/s)/2 onto the kernel of `lambda_symbol` at lam = 2."""
    point = _frequency(xi)
    matrix, s = _core(point, p)
    return SymbolMatrix(point, 0.5 * (identity() - matrix / s), p.m)


def s_symbol(
    xi: npt.ArrayLike, p: KernelParams
) -> tuple[SymbolMatrix, SymbolMatrix, SymbolMatrix]:
    """Return (S, P_+, P_-) with S = i alpha_3 A.

    S is Hermitian with S^2 = s^2 I; P_+ and P_- are the rank-2 spectral
    projectors onto the eigenvalues +s and -s.
    """
    point = _frequency(xi)
    matrix, _ = _core(point, p)
    s_hat = 1j * alpha(3) @ matrix
    values, vectors = scipy.linalg.eigh(s_hat)
    negative, positive = vectors[:, values < 0], vectors[:, values > 0]
    return (
        SymbolMatrix(point, s_hat, p.m),
        SymbolMatrix(point, positive @ positive.conj().T, p.m),
        SymbolMatrix(point, negative @ negative.conj().T, p.m),
    )


def energy_identity_check(xi: npt.ArrayLike, p: KernelParams, h: npt.ArrayLike) -> EnergyBalance:
    """Compare <|S|^{-1} h, h> with twice the L^2 norm of the field generated by h.

    h is first projected onto the kernel of `lambda_symbol`.  The boundary
    values phi_pm = (+-(i/2) alpha_3 + F(C)) h lie in the ranges of P_pm, and
    the field is phi(x_3) = exp(-x_3 S) phi_+ above the plane and
    exp(-x_3 S) phi_- below it.  The right side integrates |phi(x_3)|^2
    numerically over DECAY_LENGTHS / s on each side.

    Raises:
        ValueError: If h has no component in the kernel.
    """
    vector = np.asarray(h, dtype=np.complex128).reshape(-1)
    if vector.shape != (4,):
        raise ValueError(f"h must have 4 components, got {vector.shape[0]}")
    projected = kernel_projector(xi, p).apply(vector)
    if np.linalg.norm(projected) <= _KERNEL_FLOOR * max(np.linalg.norm(vector), 1.0):
        raise ValueError("h has no component in the kernel of the plane Lambda symbol")

    s_hat, _, _ = s_symbol(xi, p)
    values, vectors = scipy.linalg.eigh(s_hat.value)
    s = float(np.max(np.abs(values)))
    left = float(np.vdot(projected, projected).real) / s

    half_alpha = 0.5j * alpha(3)
    cauchy = cauchy_symbol(xi, p).value
    # rounding leaves ~1e-16 in the growing modes; exp(40) would amplify it
    coefficients = {
        +1: np.where(values > 0, vectors.conj().T @ ((half_alpha + cauchy) @ projected), 0.0),
        -1: np.where(values < 0, vectors.conj().T @ ((-half_alpha + cauchy) @ projected), 0.0),
    }

    def density(x3: float, side: int) -> float:
        modes = np.exp(-side * x3 * values) * coefficients[side]
        return float(np.vdot(modes, modes).real)

    length = DECAY_LENGTHS / s
    total = 0.0
    for side in (+1, -1):
        value, _ = quad(density, 0.0, length, args=(side,), epsabs=1e-15, epsrel=1e-13, limit=200)
        total += value
    return EnergyBalance(left, 2.0 * total)


def plane_wave_defect(
    half_width: float,
    n_per_side: int,
    xi: npt.ArrayLike,
    p: KernelParams,
    h: npt.ArrayLike = (1.0, 0.0, 0.0, 0.0),
) -> float:
    """Distance between the discrete -(1/2 + C) on a flat patch and its symbol.

    The density exp(2 pi i xi.x) h is sampled at the patch centroids and the
    assembled rows are evaluated for the panels of the cells touching the
    origin.  Dividing out the plane-wave phase and averaging over those
    panels cancels the staggering of the two triangle families.

    Returns:
        |mean_i exp(-2 pi i xi.x_i) (-(1/2 + C) g)_i - F(Lambda)(xi) h| / |h|.
    """
    point = _frequency(xi)
    spinor = np.asarray(h, dtype=np.complex128)
    mesh = make_flat_patch(half_width, n_per_side)
    planar = mesh.centroids[:, :2]
    phases = np.exp(2j * np.pi * (planar @ np.asarray(point)))
    density = DiscreteDensity(phases[:, None] * spinor[None, :], mesh.label)

    cell = 2.0 * half_width / n_per_side
    rows = np.flatnonzero(np.max(np.abs(planar), axis=1) < cell)
    applied = apply_cauchy_rows(mesh, p, density, rows)
    discrete = -(0.5 * density.values[rows] + applied) / phases[rows, None]
    expected = lambda_symbol(point, p).apply(spinor)
    return float(np.linalg.norm(discrete.mean(axis=0) - expected) / np.linalg.norm(spinor))
