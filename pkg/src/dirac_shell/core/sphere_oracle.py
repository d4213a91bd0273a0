"""Analytic zero modes of a delta-shell potential on the unit sphere.

For m > 0 the couplings lam with a zero-energy eigenfunction whose radial
part has no angular dependence are the roots of

    m^2 lam^2 + 2((2m^2 + 2m + 1) e^{-2m} - 1) lam - 4 m^2 = 0.

The eigenfunction is built from the radial profile

    f(r) = (lam (1 + m) - 2m) (e^{mr} - e^{-mr}) / (m r)                         r < 1
    f(r) = (lam (e^{2m}(m - 1) + 1 + m) - 2m (e^{2m} - 1)) e^{-mr} / (m r)        r > 1

as phi(x) = (f, 0, -i x_3 f' / (m r), -i (x_1 + i x_2) f' / (m r)), and its
shell density is g = i (alpha.N)(phi_+ - phi_-) with N(x) = x / |x| and
phi_+ the limit from inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from dirac_shell.core.boundary_ops import DiscreteDensity
from dirac_shell.core.dirac_algebra import Spinor, alpha_dot, alphas, beta
from dirac_shell.core.surface_mesh import SurfaceMesh

Side = Literal["inside", "outside"]


def _check_mass(m: float) -> None:
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")


def quadratic_coefficients(m: float) -> tuple[float, float, float]:
    """(a, b, c) of a lam^2 + b lam + c = 0."""
    _check_mass(m)
    b = 2.0 * ((2.0 * m**2 + 2.0 * m + 1.0) * math.exp(-2.0 * m) - 1.0)
    return m**2, b, -4.0 * m**2


def critical_lambda_roots(m: float) -> tuple[float, float]:
    """Both real roots of the coupling quadratic, ascending.

    The product of the roots is -4 for every m, so the discriminant is
    positive and the roots have opposite signs.
    """
    a, b, c = quadratic_coefficients(m)
    q = -0.5 * (b + math.copysign(math.sqrt(b * b - 4.0 * a * c), b))
    first, second = q / a, c / q
    return (first, second) if first < second else (second, first)


def quadratic_residual(lam: float, m: float) -> float:
    """|a lam^2 + b lam + c| / max(|a lam^2|, |b lam|, |c|)."""
    a, b, c = quadratic_coefficients(m)
    terms = (a * lam * lam, b * lam, c)
    return abs(sum(terms)) / max(abs(t) for t in terms)


@dataclass(frozen=True)
class SphereSolution:
    """Radial coefficients of the zero mode for one coupling lam."""

    m: float
    lam: float
    inside_coeff: float
    outside_coeff: float

    @classmethod
    def build(cls, lam: float, m: float) -> SphereSolution:
        _check_mass(m)
        growth = math.exp(2.0 * m)
        inside = lam * (1.0 + m) - 2.0 * m
        outside = lam * (growth * (m - 1.0) + 1.0 + m) - 2.0 * m * (growth - 1.0)
        return cls(m=m, lam=lam, inside_coeff=inside, outside_coeff=outside)

    def f(self, r: npt.ArrayLike, side: Side) -> np.ndarray:
        radius = np.asarray(r, dtype=np.float64)
        m = self.m
        if side == "inside":
            return self.inside_coeff * 2.0 * np.sinh(m * radius) / (m * radius)
        return self.outside_coeff * np.exp(-m * radius) / (m * radius)

    def f_prime(self, r: npt.ArrayLike, side: Side) -> np.ndarray:
        radius = np.asarray(r, dtype=np.float64)
        m = self.m
        if side == "inside":
            return self.inside_coeff * (
                2.0 * np.cosh(m * radius) / radius
                - 2.0 * np.sinh(m * radius) / (m * radius**2)
            )
        return -self.outside_coeff * np.exp(-m * radius) * (1.0 / radius + 1.0 / (m * radius**2))

    def spinor(self, x: npt.ArrayLike, side: Side) -> np.ndarray:
        """phi at points x of shape (..., 3), using the branch of `side`."""
        points = np.asarray(x, dtype=np.float64)
        radius = np.linalg.norm(points, axis=-1)
        f = self.f(radius, side)
        ratio = -1j * self.f_prime(radius, side) / (self.m * radius)
        out = np.zeros(points.shape[:-1] + (4,), dtype=np.complex128)
        out[..., 0] = f
        out[..., 2] = ratio * points[..., 2]
        out[..., 3] = ratio * (points[..., 0] + 1j * points[..., 1])
        return out


def _side_of(r: float) -> Side:
    if r == 1.0:
        raise ValueError("f_lambda jumps at r = 1; use f_lambda_limits")
    return "inside" if r < 1.0 else "outside"


def f_lambda(r: float, lam: float, m: float) -> float:
    """Radial profile at r > 0, r != 1."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return float(SphereSolution.build(lam, m).f(r, _side_of(r)))


def f_lambda_derivative(r: float, lam: float, m: float) -> float:
    """Closed-form radial derivative of the active branch."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return float(SphereSolution.build(lam, m).f_prime(r, _side_of(r)))


def f_lambda_limits(lam: float, m: float) -> tuple[float, float]:
    """(f(1-), f(1+)): both branch formulas evaluated at r = 1."""
    solution = SphereSolution.build(lam, m)
    return float(solution.f(1.0, "inside")), float(solution.f(1.0, "outside"))


def phi_lambda(x: npt.ArrayLike, lam: float, m: float) -> Spinor:
    """Zero-mode spinor at a point with |x| not in {0, 1}."""
    point = np.asarray(x, dtype=np.float64)
    if point.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {point.shape}")
    radius = float(np.linalg.norm(point))
    if radius == 0.0:
        raise ValueError("phi_lambda is evaluated away from the origin")
    return SphereSolution.build(lam, m).spinor(point, _side_of(radius))


def _directions(directions: npt.ArrayLike) -> np.ndarray:
    points = np.asarray(directions, dtype=np.float64)
    norms = np.linalg.norm(points, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero direction")
    return points / norms


def boundary_values(
    directions: npt.ArrayLike, lam: float, m: float, side: Side
) -> np.ndarray:
    """One-sided limits of phi on the unit sphere, shape (..., 4)."""
    return SphereSolution.build(lam, m).spinor(_directions(directions), side)


def shell_density(direction: npt.ArrayLike, lam: float, m: float) -> Spinor:
    """g = i (alpha.N)(phi_+ - phi_-) at the sphere point along `direction`."""
    unit = _directions(direction)
    jump = boundary_values(unit, lam, m, "inside") - boundary_values(unit, lam, m, "outside")
    return 1j * np.einsum("...ab,...b->...a", alpha_dot(unit), jump)


def shell_density_on_mesh(mesh: SurfaceMesh, lam: float, m: float) -> DiscreteDensity:
    """g sampled at the panel centroids, projected radially onto the sphere."""
    return DiscreteDensity(shell_density(mesh.centroids, lam, m), mesh.label)


def dirac_residual(x: npt.ArrayLike, lam: float, m: float, step: float = 1e-4) -> float:
    """max |(-i alpha.grad + m beta) phi| at x by central differences."""
    point = np.asarray(x, dtype=np.float64)
    solution = SphereSolution.build(lam, m)
    side = _side_of(float(np.linalg.norm(point)))
    applied = m * beta() @ solution.spinor(point, side)
    for j, alpha_j in enumerate(alphas()):
        shift = np.zeros(3)
        shift[j] = step
        derivative = (solution.spinor(point + shift, side) - solution.spinor(point - shift, side)) / (
            2.0 * step
        )
        applied += -1j * alpha_j @ derivative
    return float(np.max(np.abs(applied)))
