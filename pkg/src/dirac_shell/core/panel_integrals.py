"""Closed-form integrals of 1/|x - y| and its gradient over flat triangles.

For a triangle T with unit normal n and an observation point x,

    int_T 1/|x - y| dA(y)              single-layer potential of T
    int_T (x - y)/|x - y|^3 dA(y)  =  sum_e m_e int_e dl(y)/|x - y|  +  n Omega(x)

where m_e is the outward in-plane normal of edge e and Omega(x) the solid
angle T subtends at x, signed positive on the side n points to.  The second
identity is the divergence theorem in the plane of T; for x inside T it is
the principal value, whose in-plane part is the edge sum and whose normal
part vanishes.

Vertices are ordered counter-clockwise about n: edges run v0 -> v1 -> v2 -> v0.
All functions broadcast over leading axes: points (..., 3), corners
(..., 3, 3), normals (..., 3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache

import numpy as np
import numpy.typing as npt
from scipy.special import roots_legendre

FloatArray = npt.NDArray[np.float64]

# Perpendicular distances below this fraction of the edge length lie on the edge line.
_ON_LINE = 1e-12


def _dot(a: FloatArray, b: FloatArray) -> FloatArray:
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class EdgeFrames:
    """Start points, unit tangents, lengths and outward normals of the three edges."""

    starts: FloatArray  # (..., 3, 3)
    tangents: FloatArray  # (..., 3, 3)
    lengths: FloatArray  # (..., 3)
    outward: FloatArray  # (..., 3, 3)


def edge_frames(corners: FloatArray, normals: FloatArray) -> EdgeFrames:
    vectors = np.roll(corners, -1, axis=-2) - corners
    lengths = np.linalg.norm(vectors, axis=-1)
    tangents = vectors / lengths[..., None]
    outward = np.cross(tangents, normals[..., None, :])
    return EdgeFrames(corners, tangents, lengths, outward)


@dataclass(frozen=True)
class _EdgeTerms:
    inward: FloatArray  # (start - x) . outward normal
    s_minus: FloatArray
    s_plus: FloatArray
    r_minus: FloatArray
    r_plus: FloatArray
    log_term: FloatArray  # int_e dl / |x - y|


def _edge_terms(points: FloatArray, frames: EdgeFrames) -> _EdgeTerms:
    """Per-edge quantities of points (..., 3) against frames (..., 3 edges).

    The line integral uses whichever of the two equivalent logarithms avoids
    cancellation; it is inf for points on the edge itself.
    """
    offset = frames.starts - points[..., None, :]
    s_minus = _dot(offset, frames.tangents)
    s_plus = s_minus + frames.lengths
    r_minus = np.linalg.norm(offset, axis=-1)
    r_plus = np.linalg.norm(offset + frames.lengths[..., None] * frames.tangents, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ahead = np.log((r_plus + s_plus) / (r_minus + s_minus))
        behind = np.log((r_minus - s_minus) / (r_plus - s_plus))
    log_term = np.where(s_plus + s_minus >= 0.0, ahead, behind)
    return _EdgeTerms(_dot(offset, frames.outward), s_minus, s_plus, r_minus, r_plus, log_term)


def triangle_potential(
    points: FloatArray, corners: FloatArray, normals: FloatArray
) -> FloatArray:
    """int_T dA(y) / |x - y|, finite everywhere including on T."""
    frames = edge_frames(corners, normals)
    terms = _edge_terms(points, frames)
    depth = np.abs(_dot(points - corners[..., 0, :], normals))[..., None]
    r0_squared = terms.inward**2 + depth**2
    on_line = np.sqrt(r0_squared) <= _ON_LINE * frames.lengths
    with np.errstate(divide="ignore", invalid="ignore"):
        turning = np.arctan(
            terms.inward * terms.s_plus / (r0_squared + depth * terms.r_plus)
        ) - np.arctan(terms.inward * terms.s_minus / (r0_squared + depth * terms.r_minus))
        per_edge = terms.inward * terms.log_term - depth * turning
    return np.sum(np.where(on_line, 0.0, per_edge), axis=-1)


def solid_angle(points: FloatArray, corners: FloatArray) -> FloatArray:
    """int_T (x - y).n / |x - y|^3 dA(y): signed solid angle of T seen from x.

    Tends to +-2 pi just above and below the interior of T and vanishes for
    points in the plane of T outside it.
    """
    a = corners[..., 0, :] - points
    b = corners[..., 1, :] - points
    c = corners[..., 2, :] - points
    na, nb, nc = (np.linalg.norm(v, axis=-1) for v in (a, b, c))
    triple = _dot(a, np.cross(b, c))
    denominator = na * nb * nc + _dot(a, b) * nc + _dot(a, c) * nb + _dot(b, c) * na
    return -2.0 * np.arctan2(triple, denominator)


def triangle_field(points: FloatArray, corners: FloatArray, normals: FloatArray) -> FloatArray:
    """int_T (x - y) / |x - y|^3 dA(y); principal value inside T, divergent on its edges."""
    frames = edge_frames(corners, normals)
    edge = _edge_terms(points, frames).log_term
    in_plane = np.sum(edge[..., None] * frames.outward, axis=-2)
    return in_plane + solid_angle(points, corners)[..., None] * normals


@cache
def gauss_legendre_unit(order: int) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    nodes, weights = roots_legendre(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights
