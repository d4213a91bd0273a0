"""Pauli and Dirac matrices and the Clifford operations built on them.

Block conventions (2x2 blocks):

    alpha_j = [[0, sigma_j], [sigma_j, 0]]
    beta    = [[I2, 0], [0, -I2]]
    tau     = [[0, I2], [I2, 0]]

Every function returns a fresh array, so callers may mutate results freely.
Functions taking vectors accept stacks of shape (..., 3) and return stacks
of shape (..., 4, 4).
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

SpinorMatrix = npt.NDArray[np.complex128]
Spinor = npt.NDArray[np.complex128]

_I2 = np.eye(2, dtype=np.complex128)
_Z2 = np.zeros((2, 2), dtype=np.complex128)

_SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)

_ALPHA = np.array([np.block([[_Z2, s], [s, _Z2]]) for s in _SIGMA])
_BETA = np.block([[_I2, _Z2], [_Z2, -_I2]])
_TAU = np.block([[_Z2, _I2], [_I2, _Z2]])


def identity() -> SpinorMatrix:
    return np.eye(4, dtype=np.complex128)


def pauli(j: int) -> npt.NDArray[np.complex128]:
    """Return the 2x2 Pauli matrix sigma_j, j in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {j}")
    return _SIGMA[j - 1].copy()


def alpha(j: int) -> SpinorMatrix:
    """Return the Dirac matrix alpha_j, j in {1, 2, 3}.

    Raises:
        ValueError: If j is out of range.
    """
    if j not in (1, 2, 3):
        raise ValueError(f"Dirac index must be 1, 2 or 3, got {j}")
    return _ALPHA[j - 1].copy()


def alphas() -> SpinorMatrix:
    """All three alpha matrices stacked, shape (3, 4, 4)."""
    return _ALPHA.copy()


def beta() -> SpinorMatrix:
    return _BETA.copy()


def swap_tau() -> SpinorMatrix:
    """Block swap matrix tau; tau^2 = I and tau anticommutes with beta."""
    return _TAU.copy()


def alpha_dot(v: npt.ArrayLike) -> SpinorMatrix:
    """Return v1 alpha_1 + v2 alpha_2 + v3 alpha_3 for real or complex v.

    Args:
        v: Vector of shape (3,) or a stack of shape (..., 3).

    Returns:
        Matrix of shape (4, 4), or (..., 4, 4) for stacked input.
    """
    vec = np.asarray(v)
    if vec.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {vec.shape}")
    return np.tensordot(vec, _ALPHA, axes=([-1], [0]))


def anticommutator(a: SpinorMatrix, b: SpinorMatrix) -> SpinorMatrix:
    return a @ b + b @ a


def clifford_residual() -> float:
    """Largest entry of {alpha_j, alpha_k} - 2 delta_jk I, {alpha_j, beta} and beta^2 - I.

    Exactly 0 for the integer-valued matrices built here.
    """
    eye = identity()
    worst = float(np.max(np.abs(_BETA @ _BETA - eye)))
    for j in range(3):
        worst = max(worst, float(np.max(np.abs(anticommutator(_ALPHA[j], _BETA)))))
        for k in range(3):
            target = 2.0 * eye if j == k else np.zeros_like(eye)
            defect = anticommutator(_ALPHA[j], _ALPHA[k]) - target
            worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def hermiticity_defect(a: SpinorMatrix) -> float:
    """Largest entry of a - a^dagger."""
    return float(np.max(np.abs(a - a.conj().T)))
