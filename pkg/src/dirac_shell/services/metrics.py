"""Centralized metric calculations for verification and convergence runs.

Pure functions shared by the runner, the field check and the tests, so that
"deviation" and "decreasing" mean the same thing everywhere.
"""

from typing import Sequence

import numpy as np
import numpy.typing as npt


def relative_deviation(computed: npt.ArrayLike, reference: npt.ArrayLike) -> float:
    """||computed - reference|| / ||reference|| (Frobenius over all entries)."""
    got = np.asarray(computed)
    want = np.asarray(reference)
    if got.shape != want.shape:
        raise ValueError(f"shape mismatch {got.shape} vs {want.shape}")
    scale = float(np.linalg.norm(want))
    if scale == 0.0:
        raise ValueError("reference is zero")
    return float(np.linalg.norm(got - want)) / scale


def reduction_factors(values: Sequence[float]) -> list[float]:
    """Successive ratios v[k] / v[k + 1]; infinite when v[k + 1] is zero."""
    return [
        float("inf") if later == 0 else earlier / later
        for earlier, later in zip(values, values[1:])
    ]


def decreases_by(values: Sequence[float], factor: float = 1.0) -> bool:
    """True if every step shrinks the value by more than `factor` (strictly)."""
    if len(values) < 2:
        return True
    if factor == 1.0:
        return all(later < earlier for earlier, later in zip(values, values[1:]))
    return all(ratio >= factor for ratio in reduction_factors(values))


def sample_indices(total: int, size: int) -> npt.NDArray[np.int64]:
    """`size` evenly spaced indices in [0, total), or all of them."""
    if total <= 0:
        raise ValueError("nothing to sample")
    if size >= total:
        return np.arange(total)
    return np.unique(np.linspace(0, total - 1, size).round().astype(np.int64))
