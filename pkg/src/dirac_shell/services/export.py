"""Artifact writers and readers for CLI runs.

- JSON reports: RunReport documents, byte-stable for a fixed configuration
- CSV tables: written with pandas, no index column
- Operator dumps: raw complex128 (binary) or `re im` text rows
- Density files: one panel per row, 8 columns (re/im interleaved)
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd

from dirac_shell.core.boundary_ops import BoundaryOperator, DiscreteDensity
from dirac_shell.core.errors import MeshMismatchError
from dirac_shell.schemas import RunReport

logger = logging.getLogger(__name__)


def _finite(value: Any) -> Any:
    """Replace NaN and infinities by None, recursively."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def report_to_json(report: RunReport) -> str:
    """Serialize with fixed key order and shortest round-trip floats."""
    payload = _finite(report.model_dump(mode="json", by_alias=True))
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def write_report(report: RunReport, output_path: Path | None = None) -> str:
    """Write the report to `output_path`, or return it for stdout when None."""
    text = report_to_json(report)
    if output_path is not None:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(text, encoding="utf-8")
        logger.info("Report written to %s", output_path)
    return text


def write_table(rows: list[dict[str, Any]], columns: list[str], output_path: Path) -> Path:
    """Write rows as CSV with the given column order.

    Args:
        rows: One mapping per row; missing keys become empty cells.
        columns: Column order (see ColumnNames).
        output_path: Target file.
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(rows, columns=columns)
    df.to_csv(output_path, index=False, float_format="%.17g")
    logger.info("Table with %d rows written to %s", len(df), output_path)
    return output_path


def read_table(path: Path) -> pd.DataFrame:
    """Read a table written by `write_table` without losing float digits."""
    return pd.read_csv(path, float_precision="round_trip")


def dump_operator(
    op: BoundaryOperator, output_path: Path, fmt: Literal["binary", "text"] = "binary"
) -> Path:
    """Dump the dense (4N)x(4N) matrix row-major.

    binary: little-endian complex128, i.e. (re, im) float64 pairs, no header.
    text: one matrix row per line, `re im` pairs separated by single spaces.
    """
    output_path.parent.mkdir(parents=True, exist_ok=True)
    matrix = np.ascontiguousarray(op.dense(), dtype="<c16")
    if fmt == "binary":
        matrix.tofile(output_path)
    else:
        with open(output_path, "w", encoding="utf-8") as f:
            for row in matrix:
                f.write(" ".join(f"{z.real!r} {z.imag!r}" for z in row.tolist()) + "\n")
    logger.info("Operator %s dumped to %s (%s)", matrix.shape, output_path, fmt)
    return output_path


def load_operator_dump(path: Path, fmt: Literal["binary", "text"] = "binary") -> np.ndarray:
    """Read a dump written by `dump_operator` back into a square matrix."""
    if fmt == "binary":
        flat = np.fromfile(path, dtype="<c16")
    else:
        pairs = np.loadtxt(path, dtype=np.float64, ndmin=2)
        flat = (pairs[:, 0::2] + 1j * pairs[:, 1::2]).reshape(-1)
    n = math.isqrt(flat.size)
    if n * n != flat.size:
        raise ValueError(f"{path} does not hold a square matrix ({flat.size} entries)")
    return flat.reshape(n, n)


def read_density(path: Path, mesh_label: str, n_panels: int) -> DiscreteDensity:
    """Read an N x 8 CSV (re, im of the four spinor components per panel).

    Raises:
        ValueError: If the file does not have 8 numeric columns.
        MeshMismatchError: If the row count differs from the panel count.
    """
    df = pd.read_csv(path, header=None, comment="#", float_precision="round_trip")
    if df.shape[1] != 8:
        raise ValueError(f"{path}: expected 8 columns, got {df.shape[1]}")
    values = df.to_numpy(dtype=np.float64)
    if len(values) != n_panels:
        raise MeshMismatchError(
            f"{path}: {len(values)} rows for a mesh with {n_panels} panels"
        )
    return DiscreteDensity(values[:, 0::2] + 1j * values[:, 1::2], mesh_label)


def write_density(density: DiscreteDensity, output_path: Path) -> Path:
    """Inverse of `read_density`."""
    values = np.empty((density.n_panels, 8))
    values[:, 0::2] = density.values.real
    values[:, 1::2] = density.values.imag
    pd.DataFrame(values).to_csv(output_path, header=False, index=False, float_format="%.17g")
    return output_path
