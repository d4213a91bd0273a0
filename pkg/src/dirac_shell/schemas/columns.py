"""Strongly typed column names for the CSV tables.

Defines the data contract between the runner and its consumers (plotting
scripts, spreadsheets).
"""


class ColumnNames:
    """Column name constants shared by the exporters and their tests."""

    # s_min(lambda) curve
    LAMBDA = "lambda"
    S_MIN = "s_min"

    # spectrum
    A = "a"

    # refinement study
    LABEL = "label"
    PANELS = "panels"
    H = "h"
    RESIDUAL = "residual"
    FROBENIUS_RESIDUAL = "frobenius_residual"

    # sphere profile
    RADIUS = "r"
    F = "f"
    F_PRIME = "f_prime"

    # field check
    OFFSET = "offset"
    SIDE = "side"
    DEVIATION = "deviation"
