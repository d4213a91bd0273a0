"""Domain errors raised by the numerical core.

All of them are ValueErrors so that callers treating bad input generically
keep working; the CLI maps each class to its own exit code.
"""


class MeshFormatError(ValueError):
    """An OFF file could not be parsed or describes an unusable surface."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"{message} at line {line}" if line is not None else message)


class MeshSpecError(ValueError):
    """A `--mesh` specification names no generator and no readable file."""


class MeshMismatchError(ValueError):
    """Operators or densities built on different meshes were combined."""


class GuardViolation(ValueError):
    """A size, conditioning or smallness guard rejected the request."""


class EvaluationPointError(ValueError):
    """An off-surface evaluation point lies too close to the surface."""
