"""Command-line entry point.

    dirac-shell <command> [--mesh SPEC] [--m M] [--config FILE] [...]

Flags override DIRACSHELL_* environment variables, which override the
`--config` file, which overrides the schema defaults.  See README for the
exit codes.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any

from pydantic import ValidationError

from dirac_shell.schemas import CauchyQuadrature, Command, PotentialKind
from dirac_shell.services import config_manager, runner

logger = logging.getLogger(__name__)

# (flag, field, help); every value is validated by RunConfig.
_VALUE_FLAGS: tuple[tuple[str, str, str], ...] = (
    ("--mesh", "mesh", "sphere:L[,R] | patch:W,N | OFF path; comma list for verify-identity"),
    ("--m", "m", "mass"),
    ("--lambda", "lam", "coupling lambda"),
    ("--lambda-min", "lambda_min", "scan lower end"),
    ("--lambda-max", "lambda_max", "scan upper end"),
    ("--steps", "steps", "scan grid points"),
    ("--r", "r", "identity weight of a cauchy_combo potential"),
    ("--s", "s", "C(alpha.N) weight of a cauchy_combo potential"),
    ("--delta", "delta", "weight of the neumann_small term"),
    ("--c", "c", "trace weight c (complex, e.g. 0.5 or 0.3+0.1j)"),
    ("--xi", "xi", "plane frequency 'a,b'"),
    ("--density", "density", "constant | zero-mode | N x 8 CSV path"),
    ("--out", "out", "JSON report path (default: stdout)"),
    ("--csv", "csv", "CSV table path"),
    ("--dump-operator", "dump_operator", "operator dump path"),
    ("--tol-algebra", "tol_algebra", "verify-algebra tolerance"),
    ("--tol-kernel", "tol_kernel", "verify-kernel tolerance"),
    ("--tol-symbol", "tol_symbol", "oracle-plane symbol tolerance"),
    ("--tol-energy", "tol_energy", "oracle-plane energy-identity tolerance"),
    ("--tol-identity", "tol_identity", "verify-identity residual bound"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac-shell",
        description="Boundary-integral toolkit for Dirac delta-shell interactions",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    for flag, field, text in _VALUE_FLAGS:
        parser.add_argument(flag, dest=field, default=None, help=text)
    parser.add_argument("--construction", choices=["t4", "t3"], default=None)
    parser.add_argument(
        "--potential-kind",
        dest="potential_kind",
        choices=[k.value for k in PotentialKind],
        default=None,
    )
    parser.add_argument(
        "--quadrature", choices=[q.value for q in CauchyQuadrature], default=None
    )
    parser.add_argument("--dump-format", dest="dump_format", choices=["binary", "text"], default=None)
    return parser


def _flag_layer(args: argparse.Namespace) -> dict[str, Any]:
    layer: dict[str, Any] = {"command": args.command}
    fields = [field for _, field, _ in _VALUE_FLAGS] + ["construction", "potential_kind", "quadrature", "dump_format"]
    for field in fields:
        value = getattr(args, field)
        if value is not None:
            layer[field] = config_manager.coerce_value(field, value)
    return layer


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        file_layer = config_manager.load_config(args.config) if args.config else {}
        config = config_manager.merge_layers(
            file_layer, config_manager.env_overrides(), _flag_layer(args)
        )
    except FileNotFoundError as exc:
        logger.error("%s", exc)
        return runner.ExitCode.USAGE
    except (ValidationError, ValueError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return runner.ExitCode.USAGE
    return runner.run(config)


if __name__ == "__main__":
    sys.exit(main())
