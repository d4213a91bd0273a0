"""Run Configuration Management Module.

Handles listing, loading and saving of `key = value` run configurations, the
DIRACSHELL_* environment overlay, and the merge of all layers into a strictly
typed RunConfig.

Precedence (lowest first): schema defaults, config file, environment,
command-line flags.
"""

import logging
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any, List

from ..schemas import RunConfig

logger = logging.getLogger(__name__)

CONFIG_DIR = Path.cwd() / "configs"
ENV_PREFIX = "DIRACSHELL_"

# Fields given as comma-separated lists in files and environment variables.
_TUPLE_FIELDS = frozenset({"xi"})


def list_configs() -> List[str]:
    """List all run configuration files in the configs directory.

    Returns:
        Sorted filenames (e.g., ['sphere_spectrum.cfg', 'verify.cfg']).
    """
    if not CONFIG_DIR.exists():
        return []
    return sorted([f.name for f in CONFIG_DIR.glob("*.cfg")])


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse flat `key = value` lines.

    Blank lines and everything after `#` are ignored.  Keys must be RunConfig
    fields.

    Raises:
        ValueError: On a line without `=` or with an unknown key; the message
            names the source and line number.
    """
    values: dict[str, Any] = {}
    known = RunConfig.model_fields
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{number}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"{source}:{number}: unknown key {key!r}")
        values[key] = coerce_value(key, value)
    return values


def coerce_value(key: str, value: str) -> Any:
    """Split list-valued fields; everything else is validated by pydantic."""
    if key in _TUPLE_FIELDS:
        return tuple(part.strip() for part in value.split(","))
    return value


def resolve_config_path(name: str | Path) -> Path:
    """A bare filename is looked up in CONFIG_DIR, anything else is used as given."""
    path = Path(name)
    if path.parent == Path(".") and not path.exists():
        return CONFIG_DIR / path
    return path


def load_config(filename: str | Path) -> dict[str, Any]:
    """Load the layer stored in a config file.

    Args:
        filename: Name in the configs directory or a path.

    Returns:
        Mapping of field name to raw value, validated later by `merge_layers`.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        ValueError: If a line is malformed or names an unknown key.
    """
    file_path = resolve_config_path(filename)
    if not file_path.exists():
        raise FileNotFoundError(f"Config file not found: {file_path}")
    values = parse_config_text(file_path.read_text(encoding="utf-8"), str(file_path))
    logger.debug("Loaded %d keys from %s", len(values), file_path)
    return values


def save_config(config: RunConfig, filename: str) -> Path:
    """Save a run configuration as `key = value` lines.

    Unset optional fields are omitted so that the file loads back to the same
    configuration.
    """
    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    file_path = CONFIG_DIR / filename
    lines = []
    for key, value in config.model_dump(mode="json").items():
        if value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return file_path


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """Collect DIRACSHELL_<FIELD> variables for known RunConfig fields."""
    source = os.environ if environ is None else environ
    values: dict[str, Any] = {}
    for name, field in ((f.upper(), f) for f in RunConfig.model_fields):
        if ENV_PREFIX + name in source:
            values[field] = coerce_value(field, source[ENV_PREFIX + name])
    return values


def merge_layers(*layers: Mapping[str, Any]) -> RunConfig:
    """Merge layers left to right (later wins) and validate.

    Raises:
        pydantic.ValidationError: If the merged values violate the schema.
    """
    merged: dict[str, Any] = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    return RunConfig.model_validate(merged)
