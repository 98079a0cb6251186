"""
Flat key=value configuration files.

Files look like ``.env`` files with dotted section prefixes::

    # Example 1 preset
    sim.n=1000
    sim.censoring.kind=uniform
    rsf.n_trees=200

They are read with python-dotenv (the parser pydantic-settings uses for
``.env``), unflattened into nested dicts for pydantic validation, and
written back by flattening a model dump, so a validated config round-trips.
"""

from pathlib import Path
from typing import Any, Dict, Mapping

from dotenv import dotenv_values

from survforest.core.errors import ConfigError


def read_flat(path: str | Path) -> Dict[str, str]:
    """
    Read a flat key=value file.

    Empty values are dropped so that model defaults apply.

    Raises:
        ConfigError: file missing
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("Config file not found", detail=str(path))
    values = dotenv_values(path, interpolate=False)
    return {k: v for k, v in values.items() if v not in (None, "")}


def unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """Turn ``{"a.b": 1}`` into ``{"a": {"b": 1}}``."""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        parts = key.split(".")
        node = nested
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError("Conflicting config keys", detail=key)
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError("Conflicting config keys", detail=key)
        node[parts[-1]] = value
    return nested


def flatten(nested: Mapping[str, Any], prefix: str = "") -> Dict[str, str]:
    """Inverse of :func:`unflatten`; ``None`` values are omitted."""
    flat: Dict[str, str] = {}
    for key, value in nested.items():
        full = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, Mapping):
            flat.update(flatten(value, full))
        elif value is None:
            continue
        elif isinstance(value, bool):
            flat[full] = "true" if value else "false"
        elif isinstance(value, float):
            flat[full] = repr(value)
        elif isinstance(value, (list, tuple)):
            flat[full] = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        else:
            flat[full] = str(value)
    return flat


def section(flat: Mapping[str, str], name: str) -> Dict[str, str]:
    """Keys under ``name.`` with the prefix stripped."""
    prefix = f"{name}."
    return {k[len(prefix):]: v for k, v in flat.items() if k.startswith(prefix)}


def write_flat(flat: Mapping[str, str], path: str | Path, header: str | None = None) -> Path:
    """Write ``flat`` as sorted key=value lines."""
    path = Path(path)
    lines = [f"# {header}"] if header else []
    lines.extend(f"{key}={flat[key]}" for key in sorted(flat))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
