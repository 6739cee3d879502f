"""Flat dotted-key config text shared by the CLI and experiment echoes.

Format: one ``section.key = value`` per line, ``#`` comments, blank lines
ignored.  Values stay strings at this layer; command schemas coerce them.
"""

from __future__ import annotations


class ConfigError(ValueError):
    pass


def parse_flat_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        # plain-float repr round-trips exactly (and strips numpy scalar wrappers)
        return repr(float(v))
    return str(v)


def format_flat_config(mapping: dict) -> str:
    lines = [f"{k} = {format_value(mapping[k])}" for k in sorted(mapping)]
    return "\n".join(lines) + "\n"


def coerce(value: str, kind: str):
    """Coerce a raw string per schema kind: int, float, bool, str."""
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if value.lower() in ("true", "yes", "1", "on"):
                return True
            if value.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        return value
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
