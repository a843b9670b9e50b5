"""Flat key = value run configuration and its provenance digest.

A config file holds one assignment per line; '#' starts a comment.  A
JSON run summary written by the CLI can be re-fed as a config: its
embedded "config" object is extracted, which is what makes runs
reproducible from their own summaries.
"""

from __future__ import annotations

import hashlib
import json

from .errors import DomainError


def parse_config_text(text):
    """Mapping from `key = value` lines; blank lines and comments skipped."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise DomainError(
                f"config line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        value = value.strip()
        if not key:
            raise DomainError(f"config line {lineno}: empty key")
        if key in values:
            raise DomainError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def canonical_value(value):
    """Locale-independent string form used in config echoes and digests."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(canonical_value(item) for item in value)
    return str(value)


def load_config(path):
    """Read a config mapping from flat text or from a JSON run summary."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict) and isinstance(data.get("config"), dict):
            data = data["config"]
        if not isinstance(data, dict):
            raise DomainError(f"{path}: JSON config must be an object")
        return {str(key): canonical_value(value) for key, value in data.items()}
    return parse_config_text(text)


def config_digest(values):
    """sha256 over the sorted canonical `key = value` rendering."""
    lines = "".join(f"{key} = {values[key]}\n" for key in sorted(values))
    return hashlib.sha256(lines.encode("utf-8")).hexdigest()


def coerce_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"config key {key!r}: not a number: {text!r}") from None


def coerce_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise DomainError(f"config key {key!r}: not an integer: {text!r}") from None


def coerce_bool(key, text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise DomainError(f"config key {key!r}: not a boolean: {text!r}")


def coerce_str(key, text):
    return text


def coerce_float_list(key, text):
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    if not items:
        raise DomainError(f"config key {key!r}: empty list")
    return [coerce_float(key, item) for item in items]


def coerce_str_list(key, text):
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    if not items:
        raise DomainError(f"config key {key!r}: empty list")
    return items
