"""Readers for the simulator's delimited artifacts.

Every artifact starts with its config digest comment and an exact header
line; anything else is a schema mismatch, not something to guess around.
"""

import csv
from dataclasses import dataclass

from .spec import HEADERS, RenderError

_DIGEST_PREFIX = "# config_digest: "

# per-column parsers; None marks a string column, "bool" the true/false pair
_FLOAT_REQUIRED = "float"
_FLOAT_OPTIONAL = "float?"

_SCHEMAS = {
    "sweep": (_FLOAT_REQUIRED, _FLOAT_REQUIRED, None, _FLOAT_OPTIONAL,
              "bool", _FLOAT_OPTIONAL),
    "soi": (_FLOAT_REQUIRED,) * 8,
    "coulomb": (_FLOAT_REQUIRED,) + (_FLOAT_OPTIONAL,) * 6,
}


@dataclass(frozen=True)
class Table:
    path: str
    kind: str
    digest: str
    rows: tuple    # dicts keyed by column name


def _parse_cell(text, style, path, lineno, column):
    if style is None:
        return text
    if style == "bool":
        if text == "true":
            return True
        if text == "false":
            return False
        raise RenderError(
            f"{path} line {lineno}: column {column} must be true or false, "
            f"got {text!r}"
        )
    if text == "":
        if style == _FLOAT_OPTIONAL:
            return None
        raise RenderError(
            f"{path} line {lineno}: column {column} must not be empty"
        )
    try:
        return float(text)
    except ValueError:
        raise RenderError(
            f"{path} line {lineno}: column {column} is not a number: {text!r}"
        ) from None


def load_table(path, kind):
    header = HEADERS[kind]
    styles = _SCHEMAS[kind]
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from None
    with handle:
        first = handle.readline()
        if not first.startswith(_DIGEST_PREFIX):
            raise RenderError(
                f"{path}: missing config digest line; "
                "inputs must come from the simulator CLI"
            )
        digest = first[len(_DIGEST_PREFIX):].strip()
        reader = csv.reader(handle)
        got = next(reader, None)
        if got is None or tuple(got) != header:
            raise RenderError(
                f"{path}: header {got} does not match the {kind} layout "
                f"{list(header)}"
            )
        rows = []
        for lineno, record in enumerate(reader, start=3):
            if len(record) != len(header):
                raise RenderError(
                    f"{path} line {lineno}: expected {len(header)} cells, "
                    f"got {len(record)}"
                )
            rows.append({
                column: _parse_cell(cell, style, path, lineno, column)
                for column, style, cell in zip(header, styles, record)
            })
    return Table(path=path, kind=kind, digest=digest, rows=tuple(rows))
