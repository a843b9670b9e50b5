"""Provenance-stamped output files, written atomically.

Every file starts from (or embeds) the digest of the effective config
that produced it, so artifacts can always be traced back to a run.
CSV cells carry 17 significant digits, enough to round-trip doubles.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from . import __version__


def format_value(value):
    """One CSV cell; None becomes the empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def atomic_write_text(path, text):
    """Write via a sibling temp file + rename; readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(header, rows, digest):
    lines = [f"# config_digest: {digest}", ",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, digest):
    atomic_write_text(path, render_csv(header, rows, digest))


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def run_summary(config, digest, status, artifacts, started, elapsed_s, result=None):
    """The JSON sidecar; its "config" block can be re-fed as --config."""
    summary = {
        "config": dict(sorted(config.items())),
        "config_digest": digest,
        "version": __version__,
        "started": started,
        "elapsed_s": elapsed_s,
        "status": status,
        "artifacts": list(artifacts),
    }
    if result is not None:
        summary["result"] = result
    return summary


def write_summary(path, summary):
    text = json.dumps(summary, indent=2, sort_keys=True, default=_json_default)
    atomic_write_text(path, text + "\n")
