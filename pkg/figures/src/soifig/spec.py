"""Figure descriptions: a flat key = value file names inputs and layout.

The grammar is the one the simulator CLI uses for its config files, so a
figure spec reads like any other run input: comments after ``#``, one
``key = value`` per line, comma lists for multiple values.
"""

from dataclasses import dataclass


class RenderError(Exception):
    """Anything that must abort the render before an output file exists."""


SWEEP_HEADER = ("temperature", "delta", "channel", "chi", "diverged", "l_div")
SOI_HEADER = ("k", "lambda_so", "e1", "e2", "e3", "e4", "e5", "e6")
COULOMB_HEADER = ("zeta", "u", "u_err", "j", "j_err", "jp", "jp_err")

HEADERS = {
    "sweep": SWEEP_HEADER,
    "soi": SOI_HEADER,
    "coulomb": COULOMB_HEADER,
}

FORMATS = ("svg", "png")


def parse_spec_text(text):
    """Flat key = value lines into a string map, strict about duplicates."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RenderError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise RenderError(f"line {lineno}: empty key")
        if key in values:
            raise RenderError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def _split_list(value):
    items = [item.strip() for item in value.split(",")]
    return tuple(item for item in items if item)


def _as_bool(key, value):
    if value == "true":
        return True
    if value == "false":
        return False
    raise RenderError(f"{key} must be true or false, not {value!r}")


def _as_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise RenderError(f"{key} must be an integer, not {value!r}") from None


def _as_floats(key, value):
    out = []
    for item in _split_list(value):
        try:
            out.append(float(item))
        except ValueError:
            raise RenderError(
                f"{key} must be a comma list of numbers, not {value!r}"
            ) from None
    return tuple(out)


@dataclass(frozen=True)
class FigureSpec:
    """Everything one render needs: inputs, panel grid, filters, output."""

    kind: str            # emitting subcommand family: sweep | soi | coulomb
    csv: tuple           # input paths, one panel each, row-major placement
    out: str
    fmt: str             # svg (vector) or png (raster)
    rows: int = 1
    cols: int = 1
    channels: tuple = None   # sweep-only row filter
    deltas: tuple = None     # sweep-only row filter
    series: tuple = None     # soi/coulomb column selection
    log_t: bool = True       # sweep-only: log temperature axis
    errorbars: bool = False  # coulomb-only: draw the *_err columns
    titles: tuple = None     # per-panel titles, default the file stems

    def __post_init__(self):
        if self.kind not in HEADERS:
            raise RenderError(
                f"unknown figure kind {self.kind!r}; choose from "
                f"{', '.join(sorted(HEADERS))}"
            )
        if not self.csv:
            raise RenderError("at least one csv input is required")
        if self.fmt not in FORMATS:
            raise RenderError(
                f"unknown format {self.fmt!r}; choose from {', '.join(FORMATS)}"
            )
        if self.rows < 1 or self.cols < 1:
            raise RenderError("rows and cols must be positive")
        if self.rows * self.cols < len(self.csv):
            raise RenderError(
                f"{len(self.csv)} inputs do not fit a "
                f"{self.rows}x{self.cols} layout"
            )
        if self.titles is not None and len(self.titles) != len(self.csv):
            raise RenderError("titles must match the csv list one to one")
        if self.kind != "sweep":
            for key in ("channels", "deltas"):
                if getattr(self, key) is not None:
                    raise RenderError(f"{key} only applies to sweep figures")
        if self.kind == "sweep" and self.series is not None:
            raise RenderError("series does not apply to sweep figures")
        if self.errorbars and self.kind != "coulomb":
            raise RenderError("errorbars only apply to coulomb figures")
        if self.series is not None:
            allowed = HEADERS[self.kind][1:]
            for name in self.series:
                if name not in allowed:
                    raise RenderError(
                        f"unknown series column {name!r} for {self.kind}; "
                        f"choose from {', '.join(allowed)}"
                    )


def _infer_format(out):
    suffix = out.rsplit(".", 1)[-1].lower() if "." in out else ""
    if suffix in FORMATS:
        return suffix
    raise RenderError(
        f"cannot infer an image format from {out!r}; "
        "use a .svg or .png suffix or set format"
    )


def spec_from_mapping(values, out):
    """Build a FigureSpec from parsed key = value text plus the --out path."""
    values = dict(values)

    def take(key):
        return values.pop(key, None)

    kind = take("kind")
    if kind is None:
        raise RenderError("missing required key: kind")
    csv_value = take("csv")
    if csv_value is None:
        raise RenderError("missing required key: csv")
    fields = {
        "kind": kind,
        "csv": _split_list(csv_value),
        "out": out,
        "fmt": take("format") or _infer_format(out),
    }
    simple = {
        "rows": _as_int,
        "cols": _as_int,
        "log_t": _as_bool,
        "errorbars": _as_bool,
    }
    for key, coerce in simple.items():
        value = take(key)
        if value is not None:
            fields[key] = coerce(key, value)
    for key in ("channels", "series", "titles"):
        value = take(key)
        if value is not None:
            fields[key] = _split_list(value)
    value = take("deltas")
    if value is not None:
        fields["deltas"] = _as_floats("deltas", value)
    if values:
        unknown = ", ".join(sorted(values))
        raise RenderError(f"unknown figure spec keys: {unknown}")
    return FigureSpec(**fields)


def load_spec(path, out):
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise RenderError(f"cannot read figure spec {path}: {exc}") from None
    try:
        return spec_from_mapping(parse_spec_text(text), out)
    except RenderError as exc:
        raise RenderError(f"{path}: {exc}") from None
