"""Panel assembly: one panel per input table, nothing computed but scales.

Every y value drawn comes verbatim from a CSV cell.  Diverged sweep rows
have no finite susceptibility, so curves terminate on either side of them
and the divergence temperature is marked with a dashed vertical line.
"""

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt

from .spec import HEADERS, RenderError
from .tables import load_table

# fixed fonts, salt and raster density: two renders of the same inputs
# must agree byte for byte
_RC = {
    "svg.hashsalt": "soifig",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "figure.dpi": 100,
    "savefig.dpi": 100,
}

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_PANEL_SIZE = (3.6, 2.7)


def _color(index):
    return _PALETTE[index % len(_PALETTE)]


def _stem(path):
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    return name.rsplit(".", 1)[0] if "." in name else name


def _ordered_unique(items):
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


def _sweep_panel(ax, table, spec):
    channels = list(spec.channels) if spec.channels else _ordered_unique(
        row["channel"] for row in table.rows
    )
    deltas = list(spec.deltas) if spec.deltas else _ordered_unique(
        row["delta"] for row in table.rows
    )
    selected = [
        row for row in table.rows
        if row["channel"] in channels and row["delta"] in deltas
    ]
    if not selected:
        raise RenderError(f"{table.path}: selection is empty")
    points = []
    curve = 0
    for delta in sorted(deltas):
        for channel in channels:
            group = sorted(
                (row for row in selected
                 if row["delta"] == delta and row["channel"] == channel),
                key=lambda row: row["temperature"],
            )
            if not group:
                continue
            color = _color(curve)
            curve += 1
            label = channel if len(deltas) == 1 else f"{channel}, d={delta:g}"
            segment_x, segment_y = [], []

            def flush():
                nonlocal label
                if segment_x:
                    ax.plot(segment_x, segment_y, color=color, marker="o",
                            markersize=2.5, linewidth=1.0, label=label)
                    label = None    # legend lists each curve once
                segment_x.clear()
                segment_y.clear()

            for row in group:
                if row["diverged"]:
                    # no finite value here; terminate the curve and mark
                    # the divergence temperature instead
                    flush()
                    ax.axvline(row["temperature"], color=color,
                               linestyle="--", linewidth=0.8)
                else:
                    segment_x.append(row["temperature"])
                    segment_y.append(row["chi"])
                    points.append((row["temperature"], row["chi"]))
            flush()
    if spec.log_t:
        ax.set_xscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("chi")
    ax.legend(loc="best")
    return points


def _soi_panel(ax, table, spec):
    if not table.rows:
        raise RenderError(f"{table.path}: selection is empty")
    series = spec.series or ("lambda_so",)
    points = []
    for index, column in enumerate(series):
        xs = [row["k"] for row in table.rows]
        ys = [row[column] for row in table.rows]
        ax.plot(xs, ys, color=_color(index), marker="o", markersize=2.5,
                linewidth=1.0, label=column)
        points.extend(zip(xs, ys))
    ax.set_xlabel("k")
    ax.set_ylabel("energy")
    ax.legend(loc="best")
    return points


def _coulomb_panel(ax, table, spec):
    series = spec.series or ("u", "j", "jp")
    points = []
    for index, column in enumerate(series):
        rows = [row for row in table.rows if row[column] is not None]
        if not rows:
            raise RenderError(
                f"{table.path}: column {column} has no values"
            )
        xs = [row["zeta"] for row in rows]
        ys = [row[column] for row in rows]
        if spec.errorbars:
            errs = [row[f"{column}_err"] for row in rows]
            if any(err is None for err in errs):
                raise RenderError(
                    f"{table.path}: column {column}_err has gaps"
                )
            ax.errorbar(xs, ys, yerr=errs, color=_color(index), marker="o",
                        markersize=2.5, linewidth=1.0, capsize=2.0,
                        label=column)
        else:
            ax.plot(xs, ys, color=_color(index), marker="o", markersize=2.5,
                    linewidth=1.0, label=column)
        points.extend(zip(xs, ys))
    ax.set_xlabel("zeta")
    ax.set_ylabel("coupling")
    ax.legend(loc="best")
    return points


_PANELS = {
    "sweep": _sweep_panel,
    "soi": _soi_panel,
    "coulomb": _coulomb_panel,
}


def build_figure(spec):
    """Figure plus the (x, y) pairs actually drawn as data points."""
    tables = [load_table(path, spec.kind) for path in spec.csv]
    panel = _PANELS[spec.kind]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(
            spec.rows, spec.cols, squeeze=False,
            figsize=(_PANEL_SIZE[0] * spec.cols, _PANEL_SIZE[1] * spec.rows),
        )
        try:
            points = []
            for index, table in enumerate(tables):
                ax = axes[index // spec.cols][index % spec.cols]
                points.extend(panel(ax, table, spec))
                title = (spec.titles[index] if spec.titles
                         else _stem(table.path))
                ax.set_title(title)
            for index in range(len(tables), spec.rows * spec.cols):
                axes[index // spec.cols][index % spec.cols].set_axis_off()
            fig.tight_layout()
        except Exception:
            plt.close(fig)
            raise
    return fig, points


def render(spec):
    """Validate, build and write the figure; returns the drawn points.

    All input and selection errors surface before the output path is
    touched, so a failed render leaves no file behind.
    """
    fig, points = build_figure(spec)
    metadata = {"Date": None} if spec.fmt == "svg" else None
    try:
        with plt.rc_context(_RC):
            fig.savefig(spec.out, format=spec.fmt, metadata=metadata)
    finally:
        plt.close(fig)
    return points
