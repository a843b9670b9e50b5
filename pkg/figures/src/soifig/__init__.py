"""Deterministic figure rendering for the chain simulator's CSV output."""

__version__ = "0.1.0"

from .render import build_figure, render
from .spec import (
    FigureSpec,
    RenderError,
    load_spec,
    parse_spec_text,
    spec_from_mapping,
)
from .tables import Table, load_table
