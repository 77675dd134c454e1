"""Deterministic figure rendering of harness CSV exports.

This package never recomputes physics: it maps exported CSV columns to
axes.  The CSV schema (comment block ``# key: value``, one header row,
``%.17g`` numeric fields) is the only coupling to the producer.
"""

__version__ = "0.1.0"

from .errors import FigsError, MissingColumn
from .figures import FIGURE_IDS, FigureSpec, build_figure, render
from .reader import CsvTable, read_csv

__all__ = [
    "FigsError", "MissingColumn",
    "FIGURE_IDS", "FigureSpec", "build_figure", "render",
    "CsvTable", "read_csv",
    "__version__",
]
