"""Publication-style figures rendered from the sweep simulator's CSV files."""

__version__ = "0.1.0"

from .csvio import FigureError, Table, read_table
from .render import FigureJob, render, render_figure
