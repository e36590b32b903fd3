"""Render figures and formatted tables from teamsim CSV outputs.

The package consumes the simulator strictly through its published file
formats and command line: a per-scenario summary.csv is collapsed into
grouped statistics by invoking `teamsim report`, and pre-aggregated CSVs
are accepted directly. No statistic is computed here.
"""

from .figures import FigureSpec, render_fig3
from .schema import PRESET_GROUPS, load_aggregate
from .tables import render_tables

__all__ = ["FigureSpec", "PRESET_GROUPS", "load_aggregate", "render_fig3", "render_tables"]

__version__ = "0.1.0"
