"""Figure regeneration from kinmarket CSV outputs.

The package consumes only the delimited files the simulator emits
(run_<seed>.csv, ensemble.csv, bands.csv, sweep.csv, summary.json) and
renders the standard figure kinds to PNG files.
"""

from .render import FIGURE_KINDS, FigureSpec, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "render"]

__version__ = "0.1.0"
