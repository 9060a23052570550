"""Standalone figure generation over scusim CSV/JSON experiment logs."""

__version__ = "0.1.0"

from .figures import FigureSpec, plot_mqc, plot_sweep  # noqa: F401
