"""Publication-style figures from rblab CSV and model-file outputs.

This package reads the CSV schemas and model files the main library
emits; it never imports or invokes the library itself.
"""

__version__ = "0.1.0"

from .figures import FigureSpec, plot_distributions, plot_kl_gap

__all__ = ["FigureSpec", "plot_distributions", "plot_kl_gap"]
