"""Batch figure generation for noise-variance-learning experiment tables."""

__version__ = "0.1.0"

from .figures import plot_trajectories
from .tables import ResultTable, SchemaError, load_table

__all__ = ["__version__", "ResultTable", "SchemaError", "load_table", "plot_trajectories"]
