"""Offline figure generation from solver-campaign CSV reports."""

from .figures import (
    FIGURE_KINDS, FigureSpec, load_matrix, load_table, render,
)

__all__ = [
    "FIGURE_KINDS",
    "FigureSpec",
    "load_matrix",
    "load_table",
    "render",
]

__version__ = "0.1.0"
