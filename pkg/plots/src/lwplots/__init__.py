"""Figure generation over lwshrink loss tables (CSV in, PNG + SVG out)."""

__version__ = "0.1.0"

from .figures import (
    Curve,
    CurveData,
    FigureSpec,
    MaskedCell,
    SurfaceData,
    convergence_data,
    plot_convergence,
    plot_surface_diff,
    render,
    surface_diff_data,
)
from .records import LossRow, LossTable, TableError, read_loss_table

__all__ = [
    "Curve",
    "CurveData",
    "FigureSpec",
    "LossRow",
    "LossTable",
    "MaskedCell",
    "SurfaceData",
    "TableError",
    "convergence_data",
    "plot_convergence",
    "plot_surface_diff",
    "read_loss_table",
    "render",
    "surface_diff_data",
]
