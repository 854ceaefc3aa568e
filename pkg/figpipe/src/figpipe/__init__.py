"""Figure pipeline for vortex-filament sweep outputs.

Reads the results CSV and run manifest written by a sweep, cross-checks
the analytic columns against the recorded physics parameters, and renders
publication-style comparison figures. This package never imports the
simulation code; the CSV, JSONL, and manifest files are its only inputs.
"""

__version__ = "0.1.0"

from .data import (
    DataError,
    cross_check_formula_columns,
    locate_manifest,
    read_manifest_physics,
    read_results,
    read_snapshot,
)
from .formulas import beta_turning_point, r_squared_2d, r_squared_3d
from .render import FigureSpec, SpecError, build_figure, render

__all__ = [
    "DataError",
    "FigureSpec",
    "SpecError",
    "beta_turning_point",
    "build_figure",
    "cross_check_formula_columns",
    "locate_manifest",
    "r_squared_2d",
    "r_squared_3d",
    "read_manifest_physics",
    "read_results",
    "read_snapshot",
    "render",
]
