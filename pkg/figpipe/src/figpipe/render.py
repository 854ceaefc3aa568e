"""Figure construction and deterministic image export.

Three figure kinds are supported:

    r2-comparison : measured R^2 vs beta with error bars, overlaid with the
                    3D (bending included) and 2D (straight filament) formula
                    curves recomputed from the run manifest
    slope         : mean segment slope (delta/a) vs beta with the
                    discretization threshold slope = 10 marked (a = 0.1*delta)
    projection    : top-down x-y scatter of beads, one trace per filament

Output bytes are a pure function of the input files and the spec: image
timestamps are disabled and the SVG id salt is pinned.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.figure import Figure

from .data import (
    DataError,
    cross_check_formula_columns,
    locate_manifest,
    read_manifest_physics,
    read_results,
    read_snapshot,
)
from .formulas import r_squared_2d, r_squared_3d

FIGURE_KINDS = ("r2-comparison", "slope", "projection")

# Straightness bound a < 0.1*delta expressed in slope units (slope = delta/a).
SLOPE_THRESHOLD = 10.0

_FORMATS = {".png": "png", ".svg": "svg", ".pdf": "pdf"}

# Timestamp metadata is suppressed per format so repeated renders agree.
_METADATA = {
    "png": {"Software": "figpipe"},
    "svg": {"Date": None},
    "pdf": {"CreationDate": None},
}


class SpecError(ValueError):
    """A figure spec is internally inconsistent or names an unknown kind."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw, from which files, to which image.

    log_x and log_y default per kind when left as None: log-log for the
    r2-comparison and slope plots, linear for the projection. Axis ranges
    are optional (lo, hi) pairs applied after plotting.
    """

    kind: str
    input_path: str | Path
    output_path: str | Path
    manifest_path: str | Path | None = None
    log_x: bool | None = None
    log_y: bool | None = None
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    dpi: int = 150


def _check_range(name: str, value: tuple[float, float] | None) -> None:
    if value is None:
        return
    if len(value) != 2 or not all(np.isfinite(value)):
        raise SpecError(f"{name} must be a finite (lo, hi) pair, got {value!r}")
    if not value[0] < value[1]:
        raise SpecError(f"{name} must satisfy lo < hi, got {value!r}")


def _validate(spec: FigureSpec) -> str:
    """Check the spec and return the output format name."""
    if spec.kind not in FIGURE_KINDS:
        raise SpecError(
            f"unknown figure kind {spec.kind!r}, expected one of {', '.join(FIGURE_KINDS)}"
        )
    suffix = Path(spec.output_path).suffix.lower()
    if suffix not in _FORMATS:
        raise SpecError(
            f"cannot infer image format from {spec.output_path!r}; "
            f"use one of {', '.join(sorted(_FORMATS))}"
        )
    _check_range("x_range", spec.x_range)
    _check_range("y_range", spec.y_range)
    if not isinstance(spec.dpi, int) or isinstance(spec.dpi, bool) or spec.dpi <= 0:
        raise SpecError(f"dpi must be a positive integer, got {spec.dpi!r}")
    if spec.kind == "projection" and (spec.log_x or spec.log_y):
        raise SpecError("projection plots bead coordinates; log axes are not supported")
    return _FORMATS[suffix]


def _axis_scales(spec: FigureSpec) -> tuple[bool, bool]:
    default = spec.kind != "projection"
    log_x = default if spec.log_x is None else spec.log_x
    log_y = default if spec.log_y is None else spec.log_y
    return log_x, log_y


def _apply_axes(ax: plt.Axes, spec: FigureSpec) -> None:
    log_x, log_y = _axis_scales(spec)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    if spec.x_range is not None:
        ax.set_xlim(*spec.x_range)
    if spec.y_range is not None:
        ax.set_ylim(*spec.y_range)


def _build_r2_comparison(spec: FigureSpec, ax: plt.Axes) -> None:
    results = read_results(spec.input_path)
    manifest = locate_manifest(spec.input_path, spec.manifest_path)
    physics = read_manifest_physics(manifest)
    cross_check_formula_columns(results, physics)

    order = np.argsort(results["beta"])
    beta = results["beta"][order]
    r2 = results["r2_mc"][order]
    err = results["r2_err"][order]

    grid = np.geomspace(beta[0], beta[-1], 400) if beta[0] < beta[-1] else beta[:1]
    curve_3d = [
        r_squared_3d(b, physics.alpha, physics.mu, physics.n_filaments) for b in grid
    ]
    curve_2d = [r_squared_2d(b, physics.mu, physics.n_filaments) for b in grid]

    ax.plot(grid, curve_3d, "-", color="tab:blue", label="3D formula")
    ax.plot(grid, curve_2d, "--", color="tab:orange", label="2D formula")
    ax.errorbar(
        beta,
        r2,
        yerr=err,
        fmt="o",
        color="black",
        markersize=4,
        capsize=3,
        label="Monte Carlo",
        zorder=3,
    )
    ax.set_xlabel("beta")
    ax.set_ylabel("R^2")
    ax.set_title(
        f"Cloud size vs inverse temperature "
        f"(N={physics.n_filaments}, alpha={physics.alpha:g}, mu={physics.mu:g})"
    )
    ax.legend()


def _build_slope(spec: FigureSpec, ax: plt.Axes) -> None:
    results = read_results(spec.input_path)
    order = np.argsort(results["beta"])
    beta = results["beta"][order]
    slope = results["mean_slope"][order]

    # Perfectly straight filaments report an infinite slope; those points
    # carry no height to draw, so they are dropped rather than plotted.
    finite = np.isfinite(slope)
    if not finite.any():
        raise DataError(f"{spec.input_path}: no finite mean_slope values to plot")
    ax.plot(beta[finite], slope[finite], "o-", color="tab:blue", label="mean slope")
    ax.axhline(
        SLOPE_THRESHOLD,
        color="tab:red",
        linestyle="--",
        label="straightness threshold (a = 0.1 delta)",
    )
    ax.set_xlabel("beta")
    ax.set_ylabel("mean slope (delta / a)")
    ax.set_title("Segment slope vs inverse temperature")
    ax.legend()


def _build_projection(spec: FigureSpec, ax: plt.Axes) -> None:
    snapshot = read_snapshot(spec.input_path)
    for filament in np.unique(snapshot["filament_index"]):
        mask = snapshot["filament_index"] == filament
        ax.plot(
            snapshot["x"][mask],
            snapshot["y"][mask],
            marker=".",
            markersize=3,
            linewidth=0.6,
            label=f"filament {int(filament)}",
        )
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("Top-down bead projection")


_BUILDERS = {
    "r2-comparison": _build_r2_comparison,
    "slope": _build_slope,
    "projection": _build_projection,
}


def build_figure(spec: FigureSpec) -> Figure:
    """Construct the figure for a spec without writing anything to disk."""
    _validate(spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    try:
        _BUILDERS[spec.kind](spec, ax)
        _apply_axes(ax, spec)
        fig.tight_layout()
    except Exception:
        plt.close(fig)
        raise
    return fig


def render(spec: FigureSpec) -> Path:
    """Render a spec to its output image and return the written path."""
    fmt = _validate(spec)
    fig = build_figure(spec)
    output = Path(spec.output_path)
    try:
        with plt.rc_context({"svg.hashsalt": "figpipe"}):
            fig.savefig(output, format=fmt, dpi=spec.dpi, metadata=_METADATA[fmt])
    finally:
        plt.close(fig)
    return output
