"""Readers for sweep outputs: results CSV, run manifest, bead snapshots.

Every loader validates shape and header before returning data, and raises
DataError with a message that names what was wrong, so a truncated or
hand-edited file fails loudly instead of producing an empty plot.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formulas import r_squared_2d, r_squared_3d

RESULTS_COLUMNS = (
    "beta",
    "r2_mc",
    "r2_err",
    "a2_mc",
    "a2_err",
    "mean_slope",
    "r2_formula_3d",
    "r2_formula_2d",
    "accept_rate_translate",
    "accept_rate_regrow",
    "e_mean",
    "sweeps_used",
    "seed",
)

SNAPSHOT_COLUMNS = ("filament_index", "k", "x", "y", "z")

# Columns stored as integers in the CSV; everything else is float.
_INT_COLUMNS = frozenset({"sweeps_used", "seed"})


class DataError(ValueError):
    """A results, manifest, or snapshot file failed validation."""


@dataclass(frozen=True)
class PhysicsParams:
    """Physics block recorded in a run manifest."""

    alpha: float
    mu: float
    big_l: float
    n_filaments: int
    n_segments: int


def _read_rows(path: Path, expected_header: tuple[str, ...]) -> list[list[str]]:
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file, expected a header row")
    header = tuple(rows[0])
    if header != expected_header:
        missing = [name for name in expected_header if name not in header]
        extra = [name for name in header if name not in expected_header]
        detail = []
        if missing:
            detail.append(f"missing columns: {', '.join(missing)}")
        if extra:
            detail.append(f"unexpected columns: {', '.join(extra)}")
        if not detail:
            detail.append("columns are out of order")
        raise DataError(f"{path}: bad header ({'; '.join(detail)})")
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(expected_header):
            raise DataError(
                f"{path}: line {lineno} has {len(row)} fields, "
                f"expected {len(expected_header)}"
            )
    return body


def read_results(path: str | Path) -> dict[str, np.ndarray]:
    """Load a sweep results CSV as a column dictionary.

    Float columns come back as float64 arrays, integer columns
    (sweeps_used, seed) as integer arrays. The header must match the
    sweep output exactly and at least one data row must be present.
    """
    path = Path(path)
    body = _read_rows(path, RESULTS_COLUMNS)
    columns: dict[str, np.ndarray] = {}
    for index, name in enumerate(RESULTS_COLUMNS):
        cells = [row[index] for row in body]
        try:
            if name in _INT_COLUMNS:
                columns[name] = np.array([int(cell) for cell in cells], dtype=np.uint64)
            else:
                columns[name] = np.array([float(cell) for cell in cells], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"{path}: column {name}: {exc}") from exc
    return columns


def read_snapshot(path: str | Path) -> dict[str, np.ndarray]:
    """Load a bead snapshot CSV (one row per bead, grouped by filament)."""
    path = Path(path)
    body = _read_rows(path, SNAPSHOT_COLUMNS)
    columns: dict[str, np.ndarray] = {}
    for index, name in enumerate(SNAPSHOT_COLUMNS):
        cells = [row[index] for row in body]
        try:
            if name in ("filament_index", "k"):
                columns[name] = np.array([int(cell) for cell in cells], dtype=np.int64)
            else:
                columns[name] = np.array([float(cell) for cell in cells], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"{path}: column {name}: {exc}") from exc
    return columns


def locate_manifest(csv_path: str | Path, manifest_path: str | Path | None = None) -> Path:
    """Resolve the manifest that describes a results CSV.

    By default the manifest is expected next to the CSV as manifest.json;
    an explicit path overrides that.
    """
    if manifest_path is not None:
        resolved = Path(manifest_path)
    else:
        resolved = Path(csv_path).parent / "manifest.json"
    if not resolved.is_file():
        raise DataError(f"manifest not found: {resolved}")
    return resolved


def read_manifest_physics(path: str | Path) -> PhysicsParams:
    """Extract the physics parameters recorded in a run manifest."""
    path = Path(path)
    try:
        with open(path) as handle:
            manifest = json.load(handle)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    try:
        physics = manifest["resolved_config"]["physics"]
        params = PhysicsParams(
            alpha=float(physics["alpha"]),
            mu=float(physics["mu"]),
            big_l=float(physics["L"]),
            n_filaments=int(physics["N"]),
            n_segments=int(physics["M"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: missing or malformed physics block: {exc}") from exc
    return params


def cross_check_formula_columns(
    results: dict[str, np.ndarray],
    physics: PhysicsParams,
    rel_tol: float = 1e-10,
) -> None:
    """Verify the CSV's analytic columns against the manifest physics.

    Guards against pairing a results file with the wrong manifest, or a
    file whose columns were edited after the run.
    """
    for beta, got_3d, got_2d in zip(
        results["beta"], results["r2_formula_3d"], results["r2_formula_2d"]
    ):
        want_3d = r_squared_3d(float(beta), physics.alpha, physics.mu, physics.n_filaments)
        want_2d = r_squared_2d(float(beta), physics.mu, physics.n_filaments)
        for name, got, want in (
            ("r2_formula_3d", float(got_3d), want_3d),
            ("r2_formula_2d", float(got_2d), want_2d),
        ):
            if not math.isclose(got, want, rel_tol=rel_tol, abs_tol=0.0):
                raise DataError(
                    f"column {name} at beta={beta:g} is {got!r}, but the manifest "
                    f"physics predicts {want!r}; results and manifest do not match"
                )
