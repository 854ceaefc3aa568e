"""Shared fixtures: committed desk-scale sweep output and synthetic inputs."""

import json
from pathlib import Path

import pytest

from figpipe.formulas import r_squared_2d, r_squared_3d

DESK_DIR = Path(__file__).parent / "data" / "desk"

RESULTS_HEADER = (
    "beta,r2_mc,r2_err,a2_mc,a2_err,mean_slope,r2_formula_3d,r2_formula_2d,"
    "accept_rate_translate,accept_rate_regrow,e_mean,sweeps_used,seed"
)

SNAPSHOT_HEADER = "filament_index,k,x,y,z"

DEFAULT_PHYSICS = {"alpha": 1.0e7, "mu": 2000.0, "L": 10.0, "N": 10, "M": 64}


@pytest.fixture
def desk_csv() -> Path:
    return DESK_DIR / "results.csv"


@pytest.fixture
def desk_manifest() -> Path:
    return DESK_DIR / "manifest.json"


def write_manifest(path: Path, physics: dict | None = None) -> Path:
    """Write a minimal manifest carrying only what the pipeline reads."""
    body = {
        "config_hash": "synthetic",
        "resolved_config": {"physics": dict(physics or DEFAULT_PHYSICS)},
    }
    path.write_text(json.dumps(body, indent=2) + "\n")
    return path


def results_row(
    beta: float,
    physics: dict | None = None,
    mean_slope: float = 50.0,
    r2_offset: float = 0.0,
) -> str:
    """One CSV row whose formula columns match the given physics exactly."""
    phys = physics or DEFAULT_PHYSICS
    r2_3d = r_squared_3d(beta, phys["alpha"], phys["mu"], phys["N"])
    r2_2d = r_squared_2d(beta, phys["mu"], phys["N"])
    r2_mc = r2_3d * 1.02 + r2_offset
    cells = [
        repr(beta),
        repr(r2_mc),
        repr(r2_mc * 0.01),
        "0.0001",
        "1e-06",
        repr(mean_slope),
        repr(r2_3d),
        repr(r2_2d),
        "0.5",
        "0.4",
        "1.25",
        "100",
        "42",
    ]
    return ",".join(cells)


def write_results(
    path: Path,
    betas: tuple[float, ...] = (0.1, 1.0),
    physics: dict | None = None,
    rows: list[str] | None = None,
) -> Path:
    if rows is None:
        rows = [results_row(beta, physics) for beta in betas]
    path.write_text("\n".join([RESULTS_HEADER, *rows]) + "\n")
    return path


@pytest.fixture
def synthetic_run(tmp_path: Path) -> tuple[Path, Path]:
    """A two-row results CSV plus matching manifest in a temp directory."""
    csv_path = write_results(tmp_path / "results.csv")
    manifest_path = write_manifest(tmp_path / "manifest.json")
    return csv_path, manifest_path


@pytest.fixture
def snapshot_csv(tmp_path: Path) -> Path:
    """Two filaments, three beads each, at hand-picked planar positions."""
    rows = [SNAPSHOT_HEADER]
    coords = {0: [(0.1, 0.2), (0.15, 0.22), (0.12, 0.18)],
              1: [(-0.3, 0.05), (-0.28, 0.02), (-0.31, 0.07)]}
    for filament, beads in coords.items():
        for k, (x, y) in enumerate(beads, start=1):
            rows.append(f"{filament},{k},{x!r},{y!r},{(k - 1) * 0.15625!r}")
    path = tmp_path / "snapshot.csv"
    path.write_text("\n".join(rows) + "\n")
    return path
