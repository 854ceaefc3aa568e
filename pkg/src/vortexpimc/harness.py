"""Batch sweep driver: per-beta chains, CSV/JSONL outputs, manifest, resume.

Each beta point is an independent job seeded from the master seed and the
point's index in the sorted sweep, so serial and parallel execution (and
any completion order under resume) produce identical science outputs.
The manifest is the single source of truth: the results CSV is always
regenerated from its completed rows, and timestamps live only in the
manifest so the CSV stays byte-stable.
"""

from __future__ import annotations

import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, config_hash, config_to_dict
from .meanfield import r_squared_2d, r_squared_3d
from .model import SystemParams, SystemState
from .sampler import Chain, SamplerConfig
from .stats import blocked_error, straightness_report

OUTPUT_ROOT_ENV = "VORTEXPIMC_OUTPUT_ROOT"
MANIFEST_NAME = "manifest.json"
RESULTS_NAME = "results.csv"

CSV_COLUMNS = (
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


def resolve_output_dir(directory: str) -> str:
    """Relative output directories may be re-rooted via the environment."""
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not os.path.isabs(directory):
        return os.path.join(root, directory)
    return directory


def derive_seed(master_seed: int, beta_index: int) -> int:
    """Deterministic per-point seed; independent of execution order."""
    seq = np.random.SeedSequence([master_seed, beta_index])
    return int(seq.generate_state(1, np.uint64)[0])


def resolve_translate_radius(cfg: RunConfig, beta: float) -> tuple[float, bool]:
    """Initial step size and whether burn-in may retune it.

    The auto heuristic balances the trap: a displacement d costs roughly
    mu * L * 2 R d in angular momentum, so d ~ 1/(2 mu L R) keeps that
    cost O(1); the 1/R term caps the step at the cloud size when the
    trap is weak.  Burn-in autotuning then refines toward a healthy
    acceptance rate; an explicit numeric radius is left untouched.
    """
    if cfg.translate_radius != "auto":
        return float(cfg.translate_radius), False
    r_pred = math.sqrt(r_squared_3d(cfg.alpha, beta, cfg.mu, cfg.n_filaments))
    return 1.0 / (2.0 * cfg.mu * cfg.big_l * r_pred + 1.0 / r_pred), True


def sampler_config_for(cfg: RunConfig, beta_index: int) -> SamplerConfig:
    radius, autotune = resolve_translate_radius(cfg, cfg.betas[beta_index])
    return SamplerConfig(
        seed=derive_seed(cfg.seed, beta_index),
        sweeps_total=cfg.sweeps_total,
        sweeps_burnin=cfg.sweeps_burnin,
        max_bisection_level=cfg.max_bisection_level,
        translate_radius=radius,
        mode=cfg.mode,
        min_separation=cfg.min_separation,
        init_side=cfg.init_side,
        translate_whole_filament=cfg.translate_whole_filament,
        autotune_translate=autotune,
        eq_window=cfg.eq_window,
        eq_rel_tol=cfg.eq_rel_tol,
        resync_interval=cfg.resync_interval,
    )


def _rate(accepted: int, proposed: int) -> float:
    return accepted / proposed if proposed > 0 else math.nan


def _mean_and_blocked_error(samples: np.ndarray) -> tuple[float, float]:
    if samples.size >= 16:
        be = blocked_error(samples)
        return be.mean, be.error
    return float(np.mean(samples)), math.nan


def run_one_point(cfg: RunConfig, beta_index: int, out_dir: str) -> dict[str, Any]:
    """Burn in, measure, and summarize a single beta; runs in a worker."""
    beta = cfg.betas[beta_index]
    params = cfg.system_params(beta)
    scfg = sampler_config_for(cfg, beta_index)
    chain = Chain(params, scfg)
    burnin_used = chain.run_burnin()
    n_measure = cfg.sweeps_total - cfg.sweeps_burnin
    mark = chain.stats.snapshot()
    run = chain.run_measurement(n_measure)

    result: dict[str, Any] = {
        "index": beta_index,
        "seed": scfg.seed,
        "burnin_used": burnin_used,
        "translate_radius_initial": scfg.translate_radius,
        "translate_radius_final": chain.translate_radius,
        "equilibrated_at": chain.equilibrated_at,
        "row": None,
        "trace_file": None,
        "error": None,
    }
    if n_measure == 0:
        return result

    trace = run.trace
    r2_mc, r2_err = _mean_and_blocked_error(trace.column("r_squared"))
    a2_mc, a2_err = _mean_and_blocked_error(trace.column("a_squared"))
    report = straightness_report(trace.column("a_squared"), params)
    prop_t0, acc_t0, prop_r0, acc_r0 = mark
    prop_t1, acc_t1, prop_r1, acc_r1 = chain.stats.snapshot()
    result["row"] = {
        "beta": beta,
        "r2_mc": r2_mc,
        "r2_err": r2_err,
        "a2_mc": a2_mc,
        "a2_err": a2_err,
        "mean_slope": report.mean_slope,
        "r2_formula_3d": r_squared_3d(cfg.alpha, beta, cfg.mu, cfg.n_filaments),
        "r2_formula_2d": r_squared_2d(beta, cfg.mu, cfg.n_filaments),
        "accept_rate_translate": _rate(acc_t1 - acc_t0, prop_t1 - prop_t0),
        "accept_rate_regrow": _rate(acc_r1 - acc_r0, prop_r1 - prop_r0),
        "e_mean": float(np.mean(trace.weighted_energy(params))),
        "sweeps_used": burnin_used + n_measure,
        "seed": scfg.seed,
    }
    if "jsonl" in cfg.formats:
        name = f"trace-b{beta_index:03d}.jsonl"
        _write_trace_jsonl(trace, os.path.join(out_dir, name))
        result["trace_file"] = name
    return result


def _safe_run_one_point(cfg: RunConfig, beta_index: int, out_dir: str) -> dict[str, Any]:
    try:
        return run_one_point(cfg, beta_index, out_dir)
    except Exception:
        return {"index": beta_index, "row": None, "trace_file": None,
                "error": traceback.format_exc()}


def _write_trace_jsonl(trace, path: str):
    cols = {name: trace.column(name) for name in
            ("sweep_index", "r_squared", "a_squared", "kinetic", "interaction",
             "angular_momentum", "proposed_translate", "accepted_translate",
             "proposed_regrow", "accepted_regrow")}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(len(trace)):
            record = {
                "sweep_index": int(cols["sweep_index"][i]),
                "r_squared": float(cols["r_squared"][i]),
                "a_squared": float(cols["a_squared"][i]),
                "kinetic": float(cols["kinetic"][i]),
                "interaction": float(cols["interaction"][i]),
                "angular_momentum": float(cols["angular_momentum"][i]),
                "proposed_translate": int(cols["proposed_translate"][i]),
                "accepted_translate": int(cols["accepted_translate"][i]),
                "proposed_regrow": int(cols["proposed_regrow"][i]),
                "accepted_regrow": int(cols["accepted_regrow"][i]),
            }
            fh.write(json.dumps(record) + "\n")


def _format_number(value: Any) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans have no place in the results CSV")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_results_csv(rows: list[dict[str, Any]], path: str):
    """Rows ascending in beta, numbers at full round-trip precision."""
    lines = [",".join(CSV_COLUMNS)]
    for row in sorted(rows, key=lambda r: r["beta"]):
        lines.append(",".join(_format_number(row[c]) for c in CSV_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _new_manifest(cfg: RunConfig) -> dict[str, Any]:
    stamp = _now()
    return {
        "config_hash": config_hash(cfg),
        "code_version": __version__,
        "created_at": stamp,
        "updated_at": stamp,
        "master_seed": cfg.seed,
        "resolved_config": config_to_dict(cfg),
        "points": [
            {
                "index": i,
                "beta": beta,
                "seed": derive_seed(cfg.seed, i),
                "status": "pending",
                "row": None,
                "trace_file": None,
                "burnin_used": None,
                "translate_radius_initial": None,
                "translate_radius_final": None,
                "equilibrated_at": None,
                "error": None,
            }
            for i, beta in enumerate(cfg.betas)
        ],
    }


def _write_manifest(manifest: dict[str, Any], path: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def load_manifest(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _apply_result(manifest: dict[str, Any], result: dict[str, Any]):
    point = manifest["points"][result["index"]]
    if result.get("error"):
        point["status"] = "failed"
        point["error"] = result["error"]
    else:
        point["status"] = "done"
        point["error"] = None
        for key in ("row", "trace_file", "burnin_used", "translate_radius_initial",
                    "translate_radius_final", "equilibrated_at"):
            point[key] = result.get(key)
    manifest["updated_at"] = _now()


@dataclass(frozen=True)
class RunReport:
    """What a sweep produced and where."""

    output_dir: str
    manifest_path: str
    csv_path: str | None
    completed: int
    failures: tuple[tuple[float, str], ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def run_sweep(cfg: RunConfig, resume: bool = False) -> RunReport:
    """Execute every pending beta point and write the output files.

    A plain run starts a fresh manifest; resume reuses the existing one,
    skips completed points, retries failed ones, and refuses to continue
    if the stored config hash does not match (same directory, different
    experiment).
    """
    out_dir = resolve_output_dir(cfg.output_directory)
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)

    if resume:
        if not os.path.exists(manifest_path):
            raise FileNotFoundError(f"nothing to resume: {manifest_path} does not exist")
        manifest = load_manifest(manifest_path)
        if manifest.get("config_hash") != config_hash(cfg):
            raise ConfigError(
                f"config hash mismatch with {manifest_path}: the manifest was "
                "written by a different experiment; rerun instead of resuming"
            )
    else:
        manifest = _new_manifest(cfg)
    _write_manifest(manifest, manifest_path)

    jobs = [p["index"] for p in manifest["points"] if p["status"] != "done"]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            futures = {pool.submit(_safe_run_one_point, cfg, i, out_dir): i for i in jobs}
            for future in as_completed(futures):
                try:
                    result = future.result()
                except Exception as exc:  # pool breakage, not job failure
                    result = {"index": futures[future], "row": None,
                              "trace_file": None, "error": f"worker crashed: {exc}"}
                _apply_result(manifest, result)
                _write_manifest(manifest, manifest_path)
    else:
        for i in jobs:
            _apply_result(manifest, _safe_run_one_point(cfg, i, out_dir))
            _write_manifest(manifest, manifest_path)

    csv_path = None
    if "csv" in cfg.formats:
        rows = [p["row"] for p in manifest["points"]
                if p["status"] == "done" and p["row"] is not None]
        csv_path = os.path.join(out_dir, RESULTS_NAME)
        write_results_csv(rows, csv_path)

    failures = tuple(
        (p["beta"], p["error"]) for p in manifest["points"] if p["status"] == "failed"
    )
    completed = sum(1 for p in manifest["points"] if p["status"] == "done")
    return RunReport(
        output_dir=out_dir,
        manifest_path=manifest_path,
        csv_path=csv_path,
        completed=completed,
        failures=failures,
    )


def snapshot_export(state: SystemState, params: SystemParams, path: str):
    """Write bead coordinates as CSV rows (filament_index, k, x, y, z).

    k is 1-based along the axis; z = (k - 1) * delta reconstructs the
    axial coordinate of each bead.
    """
    delta = params.delta
    lines = ["filament_index,k,x,y,z"]
    for i in range(state.n_filaments):
        for k in range(1, state.n_segments + 1):
            psi = state.beads[i, k - 1]
            lines.append(
                f"{i},{k},{format(psi.real, '.17g')},"
                f"{format(psi.imag, '.17g')},{format((k - 1) * delta, '.17g')}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def snapshot_import(path: str) -> SystemState:
    """Rebuild a state from a snapshot CSV; exact for .17g round-trips."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "filament_index,k,x,y,z":
            raise ValueError(f"{path}: not a snapshot file (header {header!r})")
        cells: dict[tuple[int, int], complex] = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            fil, k, x, y, _ = line.split(",")
            cells[(int(fil), int(k))] = complex(float(x), float(y))
    if not cells:
        raise ValueError(f"{path}: snapshot has no data rows")
    n = 1 + max(key[0] for key in cells)
    m = max(key[1] for key in cells)
    if len(cells) != n * m:
        raise ValueError(f"{path}: expected {n * m} rows, found {len(cells)}")
    beads = np.empty((n, m), dtype=complex)
    for (fil, k), value in cells.items():
        beads[fil, k - 1] = value
    return SystemState(beads)
