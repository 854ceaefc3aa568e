"""Run configuration: YAML parsing, presets, validation, canonical hashing.

A run document has four sections plus a worker count:

    preset: desk                 # optional; named defaults, user keys win
    physics: {alpha, mu, L, N, M}
    sweep:   {betas: [...], log_spaced: {count, min, max}, extra: [...]}
    sampler: {seed, sweeps_total, sweeps_burnin, max_bisection_level,
              translate_radius (number or "auto"), mode, min_separation,
              init_side, translate_whole_filament, eq_window, eq_rel_tol,
              resync_interval}
    output:  {directory, formats: subset of [csv, jsonl]}
    workers: 1

The sweep is the union of `betas`, the expanded `log_spaced` grid, and
`extra`, deduplicated and sorted ascending.  The config hash covers only
the science sections (physics, sweep, sampler): runs that differ solely
in output location or worker count are the same experiment.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
import yaml

from .model import SystemParams

FORMATS = ("csv", "jsonl")
MODES = ("bridge", "naive")


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""


PRESETS: dict[str, dict[str, Any]] = {
    # Full-scale comparison sweep: slow, not part of CI.
    "paper-fig4": {
        "physics": {"alpha": 1e7, "mu": 2000.0, "L": 10.0, "N": 20, "M": 1024},
        "sweep": {
            "log_spaced": {"count": 20, "min": 0.001, "max": 1.0},
            "extra": [10.0, 100.0],
        },
        "sampler": {
            "sweeps_total": 60_000,
            "sweeps_burnin": 50_000,
            "max_bisection_level": 6,
            "translate_radius": "auto",
            "init_side": 10.0,
        },
        "output": {"directory": "runs/paper-fig4"},
    },
    # Reduced system that keeps the qualitative sweep shape but runs in
    # minutes on a desktop.
    "desk": {
        "physics": {"alpha": 1e7, "mu": 2000.0, "L": 10.0, "N": 10, "M": 64},
        "sweep": {"betas": [0.001, 0.01, 0.1, 1.0, 10.0]},
        "sampler": {
            "sweeps_total": 30_000,
            "sweeps_burnin": 10_000,
            "max_bisection_level": 4,
            "translate_radius": "auto",
            "init_side": 0.5,
        },
        "output": {"directory": "runs/desk"},
    },
}

SAMPLER_DEFAULTS: dict[str, Any] = {
    "seed": 1234,
    "sweeps_total": 20_000,
    "sweeps_burnin": 5_000,
    # None = auto-fit: the largest window that fits M, capped at 2^4
    "max_bisection_level": None,
    "translate_radius": "auto",
    "mode": "bridge",
    "min_separation": None,
    "init_side": 10.0,
    "translate_whole_filament": True,
    "eq_window": None,
    "eq_rel_tol": 1e-3,
    "resync_interval": 1000,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated sweep description."""

    alpha: float
    mu: float
    big_l: float
    n_filaments: int
    n_segments: int
    betas: tuple[float, ...]
    seed: int
    sweeps_total: int
    sweeps_burnin: int
    max_bisection_level: int
    translate_radius: float | str
    mode: str
    min_separation: float | None
    init_side: float
    translate_whole_filament: bool
    eq_window: int | None
    eq_rel_tol: float
    resync_interval: int
    output_directory: str
    formats: tuple[str, ...]
    workers: int

    def system_params(self, beta: float) -> SystemParams:
        return SystemParams(
            alpha=self.alpha,
            beta=beta,
            mu=self.mu,
            big_l=self.big_l,
            n_filaments=self.n_filaments,
            n_segments=self.n_segments,
        )


def _require_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(section: Mapping[str, Any], allowed: set[str], path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'" if path else f"unknown key '{key}'")


def _number(value: Any, path: str, *, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    x = float(value)
    if not np.isfinite(x):
        raise ConfigError(f"{path}: must be finite, got {value!r}")
    if positive and x <= 0.0:
        raise ConfigError(f"{path}: must be > 0, got {value!r}")
    return x


def _integer(value: Any, path: str, *, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value


def _deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _expand_sweep(section: Mapping[str, Any]) -> tuple[float, ...]:
    _reject_unknown(section, {"betas", "log_spaced", "extra"}, "sweep")
    values: list[float] = []
    for field in ("betas", "extra"):
        raw = section.get(field)
        if raw is None:
            continue
        if not isinstance(raw, (list, tuple)):
            raise ConfigError(f"sweep.{field}: expected a list of numbers")
        values.extend(_number(v, f"sweep.{field}[{i}]", positive=True) for i, v in enumerate(raw))
    spec = section.get("log_spaced")
    if spec is not None:
        spec = _require_mapping(spec, "sweep.log_spaced")
        _reject_unknown(spec, {"count", "min", "max"}, "sweep.log_spaced")
        for field in ("count", "min", "max"):
            if field not in spec:
                raise ConfigError(f"sweep.log_spaced.{field}: required")
        count = _integer(spec["count"], "sweep.log_spaced.count", minimum=2)
        lo = _number(spec["min"], "sweep.log_spaced.min", positive=True)
        hi = _number(spec["max"], "sweep.log_spaced.max", positive=True)
        if hi <= lo:
            raise ConfigError("sweep.log_spaced: max must exceed min")
        values.extend(float(b) for b in np.logspace(np.log10(lo), np.log10(hi), count))
    betas = tuple(sorted(set(values)))
    if not betas:
        raise ConfigError("sweep: no beta values (give betas, log_spaced, or extra)")
    return betas


def parse_config(data: Any) -> RunConfig:
    """Validate a parsed document (preset applied first, user keys win)."""
    doc = dict(_require_mapping(data, "config"))
    _reject_unknown(doc, {"preset", "physics", "sweep", "sampler", "output", "workers"}, "")

    preset_name = doc.pop("preset", None)
    if preset_name is not None:
        if preset_name not in PRESETS:
            known = ", ".join(sorted(PRESETS))
            raise ConfigError(f"preset: unknown '{preset_name}' (available: {known})")
        doc = _deep_merge(PRESETS[preset_name], doc)

    physics = _require_mapping(doc.get("physics"), "physics")
    _reject_unknown(physics, {"alpha", "mu", "L", "N", "M"}, "physics")
    for field in ("alpha", "mu", "L", "N", "M"):
        if field not in physics:
            raise ConfigError(f"physics.{field}: required")
    alpha = _number(physics["alpha"], "physics.alpha", positive=True)
    mu = _number(physics["mu"], "physics.mu", positive=True)
    big_l = _number(physics["L"], "physics.L", positive=True)
    n_filaments = _integer(physics["N"], "physics.N", minimum=1)
    n_segments = _integer(physics["M"], "physics.M", minimum=2)

    betas = _expand_sweep(_require_mapping(doc.get("sweep"), "sweep"))

    sampler = _deep_merge(SAMPLER_DEFAULTS, _require_mapping(doc.get("sampler"), "sampler"))
    _reject_unknown(sampler, set(SAMPLER_DEFAULTS), "sampler")
    seed = _integer(sampler["seed"], "sampler.seed", minimum=0)
    sweeps_total = _integer(sampler["sweeps_total"], "sampler.sweeps_total", minimum=0)
    sweeps_burnin = _integer(sampler["sweeps_burnin"], "sampler.sweeps_burnin", minimum=0)
    if sweeps_burnin > sweeps_total:
        raise ConfigError("sampler.sweeps_burnin: must not exceed sweeps_total")
    level_raw = sampler["max_bisection_level"]
    if level_raw is None:
        if n_segments < 3:
            raise ConfigError("physics.M: must be >= 3 so a bisection window fits")
        level = min(4, int(math.log2(n_segments - 1)))
    else:
        level = _integer(level_raw, "sampler.max_bisection_level", minimum=1)
        if 2 ** level >= n_segments:
            raise ConfigError(
                f"sampler.max_bisection_level: window 2^{level} must be smaller than physics.M = {n_segments}"
            )
    radius_raw = sampler["translate_radius"]
    radius: float | str
    if radius_raw == "auto":
        radius = "auto"
    else:
        radius = _number(radius_raw, "sampler.translate_radius", positive=True)
    mode = sampler["mode"]
    if mode not in MODES:
        raise ConfigError(f"sampler.mode: expected one of {MODES}, got {mode!r}")
    min_sep = sampler["min_separation"]
    if min_sep is not None:
        min_sep = _number(min_sep, "sampler.min_separation", positive=True)
    init_side = _number(sampler["init_side"], "sampler.init_side", positive=True)
    whole = _boolean(sampler["translate_whole_filament"], "sampler.translate_whole_filament")
    eq_window = sampler["eq_window"]
    if eq_window is not None:
        eq_window = _integer(eq_window, "sampler.eq_window", minimum=2)
    eq_rel_tol = _number(sampler["eq_rel_tol"], "sampler.eq_rel_tol", positive=True)
    resync = _integer(sampler["resync_interval"], "sampler.resync_interval", minimum=1)

    output = _deep_merge({"directory": "runs/out", "formats": list(FORMATS)},
                         _require_mapping(doc.get("output"), "output"))
    _reject_unknown(output, {"directory", "formats"}, "output")
    directory = output["directory"]
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory: expected a nonempty path string")
    fmts_raw = output["formats"]
    if not isinstance(fmts_raw, (list, tuple)) or not fmts_raw:
        raise ConfigError("output.formats: expected a nonempty list")
    for i, f in enumerate(fmts_raw):
        if f not in FORMATS:
            raise ConfigError(f"output.formats[{i}]: expected one of {FORMATS}, got {f!r}")
    formats = tuple(f for f in FORMATS if f in fmts_raw)

    workers = _integer(doc.get("workers", 1), "workers", minimum=1)

    return RunConfig(
        alpha=alpha,
        mu=mu,
        big_l=big_l,
        n_filaments=n_filaments,
        n_segments=n_segments,
        betas=betas,
        seed=seed,
        sweeps_total=sweeps_total,
        sweeps_burnin=sweeps_burnin,
        max_bisection_level=level,
        translate_radius=radius,
        mode=mode,
        min_separation=min_sep,
        init_side=init_side,
        translate_whole_filament=whole,
        eq_window=eq_window,
        eq_rel_tol=eq_rel_tol,
        resync_interval=resync,
        output_directory=directory,
        formats=formats,
        workers=workers,
    )


def load_config(path: str) -> RunConfig:
    """Read and validate a YAML run document from disk."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        # PyYAML error strings already carry line/column marks.
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(data)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    """Serialize to the document form; parse_config(result) == cfg.

    The sweep is emitted as the expanded beta list, so round-tripping a
    log_spaced document yields an equal (not merely equivalent) config.
    """
    return {
        "physics": {
            "alpha": cfg.alpha,
            "mu": cfg.mu,
            "L": cfg.big_l,
            "N": cfg.n_filaments,
            "M": cfg.n_segments,
        },
        "sweep": {"betas": list(cfg.betas)},
        "sampler": {
            "seed": cfg.seed,
            "sweeps_total": cfg.sweeps_total,
            "sweeps_burnin": cfg.sweeps_burnin,
            "max_bisection_level": cfg.max_bisection_level,
            "translate_radius": cfg.translate_radius,
            "mode": cfg.mode,
            "min_separation": cfg.min_separation,
            "init_side": cfg.init_side,
            "translate_whole_filament": cfg.translate_whole_filament,
            "eq_window": cfg.eq_window,
            "eq_rel_tol": cfg.eq_rel_tol,
            "resync_interval": cfg.resync_interval,
        },
        "output": {"directory": cfg.output_directory, "formats": list(cfg.formats)},
        "workers": cfg.workers,
    }


def config_hash(cfg: RunConfig) -> str:
    """sha256 over the canonical JSON of the science sections only."""
    doc = config_to_dict(cfg)
    payload = {key: doc[key] for key in ("physics", "sweep", "sampler")}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
