"""Metropolis chain for the bead-filament system.

Two move types, drawn 50/50 per attempt:

- translate: rigidly shift one whole filament by a displacement drawn
  uniformly from a disc.  Kinetic energy is exactly unchanged; the move is
  accepted on the interaction and angular-momentum change.  A single-bead
  variant (translate_whole_filament = False) moves only bead 1 and then the
  kinetic change is counted too.

- bisection regrow: pick a cyclic window of 2^level segments with a uniform
  anchor and resample its 2^level - 1 interior beads with the endpoints held
  fixed.  In "bridge" mode the interior is built stagewise: each stage places
  the midpoint of a bracketing pair at their average plus Gaussian noise of
  per-coordinate variance t / (2 alpha beta), where 2t is the axial distance
  between the pair.  That samples the kinetic action of the window exactly,
  so the Metropolis rule counts only the interaction and angular-momentum
  change.  In "naive" mode the interior beads get independent uniform-disc
  perturbations and the full energy change is counted.

One sweep = N attempted moves.  All randomness flows through one
numpy Generator, so a seed fixes the trajectory bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .model import (
    EnergyBreakdown,
    SingularityError,
    SystemParams,
    SystemState,
    delta_energy_regrow,
    delta_energy_translate,
    total_energy,
)
from .stats import TraceBuffer

_MODES = ("bridge", "naive")


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for one chain.  translate_radius is the uniform-disc proposal radius."""

    seed: int
    sweeps_total: int
    sweeps_burnin: int
    max_bisection_level: int
    translate_radius: float
    mode: str = "bridge"
    min_separation: float | None = None  # None: 1e-12 * max(1, rms radius)
    init_side: float = 10.0  # straight-column start, centers uniform in this square
    translate_whole_filament: bool = True
    autotune_translate: bool = False  # adapt radius during burn-in only
    eq_window: int | None = None  # None: 5% of sweeps_total
    eq_rel_tol: float = 1e-3
    resync_interval: int = 1000  # sweeps between from-scratch energy recomputes

    def __post_init__(self):
        if self.sweeps_total < 0 or self.sweeps_burnin < 0:
            raise ValueError("sweep counts must be nonnegative")
        if self.sweeps_burnin > self.sweeps_total:
            raise ValueError("sweeps_burnin must not exceed sweeps_total")
        if self.max_bisection_level < 1:
            raise ValueError("max_bisection_level must be at least 1")
        if not self.translate_radius > 0.0:
            raise ValueError("translate_radius must be positive")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.min_separation is not None and not self.min_separation > 0.0:
            raise ValueError("min_separation must be positive when given")
        if not self.init_side > 0.0:
            raise ValueError("init_side must be positive")
        if self.eq_window is not None and self.eq_window < 1:
            raise ValueError("eq_window must be at least 1")
        if not 0.0 < self.eq_rel_tol:
            raise ValueError("eq_rel_tol must be positive")
        if self.resync_interval < 1:
            raise ValueError("resync_interval must be at least 1")


@dataclass
class AcceptanceStats:
    proposed_translate: int = 0
    accepted_translate: int = 0
    proposed_regrow: int = 0
    accepted_regrow: int = 0

    def snapshot(self) -> tuple[int, int, int, int]:
        return (
            self.proposed_translate,
            self.accepted_translate,
            self.proposed_regrow,
            self.accepted_regrow,
        )

    @property
    def rate_translate(self) -> float:
        return self.accepted_translate / self.proposed_translate if self.proposed_translate else 0.0

    @property
    def rate_regrow(self) -> float:
        return self.accepted_regrow / self.proposed_regrow if self.proposed_regrow else 0.0


def initial_state(
    params: SystemParams, rng: np.random.Generator, side: float = 10.0
) -> SystemState:
    """Straight bead columns; planar positions uniform in a centered square."""
    if not side > 0.0:
        raise ValueError("side must be positive")
    n, m = params.n_filaments, params.n_segments
    for _ in range(100):
        xy = rng.uniform(-side / 2.0, side / 2.0, size=(n, 2))
        z = xy[:, 0] + 1j * xy[:, 1]
        if n == 1:
            break
        sep = np.abs(z[:, None] - z[None, :])[np.triu_indices(n, k=1)]
        if sep.min() > 1e-9 * max(1.0, side):
            break
    else:
        raise RuntimeError("could not draw separated starting positions")
    return SystemState(np.repeat(z[:, None], m, axis=1))


def _uniform_disc(rng: np.random.Generator, radius: float) -> complex:
    r = radius * math.sqrt(rng.random())
    theta = 2.0 * math.pi * rng.random()
    return complex(r * math.cos(theta), r * math.sin(theta))


def propose_translate(
    state: SystemState, params: SystemParams, config: SamplerConfig, rng: np.random.Generator
) -> tuple[int, complex]:
    """Uniform filament index and a displacement uniform in the proposal disc."""
    i = int(rng.integers(params.n_filaments))
    return i, _uniform_disc(rng, config.translate_radius)


def propose_bisection_regrow(
    state: SystemState, params: SystemParams, config: SamplerConfig, rng: np.random.Generator
) -> tuple[int, tuple[int, int], np.ndarray]:
    """Propose new interior beads for a random cyclic window of 2^level segments.

    Returns (filament_index, (start, count), new_beads) with start the first
    regrown bead and count = 2^level - 1.
    """
    m = params.n_segments
    span = 1 << config.max_bisection_level
    if span >= m:
        raise ValueError(f"bisection window of {span} segments needs M > {span}")
    i = int(rng.integers(params.n_filaments))
    anchor = int(rng.integers(m))
    beads = state.beads

    if config.mode == "bridge":
        delta = params.delta
        stiff = params.alpha * params.beta
        w = np.empty(span + 1, dtype=np.complex128)
        w[0] = beads[i, anchor]
        w[span] = beads[i, (anchor + span) % m]
        normals = rng.standard_normal(2 * (span - 1))
        pos = 0
        gap = span
        while gap > 1:
            half = gap // 2
            sd = math.sqrt(half * delta / (2.0 * stiff))  # variance t/(2 alpha beta), t = half*delta
            for lo in range(0, span, gap):
                w[lo + half] = 0.5 * (w[lo] + w[lo + gap]) + sd * complex(
                    normals[pos], normals[pos + 1]
                )
                pos += 2
            gap = half
        new_beads = w[1:-1].copy()
    else:
        cols = (anchor + 1 + np.arange(span - 1)) % m
        new_beads = beads[i, cols].copy()
        for j in range(span - 1):
            new_beads[j] += _uniform_disc(rng, config.translate_radius)

    return i, ((anchor + 1) % m, span - 1), new_beads


def acceptance_probability(delta_counted: EnergyBreakdown, params: SystemParams) -> float:
    """min(1, exp(-beta dH_counted - mu dI)) with overflow clamps."""
    e = delta_counted.gibbs_exponent(params)
    if e >= 0.0:
        return 1.0
    if e < -700.0:  # exp would underflow; deterministic reject
        return 0.0
    return math.exp(e)


def metropolis_accept(delta_counted: EnergyBreakdown, params: SystemParams, u: float) -> bool:
    """Accept iff u < min(1, exp(-beta dH_counted - mu dI)), u uniform in [0, 1)."""
    return u < acceptance_probability(delta_counted, params)


def sweep(
    state: SystemState,
    params: SystemParams,
    config: SamplerConfig,
    rng: np.random.Generator,
    stats: AcceptanceStats,
    energy: EnergyBreakdown | None = None,
) -> tuple[SystemState, EnergyBreakdown]:
    """Attempt N moves in place; returns the state and the updated running energy.

    Proposals that trip the minimum-separation guard are rejected outright.
    """
    if energy is None:
        energy = total_energy(state, params, config.min_separation)
    beads = state.beads
    n, m = beads.shape
    guard = config.min_separation
    if guard is None:
        rms = math.sqrt(float(np.mean(beads.real**2 + beads.imag**2)))
        guard = 1e-12 * max(1.0, rms)

    for _ in range(n):
        if rng.random() < 0.5:
            stats.proposed_translate += 1
            i, d = propose_translate(state, params, config, rng)
            if config.translate_whole_filament:
                try:
                    de = delta_energy_translate(state, params, i, d, guard)
                except SingularityError:
                    continue
                if metropolis_accept(de, params, rng.random()):
                    beads[i] += d
                    energy = energy + de
                    stats.accepted_translate += 1
            else:
                # single-bead variant: displace bead 1 only; kinetic counts
                new = np.array([beads[i, 0] + d])
                try:
                    de = delta_energy_regrow(state, params, i, (0, 1), new, guard)
                except SingularityError:
                    continue
                if metropolis_accept(de, params, rng.random()):
                    beads[i, 0] = new[0]
                    energy = energy + de
                    stats.accepted_translate += 1
        else:
            stats.proposed_regrow += 1
            i, bead_range, new_beads = propose_bisection_regrow(state, params, config, rng)
            try:
                de = delta_energy_regrow(state, params, i, bead_range, new_beads, guard)
            except SingularityError:
                continue
            if config.mode == "bridge":
                # kinetic part is sampled exactly by the bridge proposal
                counted = EnergyBreakdown(0.0, de.interaction, de.angular_momentum)
            else:
                counted = de
            if metropolis_accept(counted, params, rng.random()):
                start, count = bead_range
                beads[i, (start + np.arange(count)) % m] = new_beads
                energy = energy + de
                stats.accepted_regrow += 1

    return state, energy


def cumulative_energy_mean(energies: Sequence[float] | np.ndarray) -> np.ndarray:
    """Prefix means E_cum^k = k^-1 sum_{i<=k} e_i of a per-sweep energy trace."""
    e = np.asarray(energies, dtype=np.float64)
    if e.size == 0:
        return e.copy()
    return np.cumsum(e) / np.arange(1, e.size + 1)


def equilibration_index(
    cumulative: Sequence[float] | np.ndarray, window: int, rel_tol: float = 1e-3
) -> int | None:
    """First k whose trailing `window` prefix-means span at most
    rel_tol * (1 + |E_cum^k|); None if the series never settles."""
    if window < 1:
        raise ValueError("window must be at least 1")
    e = np.asarray(cumulative, dtype=np.float64)
    for k in range(window, e.size + 1):
        w = e[k - window : k]
        if w.max() - w.min() <= rel_tol * (1.0 + abs(e[k - 1])):
            return k
    return None


@dataclass
class MeasurementRun:
    """Output of a measurement phase: the per-sweep trace and optional bead snapshots."""

    trace: TraceBuffer
    bead_samples: np.ndarray | None  # (n_snapshots, N, M) complex


class Chain:
    """Owns one Markov chain: state, rng, running energy and acceptance counters.

    The running energy is advanced by per-move deltas and re-derived from
    scratch every resync_interval sweeps; the largest relative discrepancy
    seen at a resync is tracked in max_resync_drift.
    """

    def __init__(
        self, params: SystemParams, config: SamplerConfig, state: SystemState | None = None
    ):
        if (1 << config.max_bisection_level) >= params.n_segments:
            raise ValueError(
                f"bisection level {config.max_bisection_level} needs "
                f"M > {1 << config.max_bisection_level}, got M = {params.n_segments}"
            )
        if not config.translate_whole_filament and params.n_segments < 3:
            raise ValueError("single-bead translation needs at least 3 beads")
        self.params = params
        self.config = config
        self._cfg = config  # live copy; radius may be autotuned during burn-in
        self.rng = np.random.default_rng(config.seed)
        self.state = state.copy() if state is not None else initial_state(
            params, self.rng, config.init_side
        )
        self.energy = total_energy(self.state, params, config.min_separation)
        self.stats = AcceptanceStats()
        self.sweeps_done = 0
        self.max_resync_drift = 0.0
        self.equilibrated_at: int | None = None
        self._tune_mark = (0, 0)

    @property
    def translate_radius(self) -> float:
        return self._cfg.translate_radius

    def _sweep_once(self):
        _, self.energy = sweep(
            self.state, self.params, self._cfg, self.rng, self.stats, self.energy
        )
        self.sweeps_done += 1
        if self.sweeps_done % self._cfg.resync_interval == 0:
            self.resync()

    def resync(self):
        fresh = total_energy(self.state, self.params, self._cfg.min_separation)
        for name in ("kinetic", "interaction", "angular_momentum"):
            a, b = getattr(self.energy, name), getattr(fresh, name)
            drift = abs(a - b) / (1.0 + abs(b))
            if drift > self.max_resync_drift:
                self.max_resync_drift = drift
        self.energy = fresh

    def _adapt_radius(self):
        proposed, accepted = self.stats.proposed_translate, self.stats.accepted_translate
        dp = proposed - self._tune_mark[0]
        da = accepted - self._tune_mark[1]
        self._tune_mark = (proposed, accepted)
        if dp == 0:
            return
        rate = da / dp
        r = self._cfg.translate_radius
        if rate > 0.5:
            r *= 2.0
        elif rate < 0.25:
            r *= 0.5
        r = min(max(r, 1e-15), 1e15)
        if r != self._cfg.translate_radius:
            self._cfg = replace(self._cfg, translate_radius=r)

    def run_burnin(self) -> int:
        """Run up to sweeps_burnin sweeps; stop early once the cumulative
        energy mean settles.  Returns the number of burn-in sweeps used."""
        cfg = self._cfg
        window = cfg.eq_window or max(2, round(0.05 * cfg.sweeps_total))
        cadence = max(1, window // 4)
        total = 0.0
        e_cum: list[float] = []
        used = 0
        for s in range(cfg.sweeps_burnin):
            self._sweep_once()
            total += self.energy.weighted_total(self.params)
            e_cum.append(total / (s + 1))
            used = s + 1
            if cfg.autotune_translate and used % 200 == 0:
                self._adapt_radius()
            if len(e_cum) >= window and used % cadence == 0:
                tail = e_cum[-window:]
                if max(tail) - min(tail) <= cfg.eq_rel_tol * (1.0 + abs(e_cum[-1])):
                    self.equilibrated_at = used
                    break
        return used

    def run_measurement(self, n_sweeps: int, snapshot_every: int = 0) -> MeasurementRun:
        """Run n_sweeps recording sweeps; optionally keep bead snapshots."""
        trace = TraceBuffer(n_sweeps)
        snaps: list[np.ndarray] = []
        beads = self.state.beads
        n, m = beads.shape
        delta = self.params.delta
        for s in range(n_sweeps):
            self._sweep_once()
            ab2 = beads.real * beads.real + beads.imag * beads.imag
            total = float(ab2.sum())
            seg = np.roll(beads, -1, axis=1) - beads
            a2 = float(np.mean(seg.real * seg.real + seg.imag * seg.imag))
            trace.record(
                self.sweeps_done,
                total / (n * m),
                a2,
                self.energy.kinetic,
                self.energy.interaction,
                delta * total,
                self.stats.snapshot(),
            )
            if snapshot_every and (s + 1) % snapshot_every == 0:
                snaps.append(beads.copy())
        return MeasurementRun(trace, np.array(snaps) if snaps else None)
