"""Bead-chain model of nearly parallel vortex filaments in a rotating trap.

A system is N filaments, each discretized into M beads along the axial
direction with spacing delta = L/M.  Bead k of filament i sits at a planar
position stored as a complex number psi = x + iy.  Chains close cyclically:
bead M+1 is bead 1.

Energy of a configuration (per unit circulation, all circulations equal 1):

    kinetic     = alpha * sum_i sum_k |psi_i(k+1) - psi_i(k)|^2 / (2 delta)
    interaction = - sum_{i<j} sum_k delta * log|psi_i(k) - psi_j(k)|
    angular momentum I = sum_i sum_k delta * |psi_i(k)|^2

and configurations are weighted by exp(-beta*H - mu*I), H = kinetic +
interaction.  The interaction couples beads at the same axial index k only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Planar bead positions are plain complex numbers: x = Re, y = Im.
PlanarPoint = complex

# Above this many beads, totals are accumulated with math.fsum to suppress
# cancellation in the long log sums; below it, pairwise np.sum is plenty.
_EXACT_SUM_THRESHOLD = 10_000


class SingularityError(RuntimeError):
    """Two filaments collided at the same axial index (log interaction blows up)."""

    def __init__(self, i: int, j: int, k: int, distance: float):
        self.pair = (i, j)
        self.segment = k
        self.distance = distance
        super().__init__(
            f"filaments {i} and {j} closer than the separation guard at "
            f"axial index {k}: distance {distance:.3e}"
        )


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters. delta = big_l / n_segments is derived, never stored."""

    alpha: float  # self-induction (bending stiffness) coefficient
    beta: float  # inverse temperature
    mu: float  # angular-momentum (trap) multiplier
    big_l: float  # axial length L
    n_filaments: int  # N
    n_segments: int  # M beads per filament

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.mu > 0 and self.big_l > 0):
            raise ValueError("alpha, beta, mu, big_l must all be positive")
        if self.n_filaments < 1:
            raise ValueError("need at least one filament")
        if self.n_segments < 2:
            raise ValueError("need at least two beads per filament")

    @property
    def delta(self) -> float:
        """Bead spacing L/M."""
        return self.big_l / self.n_segments


class SystemState:
    """Bead positions as a complex (N, M) array; a plain value, copy to share."""

    __slots__ = ("beads",)

    def __init__(self, beads: np.ndarray):
        arr = np.ascontiguousarray(beads, dtype=np.complex128)
        if arr.ndim != 2:
            raise ValueError(f"beads must be 2-d (filament, bead), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("bead positions must be finite")
        self.beads = arr

    @property
    def n_filaments(self) -> int:
        return self.beads.shape[0]

    @property
    def n_segments(self) -> int:
        return self.beads.shape[1]

    def copy(self) -> "SystemState":
        return SystemState(self.beads.copy())


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy terms (or term deltas) kept separate for incremental bookkeeping."""

    kinetic: float
    interaction: float
    angular_momentum: float

    def __add__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(
            self.kinetic + other.kinetic,
            self.interaction + other.interaction,
            self.angular_momentum + other.angular_momentum,
        )

    def __sub__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(
            self.kinetic - other.kinetic,
            self.interaction - other.interaction,
            self.angular_momentum - other.angular_momentum,
        )

    def gibbs_exponent(self, params: SystemParams) -> float:
        """-beta*(kinetic + interaction) - mu*I; the log of the Gibbs weight."""
        return -params.beta * (self.kinetic + self.interaction) - params.mu * self.angular_momentum

    def weighted_total(self, params: SystemParams) -> float:
        """H + (mu/beta) I, the combination whose running mean flags equilibration."""
        return self.kinetic + self.interaction + (params.mu / params.beta) * self.angular_momentum


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real * z.real + z.imag * z.imag


def _sum_terms(terms: np.ndarray, exact: bool) -> float:
    if exact:
        return math.fsum(terms.ravel().tolist())
    return float(np.sum(terms))


def _separation_guard(state: SystemState, min_separation: float | None) -> float:
    """Reject threshold for same-k bead pairs: explicit, or 1e-12 * max(1, rms radius)."""
    if min_separation is not None:
        return min_separation
    rms = math.sqrt(mean_square_position(state))
    return 1e-12 * max(1.0, rms)


def _check_pair_distances(dist: np.ndarray, guard: float, i: int, j_rows: np.ndarray):
    """dist has shape (rows, k-columns); j_rows maps rows to filament indices."""
    m = dist.min()
    if m < guard:
        r, k = np.unravel_index(int(np.argmin(dist)), dist.shape)
        raise SingularityError(i, int(j_rows[r]), int(k), float(m))


def total_energy(
    state: SystemState, params: SystemParams, min_separation: float | None = None
) -> EnergyBreakdown:
    """Full O(N^2 M) energy of a configuration.

    Raises SingularityError if any same-k pair sits closer than the separation
    guard.  Kinetic and angular-momentum terms are nonnegative by construction.
    """
    beads = state.beads
    n, m = beads.shape
    if (n, m) != (params.n_filaments, params.n_segments):
        raise ValueError(
            f"state shape {beads.shape} does not match params "
            f"({params.n_filaments}, {params.n_segments})"
        )
    delta = params.delta
    exact = n * m >= _EXACT_SUM_THRESHOLD

    seg = np.roll(beads, -1, axis=1) - beads  # cyclic: bead M+1 is bead 1
    kinetic = params.alpha / (2.0 * delta) * _sum_terms(_abs2(seg), exact)

    angular = delta * _sum_terms(_abs2(beads), exact)

    interaction = 0.0
    if n > 1:
        guard = _separation_guard(state, min_separation)
        partials = []
        for i in range(n - 1):
            dist = np.abs(beads[i + 1 :] - beads[i])
            _check_pair_distances(dist, guard, i, np.arange(i + 1, n))
            partials.append(_sum_terms(np.log(dist), exact))
        interaction = -delta * (math.fsum(partials) if exact else float(np.sum(partials)))

    return EnergyBreakdown(kinetic, interaction, angular)


def _other_rows(beads: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """All filament rows except i, plus their original indices."""
    n = beads.shape[0]
    idx = np.concatenate([np.arange(i), np.arange(i + 1, n)])
    return beads[idx], idx


def delta_energy_translate(
    state: SystemState,
    params: SystemParams,
    filament_index: int,
    displacement: PlanarPoint,
    min_separation: float | None = None,
) -> EnergyBreakdown:
    """Energy change for rigidly translating one filament by `displacement`.

    The kinetic term is exactly invariant under a rigid in-plane shift, so its
    delta is identically zero (not merely small).
    """
    beads = state.beads
    n = beads.shape[0]
    if not 0 <= filament_index < n:
        raise ValueError(f"filament_index {filament_index} out of range")
    row = beads[filament_index]
    new_row = row + displacement

    d_inter = 0.0
    if n > 1:
        guard = _separation_guard(state, min_separation)
        others, other_idx = _other_rows(beads, filament_index)
        new_dist = np.abs(others - new_row)
        _check_pair_distances(new_dist, guard, filament_index, other_idx)
        old_dist = np.abs(others - row)
        d_inter = -params.delta * float(np.sum(np.log(new_dist)) - np.sum(np.log(old_dist)))

    d_ang = params.delta * float(np.sum(_abs2(new_row)) - np.sum(_abs2(row)))
    return EnergyBreakdown(0.0, d_inter, d_ang)


def delta_energy_regrow(
    state: SystemState,
    params: SystemParams,
    filament_index: int,
    bead_range: tuple[int, int],
    new_beads: np.ndarray,
    min_separation: float | None = None,
) -> EnergyBreakdown:
    """Energy change for replacing a cyclic window of interior beads.

    bead_range = (start, count): beads start .. start+count-1 (mod M) take the
    values in `new_beads`; the bracketing beads start-1 and start+count stay
    fixed and must not be part of the range (count <= M-2).  Affected kinetic
    segments are exactly the count+1 links touching the window.
    """
    beads = state.beads
    n, m = beads.shape
    start, count = bead_range
    if not 1 <= count <= m - 2:
        raise ValueError(f"regrow window count {count} out of range for M={m}")
    if len(new_beads) != count:
        raise ValueError("new_beads length does not match bead_range count")
    new_beads = np.asarray(new_beads, dtype=np.complex128)

    delta = params.delta
    cols = (start + np.arange(count)) % m
    old = beads[filament_index, cols]

    # Kinetic: path from fixed left boundary through the window to fixed right.
    path_idx = (start - 1 + np.arange(count + 2)) % m
    path_old = beads[filament_index, path_idx]
    path_new = path_old.copy()
    path_new[1:-1] = new_beads
    d_kin = (
        params.alpha
        / (2.0 * delta)
        * float(np.sum(_abs2(np.diff(path_new))) - np.sum(_abs2(np.diff(path_old))))
    )

    d_inter = 0.0
    if n > 1:
        guard = _separation_guard(state, min_separation)
        others, other_idx = _other_rows(beads, filament_index)
        others_cols = others[:, cols]
        new_dist = np.abs(others_cols - new_beads)
        _check_pair_distances(new_dist, guard, filament_index, other_idx)
        old_dist = np.abs(others_cols - old)
        d_inter = -delta * float(np.sum(np.log(new_dist)) - np.sum(np.log(old_dist)))

    d_ang = delta * float(np.sum(_abs2(new_beads)) - np.sum(_abs2(old)))
    return EnergyBreakdown(d_kin, d_inter, d_ang)


def mean_square_position(state: SystemState) -> float:
    """R^2: bead-averaged squared distance from the rotation axis."""
    return float(np.mean(_abs2(state.beads)))


def mean_square_amplitude(state: SystemState) -> float:
    """a^2: bead-averaged squared length of the planar bead-to-bead step (cyclic)."""
    seg = np.roll(state.beads, -1, axis=1) - state.beads
    return float(np.mean(_abs2(seg)))


def mean_slope(state: SystemState, params: SystemParams) -> float:
    """delta/a: how steeply segments climb; +inf for perfectly straight filaments."""
    a2 = mean_square_amplitude(state)
    if a2 == 0.0:
        return math.inf
    return params.delta / math.sqrt(a2)
