"""Streaming statistics, blocked error bars, and straightness reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import SystemParams


@dataclass
class RunningStats:
    """Welford running mean/variance; mergeable for parallel accumulation."""

    count: int = 0
    mean: float = 0.0
    m2: float = field(default=0.0, repr=False)

    def push(self, sample: float) -> "RunningStats":
        if not math.isfinite(sample):
            raise ValueError(f"non-finite sample: {sample}")
        self.count += 1
        d = sample - self.mean
        self.mean += d / self.count
        self.m2 += d * (sample - self.mean)
        return self

    def merge(self, other: "RunningStats") -> "RunningStats":
        """Combine two accumulators as if their streams were concatenated."""
        if other.count == 0:
            return RunningStats(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningStats(other.count, other.mean, other.m2)
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self) -> float:
        """Sample variance (ddof = 1); zero until two samples arrive."""
        if self.count < 2:
            return 0.0
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> float:
        if self.count < 1:
            return 0.0
        return math.sqrt(self.variance / self.count)


class TraceBuffer:
    """Columnar per-sweep measurement record with preallocated storage."""

    FLOAT_COLUMNS = ("r_squared", "a_squared", "kinetic", "interaction", "angular_momentum")
    INT_COLUMNS = (
        "sweep_index",
        "proposed_translate",
        "accepted_translate",
        "proposed_regrow",
        "accepted_regrow",
    )

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self._n = 0
        self._f = {c: np.empty(capacity, dtype=np.float64) for c in self.FLOAT_COLUMNS}
        self._i = {c: np.empty(capacity, dtype=np.int64) for c in self.INT_COLUMNS}

    def __len__(self) -> int:
        return self._n

    def record(
        self,
        sweep_index: int,
        r_squared: float,
        a_squared: float,
        kinetic: float,
        interaction: float,
        angular_momentum: float,
        acceptance_snapshot: tuple[int, int, int, int],
    ):
        """acceptance_snapshot = cumulative (proposed_t, accepted_t, proposed_r, accepted_r)."""
        if r_squared < 0.0 or a_squared < 0.0 or kinetic < 0.0:
            raise ValueError("r_squared, a_squared and kinetic must be nonnegative")
        j = self._n
        if j >= self._f["r_squared"].size:
            raise IndexError("trace buffer full")
        self._f["r_squared"][j] = r_squared
        self._f["a_squared"][j] = a_squared
        self._f["kinetic"][j] = kinetic
        self._f["interaction"][j] = interaction
        self._f["angular_momentum"][j] = angular_momentum
        self._i["sweep_index"][j] = sweep_index
        pt, at, pr, ar = acceptance_snapshot
        self._i["proposed_translate"][j] = pt
        self._i["accepted_translate"][j] = at
        self._i["proposed_regrow"][j] = pr
        self._i["accepted_regrow"][j] = ar
        self._n = j + 1

    def column(self, name: str) -> np.ndarray:
        store = self._f if name in self._f else self._i
        return store[name][: self._n]

    def weighted_energy(self, params: SystemParams) -> np.ndarray:
        """Per-sweep H + (mu/beta) I, the equilibration diagnostic."""
        return (
            self.column("kinetic")
            + self.column("interaction")
            + (params.mu / params.beta) * self.column("angular_momentum")
        )


@dataclass(frozen=True)
class BlockedError:
    """Standard error of the mean versus block size (Flyvbjerg-Petersen binning)."""

    block_sizes: tuple[int, ...]
    errors: tuple[float, ...]
    error: float  # plateau: largest block size that still has >= min_blocks blocks
    mean: float
    n_samples: int


def blocked_error(
    samples: Sequence[float] | np.ndarray,
    block_sizes: Sequence[int] | None = None,
    min_blocks: int = 16,
) -> BlockedError:
    """Blocked error bars for an autocorrelated stream.

    For each block size b the stream is cut into n//b contiguous blocks; the
    naive standard error of the block means converges (grows) to the true
    error of the mean once b exceeds the correlation time.  The reported
    error is the value at the largest block size keeping >= min_blocks blocks.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    n = x.size
    if n < min_blocks:
        raise ValueError(f"need at least {min_blocks} samples, got {n}")
    if block_sizes is None:
        block_sizes = []
        b = 1
        while n // b >= min_blocks:
            block_sizes.append(b)
            b *= 2
    errors = []
    for b in block_sizes:
        nb = n // b
        if nb < 2:
            raise ValueError(f"block size {b} leaves fewer than 2 blocks")
        means = x[: nb * b].reshape(nb, b).mean(axis=1)
        errors.append(float(np.std(means, ddof=1) / math.sqrt(nb)))
    plateau = max((b for b in block_sizes if n // b >= min_blocks), default=block_sizes[-1])
    return BlockedError(
        block_sizes=tuple(block_sizes),
        errors=tuple(errors),
        error=errors[block_sizes.index(plateau)],
        mean=float(np.mean(x)),
        n_samples=n,
    )


@dataclass(frozen=True)
class StraightnessReport:
    """Is the bead-to-bead planar step small against the axial spacing?"""

    mean_amplitude: float  # a = sqrt(<a^2>)
    ratio: float  # a / delta
    mean_slope: float  # delta / a; +inf for perfectly straight filaments
    mean_angle_degrees: float  # atan(delta/a): 90 deg means vertical segments
    violated: bool  # a >= threshold * delta: discretization too coarse
    threshold: float


def straightness_report(
    a_squared_samples: Sequence[float] | np.ndarray,
    params: SystemParams,
    threshold: float = 0.1,
) -> StraightnessReport:
    """Summarize trace a^2 samples against the near-parallel assumption."""
    a2 = float(np.mean(np.asarray(a_squared_samples, dtype=np.float64)))
    if a2 < 0.0:
        raise ValueError("a^2 samples must be nonnegative")
    a = math.sqrt(a2)
    delta = params.delta
    slope = math.inf if a == 0.0 else delta / a
    angle = 90.0 if a == 0.0 else math.degrees(math.atan(slope))
    return StraightnessReport(
        mean_amplitude=a,
        ratio=a / delta,
        mean_slope=slope,
        mean_angle_degrees=angle,
        violated=a >= threshold * delta,
        threshold=threshold,
    )
