"""Path-integral Monte Carlo for trapped bundles of nearly parallel vortex filaments.

The package has five parts:

- ``model``: system state, energies, and the incremental (per-move) energy deltas.
- ``sampler``: the Metropolis chain with whole-filament translations and
  bisection (Brownian-bridge) window regrows.
- ``meanfield``: closed-form predictions for the mean square filament position
  and the numeric free-energy oracle they are validated against.
- ``stats``: streaming moments, blocked error bars, and straightness reporting.
- ``config`` / ``harness`` / ``cli``: the beta-sweep driver with CSV/JSONL/manifest
  output, checkpoint/resume, and the command-line front end.
"""

__version__ = "0.1.0"

from .model import (
    EnergyBreakdown,
    SingularityError,
    SystemParams,
    SystemState,
    delta_energy_regrow,
    delta_energy_translate,
    mean_slope,
    mean_square_amplitude,
    mean_square_position,
    total_energy,
)
from .meanfield import (
    beta_turning_point,
    free_energy,
    free_energy_minimizer_numeric,
    gaussian_single_filament_oracle,
    limit_checks,
    r_squared_2d,
    r_squared_3d,
    saddle_eta0,
    spherical_f_finite,
    spherical_f_limit,
)
from .sampler import (
    AcceptanceStats,
    Chain,
    SamplerConfig,
    cumulative_energy_mean,
    equilibration_index,
    initial_state,
    metropolis_accept,
    propose_bisection_regrow,
    propose_translate,
    sweep,
)
from .stats import (
    BlockedError,
    RunningStats,
    StraightnessReport,
    TraceBuffer,
    blocked_error,
    straightness_report,
)
from .config import (
    PRESETS,
    ConfigError,
    RunConfig,
    config_hash,
    config_to_dict,
    load_config,
    parse_config,
)
from .harness import (
    CSV_COLUMNS,
    RunReport,
    derive_seed,
    load_manifest,
    run_sweep,
    snapshot_export,
    snapshot_import,
    write_results_csv,
)
