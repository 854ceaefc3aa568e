"""Acceptance gate: one pass/fail line per contract criterion.

Run with `pytest -v tests/test_acceptance.py`; each test is one criterion
and also prints a [PASS]/[FAIL] line with its wall time against the
runtime budget, which is part of the contract.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import stats as sps

from vortexpimc.config import parse_config
from vortexpimc.harness import run_sweep
from vortexpimc.meanfield import (
    beta_turning_point,
    free_energy_minimizer_numeric,
    gaussian_single_filament_oracle,
    r_squared_2d,
    r_squared_3d,
    spherical_f_finite,
    spherical_f_limit,
)
from vortexpimc.model import (
    SystemParams,
    delta_energy_regrow,
    delta_energy_translate,
    total_energy,
)
from vortexpimc.sampler import (
    Chain,
    SamplerConfig,
    initial_state,
    propose_bisection_regrow,
    propose_translate,
)
from vortexpimc.stats import blocked_error


@contextmanager
def criterion(name: str, budget_seconds: float, already_spent: float = 0.0):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = already_spent + time.perf_counter() - start
    if elapsed > budget_seconds:
        print(f"[FAIL] {name} (runtime {elapsed:.1f}s exceeds {budget_seconds:.0f}s budget)")
        raise AssertionError(f"{name}: runtime {elapsed:.1f}s over budget {budget_seconds:.0f}s")
    print(f"[PASS] {name} ({elapsed:.1f}s of {budget_seconds:.0f}s budget)")


def test_criterion_formula_agreement():
    with criterion("formula agreement: closed form vs numeric minimizer, rel 1e-8", 1.0):
        rng = np.random.default_rng(101)
        filament_counts = (1, 5, 20)
        for trial in range(100):
            alpha = 10.0 ** rng.uniform(2.0, 8.0)
            beta = 10.0 ** rng.uniform(-3.0, 2.0)
            mu = 10.0 ** rng.uniform(0.0, 4.0)
            n = filament_counts[trial % 3]
            closed = r_squared_3d(alpha, beta, mu, n)
            numeric = free_energy_minimizer_numeric(alpha, beta, mu, n)
            assert abs(numeric - closed) <= 1e-8 * closed


def test_criterion_two_dimensional_limit():
    with criterion("2D limit: stiff filaments recover N beta / (4 mu)", 1.0):
        target = 20.0 * 1.0 / (4.0 * 2000.0)
        assert target == 0.0025
        value = r_squared_3d(1e7, 1.0, 2000.0, 20)
        assert abs(value - target) <= 1e-4 * target
        ratios = [r_squared_3d(a, 1.0, 2000.0, 20) / target for a in np.logspace(4, 10, 25)]
        assert all(r > 1.0 for r in ratios)  # 3D entropy only ever adds area
        assert all(b < a for a, b in zip(ratios, ratios[1:]))  # monotone approach
        assert abs(ratios[-1] - 1.0) < 1e-6


def test_criterion_turning_point():
    with criterion("turning point: dR^2/dbeta flips sign at (4 mu/(alpha N^2))^(1/3)", 1.0):
        rng = np.random.default_rng(303)
        for _ in range(20):
            alpha = 10.0 ** rng.uniform(4.0, 9.0)
            mu = 10.0 ** rng.uniform(1.0, 4.0)
            n = int(rng.integers(2, 40))
            beta0 = beta_turning_point(alpha, mu, n)

            def slope(beta: float) -> float:
                h = 1e-5 * beta
                return (r_squared_3d(alpha, beta + h, mu, n)
                        - r_squared_3d(alpha, beta - h, mu, n)) / (2.0 * h)

            assert slope(0.99 * beta0) < 0.0 < slope(1.01 * beta0)


def test_criterion_spherical_convergence():
    with criterion("spherical model: finite-M f converges to the corrected limit", 5.0):
        k_stiffness, r2, eta = 1.0, 1.0, 1.5
        limit = spherical_f_limit(eta, k_stiffness, r2)
        value = spherical_f_finite(eta, k_stiffness, r2, 2 ** 20)
        assert abs(value - limit) <= 1e-5
        errors = [abs(spherical_f_finite(eta, k_stiffness, r2, 2 ** p) - limit)
                  for p in range(15, 21)]
        for coarse, fine in zip(errors, errors[1:]):
            assert coarse / fine == pytest.approx(2.0, rel=0.15)  # O(1/M) decay


EXACT_PARAMS = SystemParams(alpha=1.0, beta=1.0, mu=1.0, big_l=4.0,
                            n_filaments=1, n_segments=4)
EXACT_ORACLE = gaussian_single_filament_oracle(1.0, 1.0, 1.0, 4.0, 4)


@pytest.fixture(scope="module")
def exactness_run():
    """One long chain shared by the exactness and detailed-balance tests."""
    cfg = SamplerConfig(seed=777, sweeps_total=1_000_000, sweeps_burnin=50_000,
                        max_bisection_level=1, translate_radius=0.9, init_side=1.0)
    chain = Chain(EXACT_PARAMS, cfg)
    start = time.perf_counter()
    chain.run_burnin()
    run = chain.run_measurement(cfg.sweeps_total - cfg.sweeps_burnin, snapshot_every=25)
    return run, time.perf_counter() - start


def test_criterion_sampler_exactness(exactness_run):
    run, setup_seconds = exactness_run
    with criterion("sampler exactness: N=1, M=4 chain vs mode-sum oracle", 120.0,
                   already_spent=setup_seconds):
        r2 = blocked_error(run.trace.column("r_squared"))
        assert abs(r2.mean - EXACT_ORACLE.r_squared) <= 3.0 * r2.error
        assert abs(r2.mean - EXACT_ORACLE.r_squared) <= 0.01 * EXACT_ORACLE.r_squared
        a2 = blocked_error(run.trace.column("a_squared"))
        assert abs(a2.mean - EXACT_ORACLE.a_squared) <= 3.0 * a2.error


def _chi_squared_pvalue(samples: np.ndarray, sigma: float, nbins: int = 40) -> float:
    """Equal-probability binned test of samples against N(0, sigma^2)."""
    edges = sigma * sps.norm.ppf(np.linspace(0.0, 1.0, nbins + 1))
    observed, _ = np.histogram(samples, bins=edges)
    expected = np.full(nbins, samples.size / nbins)
    return sps.chisquare(observed, expected).pvalue


def test_detailed_balance_bead_marginals(exactness_run):
    # Every bead coordinate is Gaussian with variance R^2/2 in the exact law.
    run, _ = exactness_run
    beads = run.bead_samples[::4, 0, :]  # thin to every 100th sweep
    sigma = math.sqrt(EXACT_ORACLE.r_squared / 2.0)
    for k in range(4):
        coords = np.concatenate([beads[:, k].real, beads[:, k].imag])
        assert _chi_squared_pvalue(coords, sigma) > 0.01


def test_detailed_balance_mode_marginals(exactness_run):
    # Fourier modes are independent with per-coordinate variance 1/(2 c_q).
    run, _ = exactness_run
    beads = run.bead_samples[::4, 0, :]
    modes = np.fft.fft(beads, axis=1) / 2.0  # unitary for M = 4
    for q, coeff in enumerate(EXACT_ORACLE.mode_coefficients):
        sigma = math.sqrt(1.0 / (2.0 * coeff))
        parts = np.concatenate([modes[:, q].real, modes[:, q].imag])
        assert _chi_squared_pvalue(parts, sigma) > 0.01


def test_criterion_incremental_bookkeeping():
    with criterion("incremental bookkeeping: move deltas and running energy", 60.0):
        params = SystemParams(alpha=1.0, beta=1.0, mu=0.5, big_l=32.0,
                              n_filaments=5, n_segments=32)
        rng = np.random.default_rng(606)
        state = initial_state(params, rng, side=2.0)
        configs = [SamplerConfig(seed=0, sweeps_total=1, sweeps_burnin=0,
                                 max_bisection_level=level, translate_radius=0.5)
                   for level in (1, 2, 3, 4)]
        full = total_energy(state, params)
        for _ in range(100_000):
            if rng.random() < 0.5:
                i, displacement = propose_translate(state, params, configs[0], rng)
                delta = delta_energy_translate(state, params, i, displacement)
                state.beads[i, :] += displacement
            else:
                cfg = configs[rng.integers(0, 4)]
                i, (start, count), new_beads = propose_bisection_regrow(state, params, cfg, rng)
                delta = delta_energy_regrow(state, params, i, (start, count), new_beads)
                idx = (start + np.arange(count)) % params.n_segments
                state.beads[i, idx] = new_beads
            new_full = total_energy(state, params)
            for term in ("kinetic", "interaction", "angular_momentum"):
                recomputed = getattr(new_full, term) - getattr(full, term)
                assert abs(getattr(delta, term) - recomputed) <= 1e-9 * (1.0 + abs(recomputed))
            full = new_full

        # running-energy drift over 10^4 sweeps with resync disabled
        chain = Chain(params, SamplerConfig(seed=11, sweeps_total=10_000, sweeps_burnin=0,
                                            max_bisection_level=4, translate_radius=0.5,
                                            init_side=2.0, resync_interval=10 ** 9))
        chain.run_measurement(10_000)
        fresh = total_energy(chain.state, params)
        for term in ("kinetic", "interaction", "angular_momentum"):
            running, exact = getattr(chain.energy, term), getattr(fresh, term)
            assert abs(running - exact) <= 1e-8 * (1.0 + abs(exact))


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("desk")
    cfg = parse_config({"preset": "desk", "output": {"directory": str(out)},
                        "workers": 4})
    start = time.perf_counter()
    report = run_sweep(cfg)
    return cfg, report, time.perf_counter() - start


def test_criterion_desk_scale_sweep(desk_run):
    cfg, report, setup_seconds = desk_run
    with criterion("desk-scale sweep: banded formula match, slope reversal, straightness",
                   1800.0, already_spent=setup_seconds):
        assert report.ok, report.failures
        with open(report.csv_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        header = lines[0].split(",")
        rows = {float(r[0]): dict(zip(header, map(float, r)))
                for r in (line.split(",") for line in lines[1:])}
        assert set(rows) == {0.001, 0.01, 0.1, 1.0, 10.0}
        assert all(int(row["sweeps_used"]) - 10_000 <= 30_000 for row in rows.values())
        assert cfg.sweeps_total - cfg.sweeps_burnin >= 20_000

        # (a) stiff side of the sweep sits on the 3D formula within 15%
        for beta in (10.0, 1.0):
            row = rows[beta]
            assert abs(row["r2_mc"] - row["r2_formula_3d"]) <= 0.15 * row["r2_formula_3d"]

        # (b) slope reversal: the coldest point has re-expanded off the minimum
        r2_by_beta = {beta: row["r2_mc"] for beta, row in rows.items()}
        assert r2_by_beta[0.001] > min(r2_by_beta.values())
        assert min(r2_by_beta, key=r2_by_beta.get) != 0.001

        # (c) straightness holds everywhere: a/delta < 0.1
        delta = cfg.big_l / cfg.n_segments
        for row in rows.values():
            assert math.sqrt(row["a2_mc"]) / delta < 0.1


def test_criterion_determinism(tmp_path):
    with criterion("determinism: serial and parallel sweeps byte-identical", 300.0):
        base = {
            "physics": {"alpha": 1e7, "mu": 2000.0, "L": 10.0, "N": 10, "M": 64},
            "sweep": {"betas": [1.0, 10.0]},
            "sampler": {"sweeps_total": 1500, "sweeps_burnin": 500,
                        "max_bisection_level": 4, "translate_radius": "auto",
                        "init_side": 0.5},
        }
        serial = parse_config({**base, "output": {"directory": str(tmp_path / "serial")},
                               "workers": 1})
        parallel = parse_config({**base, "output": {"directory": str(tmp_path / "parallel")},
                                 "workers": 2})
        rep_s = run_sweep(serial)
        rep_p = run_sweep(parallel)
        assert rep_s.ok and rep_p.ok
        bytes_s = open(rep_s.csv_path, "rb").read()
        bytes_p = open(rep_p.csv_path, "rb").read()
        assert bytes_s == bytes_p
        assert bytes_s.count(b"\n") == 3  # header + one row per beta
        for name in ("trace-b000.jsonl", "trace-b001.jsonl"):
            assert (tmp_path / "serial" / name).read_bytes() == \
                   (tmp_path / "parallel" / name).read_bytes()
