"""Closed-form predictions for the trapped filament bundle, plus numeric oracles.

The variational/spherical-model treatment of the bead-chain Hamiltonian gives
closed forms for the mean square filament position R^2:

    r_squared_2d : R^2 = N beta / (4 mu)              (straight-filament limit)
    r_squared_3d : R^2 = (beta^2 alpha N
                          + sqrt(beta^4 alpha^2 N^2 + 32 alpha beta mu))
                         / (8 alpha beta mu)

r_squared_3d is the stationary point of the scaled free energy

    F(R^2) = L mu R^2 - (N beta L / 4) log R^2 + L / (2 alpha beta R^2)

(F is dimensionless: it equals beta times the per-filament free energy), and
free_energy_minimizer_numeric recovers it by direct minimization so the algebra
can be validated without trusting the closed form.

The spherical-model side: per filament the partition function reduces to a
saddle over eta > 1 of

    f[eta] = K R^2 (eta - 1) - (1/M) sum_{j=1}^{M-1} log(eta - cos(2 pi j / M))

with stiffness K = alpha beta / delta.  The M -> infinity limit of the sum is
log((eta + sqrt(eta^2 - 1)) / 2); note the -log 2, which drops out of any
R^2 derivative but matters when checking convergence of the sum itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def r_squared_2d(beta: float, mu: float, n_filaments: int) -> float:
    """Mean square position of N straight filaments: N beta / (4 mu)."""
    return n_filaments * beta / (4.0 * mu)


def r_squared_3d(alpha: float, beta: float, mu: float, n_filaments: int) -> float:
    """Mean square position with bending entropy included ("plus" branch).

    The stationarity condition of the free energy is quadratic in R^2; the
    positive branch is the physical one (R^2 > 0 always).
    """
    an = alpha * n_filaments
    b2 = beta * beta
    disc = b2 * b2 * an * an + 32.0 * alpha * beta * mu
    return (b2 * an + math.sqrt(disc)) / (8.0 * alpha * beta * mu)


def beta_turning_point(alpha: float, mu: float, n_filaments: int) -> float:
    """Inverse temperature where dR^2/dbeta changes sign: (4 mu / (alpha N^2))^(1/3).

    Below this point bending entropy expands the bundle as beta decreases.
    """
    return (4.0 * mu / (alpha * n_filaments * n_filaments)) ** (1.0 / 3.0)


def free_energy(
    r2: float, alpha: float, beta: float, mu: float, n_filaments: int, big_l: float
) -> float:
    """Scaled free energy F(R^2); its minimum over R^2 > 0 sits at r_squared_3d."""
    if r2 <= 0.0:
        raise ValueError(f"r2 must be positive, got {r2}")
    return (
        big_l * mu * r2
        - (n_filaments * beta * big_l / 4.0) * math.log(r2)
        + big_l / (2.0 * alpha * beta * r2)
    )


def _golden_section(
    fn: Callable[[float], float], lo: float, hi: float, tol: float
) -> float:
    """Golden-section minimum of a unimodal fn on [lo, hi] to absolute width tol."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = fn(d)
    return 0.5 * (lo + hi)


def free_energy_minimizer_numeric(
    alpha: float,
    beta: float,
    mu: float,
    n_filaments: int,
    big_l: float = 1.0,
    r2_bounds: tuple[float, float] = (1e-12, 1e12),
) -> float:
    """Argmin of free_energy over R^2, found numerically (the formula oracle).

    Golden section over u = log R^2 brackets the minimum; comparison-based
    search alone bottoms out near sqrt(machine eps) relative, so the argmin is
    then polished by sign-bisection on dF/du, which is monotone through the
    minimum (F is strictly convex in u).  big_l is an overall factor of F and
    does not move the argmin.
    """
    lo, hi = (math.log(b) for b in r2_bounds)

    def f_of_u(u: float) -> float:
        return free_energy(math.exp(u), alpha, beta, mu, n_filaments, big_l)

    u0 = _golden_section(f_of_u, lo, hi, tol=1e-12)

    def df_du(u: float) -> float:
        # d/du [mu e^u - (N beta / 4) u + e^-u / (2 alpha beta)], common L dropped
        return mu * math.exp(u) - n_filaments * beta / 4.0 - math.exp(-u) / (2.0 * alpha * beta)

    # Bracket the sign change around the golden-section estimate.
    width = 1e-9
    a, b = u0 - width, u0 + width
    while df_du(a) > 0.0 or df_du(b) < 0.0:
        width *= 4.0
        a, b = u0 - width, u0 + width
        if width > hi - lo:
            raise RuntimeError("failed to bracket the free-energy stationary point")
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if df_du(mid) < 0.0:
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


@dataclass(frozen=True)
class SaddleSolution:
    """Continuum spherical-model saddle for one filament at stiffness K."""

    eta0: float
    k_stiffness: float
    r2: float
    f_value: float


def saddle_eta0(k_stiffness: float, r2: float) -> SaddleSolution:
    """Saddle eta0 = sqrt(1/(K R^2)^2 + 1) and the continuum f[eta0].

    Evaluated through x = 1/(K R^2) so that eta0 - 1 = x^2 / (1 + sqrt(1+x^2))
    and log(eta0 + sqrt(eta0^2 - 1)) = asinh(x) stay accurate for large K.
    """
    if k_stiffness <= 0.0 or r2 <= 0.0:
        raise ValueError("k_stiffness and r2 must be positive")
    x = 1.0 / (k_stiffness * r2)
    eta0_minus_1 = x * x / (1.0 + math.hypot(1.0, x))
    f_value = k_stiffness * r2 * eta0_minus_1 - math.asinh(x)
    return SaddleSolution(1.0 + eta0_minus_1, k_stiffness, r2, f_value)


def spherical_f_finite(eta: float, k_stiffness: float, r2: float, m: int) -> float:
    """Finite-M spherical-model function

    f[eta] = K R^2 (eta - 1) - (1/M) sum_{j=1}^{M-1} log(eta - cos(2 pi j / M)).

    The j = 0 eigenvalue (the in-plane zero mode) is excluded from the sum.
    Requires eta > 1 so every log argument is positive.
    """
    if eta <= 1.0:
        raise ValueError(f"eta must exceed 1, got {eta}")
    if m < 2:
        raise ValueError("m must be at least 2")
    j = np.arange(1, m)
    terms = np.log(eta - np.cos(2.0 * np.pi * j / m))
    return k_stiffness * r2 * (eta - 1.0) - float(np.sum(terms)) / m


def spherical_f_limit(eta: float, k_stiffness: float, r2: float) -> float:
    """M -> infinity limit of spherical_f_finite, with the correct -log 2.

    (2 pi)^-1 Int_0^{2 pi} log(eta - cos w) dw = log((eta + sqrt(eta^2-1)) / 2),
    so the sum term converges to asinh(sqrt(eta^2-1)) - log 2.
    """
    if eta <= 1.0:
        raise ValueError(f"eta must exceed 1, got {eta}")
    se = math.sqrt((eta - 1.0) * (eta + 1.0))
    return k_stiffness * r2 * (eta - 1.0) - (math.asinh(se) - math.log(2.0))


@dataclass(frozen=True)
class LimitReport:
    """Finite-M saddle terms against their M -> infinity limits."""

    m_values: tuple[int, ...]
    energy_terms: tuple[float, ...]  # M * K R^2 (eta0 - 1)
    entropy_terms: tuple[float, ...]  # M * log(eta0 + sqrt(eta0^2 - 1))
    mf_values: tuple[float, ...]  # energy - entropy = M f[eta0]
    energy_limit: float  # L / (2 alpha beta R^2)
    entropy_limit: float  # L / (alpha beta R^2)
    energy_converged: bool  # relative 1e-3 at the largest M
    entropy_converged: bool
    monotone: bool  # |M f - limit| non-increasing beyond M = 2^12


def limit_checks(
    alpha: float,
    beta: float,
    big_l: float,
    r2: float,
    m_values: Sequence[int] | None = None,
) -> LimitReport:
    """Evaluate the per-filament saddle terms at K = alpha beta M / L over a
    ladder of M and compare with the continuum limits

        M * K R^2 (eta0 - 1)              -> L / (2 alpha beta R^2)
        M * log(eta0 + sqrt(eta0^2 - 1))  -> L / (alpha beta R^2)

    so M f[eta0] -> -L / (2 alpha beta R^2).  Uses the same stabilized algebra
    as saddle_eta0 (naive evaluation loses ~4 digits at M = 2^20).
    """
    if m_values is None:
        m_values = [2**p for p in range(10, 21)]
    e_terms, s_terms, mf_vals = [], [], []
    for m in m_values:
        x = big_l / (alpha * beta * m * r2)  # = 1/(K R^2) at this M
        e = m * x / (1.0 + math.hypot(1.0, x))
        s = m * math.asinh(x)
        e_terms.append(e)
        s_terms.append(s)
        mf_vals.append(e - s)
    e_lim = big_l / (2.0 * alpha * beta * r2)
    s_lim = big_l / (alpha * beta * r2)
    errs = [abs(v + e_lim) for v in mf_vals]  # limit of M f is -e_lim
    tail = [err for m, err in zip(m_values, errs) if m >= 4096]
    monotone = all(b <= a * (1.0 + 1e-12) for a, b in zip(tail, tail[1:]))
    return LimitReport(
        m_values=tuple(m_values),
        energy_terms=tuple(e_terms),
        entropy_terms=tuple(s_terms),
        mf_values=tuple(mf_vals),
        energy_limit=e_lim,
        entropy_limit=s_lim,
        energy_converged=abs(e_terms[-1] - e_lim) <= 1e-3 * abs(e_lim),
        entropy_converged=abs(s_terms[-1] - s_lim) <= 1e-3 * abs(s_lim),
        monotone=monotone,
    )


@dataclass(frozen=True)
class GaussianOracle:
    """Exact observables for one non-interacting filament (quadratic weight)."""

    r_squared: float
    a_squared: float
    mode_coefficients: tuple[float, ...]


def gaussian_single_filament_oracle(
    alpha: float, beta: float, mu: float, big_l: float, m: int
) -> GaussianOracle:
    """Exact R^2 and a^2 for N = 1 via independent Fourier modes.

    With theta_j = 2 pi j / M the Gibbs weight factorizes over modes with
    coefficients c_j = (alpha beta / delta)(1 - cos theta_j) + mu delta, giving

        R^2 = (1/M) sum_j 1 / c_j
        a^2 = (1/M) sum_j 2 (1 - cos theta_j) / c_j .
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    delta = big_l / m
    theta = 2.0 * np.pi * np.arange(m) / m
    lam = 1.0 - np.cos(theta)  # ring-Laplacian eigenvalues
    c = (alpha * beta / delta) * lam + mu * delta
    r2 = float(np.mean(1.0 / c))
    a2 = float(np.mean(2.0 * lam / c))
    return GaussianOracle(r2, a2, tuple(float(v) for v in c))
