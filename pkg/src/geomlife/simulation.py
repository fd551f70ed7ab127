"""Monte Carlo engine: consistency (MSE), CI coverage, CLT shape checks.

Replicates are independent: replicate ``k`` draws its rng from
``SeedSequence(seed, spawn_key=(k,))``, so results are bit-identical
whatever the execution order or degree of parallelism.  Degenerate
replicates (no observed units or no observed failures) enter the MSE with
theta_hat = 0 but are excluded from coverage denominators; their count is
reported.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps

from .estimator import EstimateResult, SufficientStats, estimate
from .model import StudyDesign, TruncationDist, check_theta, observe_arrays, sample_units

#: Environment variable giving the default worker-process count.
WORKERS_ENV_VAR = "GEOMLIFE_WORKERS"


@dataclass(frozen=True)
class SimConfig:
    theta0: float
    design: StudyDesign
    tdist: TruncationDist
    n: int
    n_replicates: int
    seed: int
    level: float = 0.95

    def __post_init__(self):
        check_theta(self.theta0)
        if self.n < 1 or self.n_replicates < 1:
            raise ValueError("n and n_replicates must be >= 1")
        if self.tdist.G != self.design.G:
            raise ValueError(
                f"truncation pmf has {self.tdist.G} entries but design has G={self.design.G}"
            )


@dataclass(frozen=True)
class StudyReport:
    """Per-replicate estimates and the summary statistics built from them."""

    n: int
    n_replicates: int
    theta0: float
    level: float
    theta_hats: np.ndarray
    mse: float
    coverage: float
    standardized: np.ndarray
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    sigma_pb_sq: float
    asymptotic_n_var: float
    degenerate_count: int

    def to_row(self) -> dict:
        """Flat record matching the study output schema."""
        return {
            "n": self.n,
            "K": self.n_replicates,
            "theta0": self.theta0,
            "mse": self.mse,
            "n_times_mse": self.n * self.mse,
            "asymptotic_n_var": self.asymptotic_n_var,
            "coverage": self.coverage,
            "ks_distance": self.ks_distance,
            "degenerate_count": self.degenerate_count,
        }


def asymptotic_variance(
    theta0: float, design: StudyDesign, tdist: TruncationDist
) -> tuple[float, float]:
    """Analytic (sigma_pb_sq, limit of n * Var(theta_hat)).

    The expected per-unit observed risk time over ages x = 1..s+G-1 is

        sum_x E[y_tc_prev(x)] = sum_t pmf(t) * sum_{k=1}^{s} (1-theta)^{t+k-1},

    a finite geometric sum; sigma_pb_sq is that divided by theta*(1-theta),
    and its reciprocal is the variance limit.
    """
    check_theta(theta0)
    if theta0 in (0.0, 1.0):
        raise ValueError("asymptotic variance undefined at the boundary")
    if tdist.G != design.G:
        raise ValueError("truncation pmf and design disagree on G")
    q = 1.0 - theta0
    window_sum = (1.0 - q**design.s) / theta0
    ages = np.arange(design.G)
    expected_risk = window_sum * float(np.dot(tdist.pmf, q**ages))
    sigma_pb_sq = expected_risk / (theta0 * q)
    return sigma_pb_sq, 1.0 / sigma_pb_sq


def expected_risk_profile(
    theta0: float, design: StudyDesign, tdist: TruncationDist
) -> np.ndarray:
    """E[y_tc_prev(x)] for x = 1..horizon: sum_t pmf(t) 1{t < x <= t+s} q^(x-1)."""
    q = 1.0 - theta0
    ages = np.arange(1, design.horizon + 1)
    t = np.arange(design.G)[:, None]
    at_risk = (t < ages) & (ages <= t + design.s)
    return np.asarray((tdist.pmf[:, None] * at_risk * q ** (ages - 1)).sum(axis=0))


def _replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate_index,)))


def replicate_stats(config: SimConfig, replicate_index: int) -> SufficientStats:
    """Draw one latent sample, observe it, and aggregate to sufficient stats."""
    rng = _replicate_rng(config.seed, replicate_index)
    x, t = sample_units(config.theta0, config.tdist, config.n, rng)
    observed, censored, d = observe_arrays(x, t, config.design)
    uncens = observed & ~censored
    m_uncens = int(uncens.sum())
    m_cens = int(censored.sum())
    return SufficientStats(
        m=m_uncens + m_cens,
        m_uncens=m_uncens,
        m_cens=m_cens,
        duration_sum=int(d[uncens].sum()),
        s=config.design.s,
    )


def run_replicate(config: SimConfig, replicate_index: int) -> EstimateResult | None:
    """Estimate from one simulated replicate; None if nothing was observed."""
    stats = replicate_stats(config, replicate_index)
    if stats.risk_time == 0:
        return None
    return estimate(stats, config.level)


def _replicate_row(args) -> tuple[int, float, float, float, bool]:
    config, k = args
    result = run_replicate(config, k)
    if result is None:
        return k, 0.0, 0.0, 0.0, True
    return k, result.theta_hat, result.ci[0], result.ci[1], result.degenerate


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _collect_replicates(config: SimConfig, workers: int) -> np.ndarray:
    """(K, 4) array of [theta_hat, ci_lo, ci_hi, degenerate] in replicate order."""
    jobs = [(config, k) for k in range(config.n_replicates)]
    out = np.empty((config.n_replicates, 4))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = pool.map(_replicate_row, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
            for k, th, lo, hi, degen in rows:
                out[k] = (th, lo, hi, degen)
    else:
        for job in jobs:
            k, th, lo, hi, degen = _replicate_row(job)
            out[k] = (th, lo, hi, degen)
    return out


def run_study(config: SimConfig, workers: int | None = None) -> StudyReport:
    """Run all replicates and summarize MSE, coverage, and CLT shape."""
    workers = default_workers() if workers is None else workers
    rows = _collect_replicates(config, workers)
    theta_hats, ci_lo, ci_hi = rows[:, 0], rows[:, 1], rows[:, 2]
    degenerate = rows[:, 3].astype(bool)

    errors = theta_hats - config.theta0
    mse = float(np.mean(errors**2))

    valid = ~degenerate
    if valid.any():
        covered = (ci_lo[valid] <= config.theta0) & (config.theta0 <= ci_hi[valid])
        coverage = float(covered.mean())
    else:
        coverage = float("nan")

    sigma_pb_sq, n_var = asymptotic_variance(config.theta0, config.design, config.tdist)
    standardized = np.sqrt(config.n) * errors * np.sqrt(sigma_pb_sq)
    if config.n_replicates >= 2 and np.ptp(standardized) > 0.0:
        variance = float(np.var(standardized, ddof=1))
        ks = float(sps.kstest(standardized, "norm").statistic)
        skewness = float(sps.skew(standardized))
        kurt = float(sps.kurtosis(standardized))
    else:
        variance, ks, skewness, kurt = float("nan"), float("nan"), float("nan"), float("nan")

    return StudyReport(
        n=config.n,
        n_replicates=config.n_replicates,
        theta0=config.theta0,
        level=config.level,
        theta_hats=theta_hats,
        mse=mse,
        coverage=coverage,
        standardized=standardized,
        mean=float(np.mean(standardized)),
        variance=variance,
        skewness=skewness,
        excess_kurtosis=kurt,
        ks_distance=ks,
        sigma_pb_sq=sigma_pb_sq,
        asymptotic_n_var=n_var,
        degenerate_count=int(degenerate.sum()),
    )


def mse_study(
    config: SimConfig, n_list: list[int], workers: int | None = None
) -> list[tuple[int, float]]:
    """Simulated mean squared error of theta_hat for each latent sample size."""
    if not n_list:
        raise ValueError("n_list must be nonempty")
    return [(n, run_study(replace(config, n=n), workers).mse) for n in n_list]


def coverage_study(config: SimConfig, workers: int | None = None) -> float:
    """Fraction of replicate Wald intervals containing theta0."""
    return run_study(config, workers).coverage


def clt_check(config: SimConfig, workers: int | None = None) -> StudyReport:
    """Moments and KS distance of sqrt(n)(theta_hat - theta0) * sigma_pb."""
    return run_study(config, workers)


def martingale_diagnostics(config: SimConfig) -> dict:
    """Age-by-age residual means over one large simulated sample.

    For each age x: the mean of dm_tc(x) across units with its Monte Carlo
    standard error, the count at risk, and the event frequency among units
    at risk.  Uses replicate index 0 of the config's seed.
    """
    rng = _replicate_rng(config.seed, 0)
    x, t = sample_units(config.theta0, config.tdist, config.n, rng)
    horizon = config.design.horizon
    s = config.design.s
    n = config.n

    ages = np.arange(1, horizon + 1)
    dm_mean = np.empty(horizon)
    dm_se = np.empty(horizon)
    at_risk = np.empty(horizon, dtype=np.int64)
    events = np.empty(horizon, dtype=np.int64)
    for i, age in enumerate(ages):
        dn = (t < age) & (age <= t + s) & (x == age)
        y = (t < age) & (age <= np.minimum(x, t + s))
        dm = dn - config.theta0 * y
        dm_mean[i] = dm.mean()
        dm_se[i] = dm.std(ddof=1) / np.sqrt(n)
        at_risk[i] = y.sum()
        events[i] = dn.sum()

    with np.errstate(invalid="ignore"):
        event_freq = np.where(at_risk > 0, events / at_risk, np.nan)
    return {
        "ages": ages,
        "dm_mean": dm_mean,
        "dm_se": dm_se,
        "at_risk": at_risk,
        "events": events,
        "event_freq": event_freq,
        "empirical_risk": at_risk / n,
    }
