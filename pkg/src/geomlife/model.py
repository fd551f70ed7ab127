"""Geometric lifespan model with left truncation and right censoring.

A unit (an enterprise, say) lives an integer number of years ``x >= 1``
drawn from a geometric distribution with annual closure probability
``theta``.  Its age one year before the observation window opens is
``t in {0, ..., G-1}``, drawn independently from a truncation-age
distribution.  The unit enters the panel only if it is still alive when
observation starts (``x >= t + 1``); otherwise it is left-truncated and
leaves no record at all.  Units alive after the ``s``-year window are
right-censored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Default half-width trimmed off the parameter space [eps, 1 - eps].
THETA_EPS = 1e-6


def check_theta(theta: float, eps: float = 0.0) -> float:
    """Validate a closure probability, optionally against [eps, 1 - eps]."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if eps and not eps <= theta <= 1.0 - eps:
        raise ValueError(f"theta must lie in [{eps}, {1.0 - eps}], got {theta}")
    return theta


@dataclass(frozen=True)
class StudyDesign:
    """Observation-window length ``s``, cohort count ``G``, path horizon.

    ``horizon`` bounds the age index of per-unit path vectors; the default
    ``s + G - 1`` covers every age at which an observable unit can be seen
    at risk or fail.  It does not limit sampled lifespans.
    """

    s: int
    G: int
    horizon: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"window length s must be >= 1, got {self.s}")
        if self.G < 1:
            raise ValueError(f"cohort count G must be >= 1, got {self.G}")
        if self.horizon == 0:
            object.__setattr__(self, "horizon", self.s + self.G - 1)
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")


@dataclass(frozen=True)
class TruncationDist:
    """Distribution of the truncation age on support {0, ..., G-1}."""

    pmf: np.ndarray

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        object.__setattr__(self, "pmf", pmf)
        if pmf.ndim != 1 or pmf.size < 1:
            raise ValueError("truncation pmf must be a non-empty 1-d vector")
        if np.any(pmf < 0.0):
            raise ValueError("truncation pmf entries must be nonnegative")
        if abs(pmf.sum() - 1.0) > 1e-12:
            raise ValueError(f"truncation pmf must sum to 1, got {pmf.sum()!r}")
        object.__setattr__(self, "_cdf", np.cumsum(pmf))

    @property
    def G(self) -> int:
        return self.pmf.size

    @classmethod
    def uniform(cls, G: int) -> "TruncationDist":
        if G < 1:
            raise ValueError("G must be >= 1")
        return cls(np.full(G, 1.0 / G))

    @classmethod
    def point_mass(cls, t: int, G: int) -> "TruncationDist":
        if not 0 <= t <= G - 1:
            raise ValueError(f"point mass at {t} outside support 0..{G - 1}")
        pmf = np.zeros(G)
        pmf[t] = 1.0
        return cls(pmf)


@dataclass(frozen=True)
class LatentUnit:
    """A latent draw: lifespan ``x`` and truncation age ``t``."""

    x: int
    t: int

    def __post_init__(self):
        if self.x < 1:
            raise ValueError(f"lifespan x must be >= 1, got {self.x}")
        if self.t < 0:
            raise ValueError(f"truncation age t must be >= 0, got {self.t}")


@dataclass(frozen=True)
class ObservedUnit:
    """What the panel records for a unit that survived into the window.

    ``d`` is the duration in study: the failure year counted from
    observation start for an uncensored unit, or the full window length
    ``s`` for a censored one.
    """

    t_obs: int
    d: int
    censored: bool


def geom_pmf(theta: float, x) -> float:
    """P(X = x) = theta * (1 - theta)^(x-1) for integer lifespans x >= 1."""
    check_theta(theta)
    x = np.asarray(x)
    if np.any(x < 1):
        raise ValueError("lifespan x must be >= 1")
    out = theta * (1.0 - theta) ** (x - 1)
    return float(out) if out.ndim == 0 else out


def geom_survival(theta: float, x) -> float:
    """P(X >= x+1) = (1 - theta)^x for integer ages x >= 0."""
    check_theta(theta)
    x = np.asarray(x)
    if np.any(x < 0):
        raise ValueError("age x must be >= 0")
    out = (1.0 - theta) ** x
    return float(out) if out.ndim == 0 else out


def life_expectancy(theta: float) -> float:
    """Mean lifespan 1/theta of the geometric distribution on {1, 2, ...}."""
    check_theta(theta)
    if theta == 0.0:
        raise ValueError("life expectancy is undefined at theta = 0")
    return 1.0 / theta


def sample_units(
    theta: float,
    tdist: TruncationDist,
    n: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` latent (x, t) pairs as integer arrays.

    Lifespans come from the inverse CDF ``x = ceil(log(1-u) / log(1-theta))``
    applied to one block of uniforms, truncation ages from a second block,
    so a single rng stream yields a reproducible sample of any size.
    """
    check_theta(theta, eps=THETA_EPS)
    if n < 0:
        raise ValueError("sample size must be >= 0")
    u_x = rng.random(n)
    u_t = rng.random(n)
    x = np.ceil(np.log1p(-u_x) / math.log1p(-theta)).astype(np.int64)
    np.maximum(x, 1, out=x)
    t = np.searchsorted(tdist._cdf, u_t, side="right").astype(np.int64)
    np.minimum(t, tdist.G - 1, out=t)
    return x, t


def sample_unit(theta: float, tdist: TruncationDist, rng: np.random.Generator) -> LatentUnit:
    """Draw a single latent unit (see :func:`sample_units`)."""
    x, t = sample_units(theta, tdist, 1, rng)
    return LatentUnit(x=int(x[0]), t=int(t[0]))


def observe(unit: LatentUnit, design: StudyDesign) -> ObservedUnit | None:
    """Apply the truncation/censoring scheme to a latent unit.

    Returns ``None`` for a unit that failed before observation began
    (``x <= t``); otherwise the recorded triple.  The mapping is
    deterministic and uses nothing about the unit before age ``t``.
    """
    if unit.t > design.G - 1:
        raise ValueError(f"truncation age {unit.t} outside cohort support 0..{design.G - 1}")
    if unit.x <= unit.t:
        return None
    censored = unit.x > unit.t + design.s
    d = min(unit.x, unit.t + design.s) - unit.t
    return ObservedUnit(t_obs=unit.t, d=d, censored=censored)


def observe_arrays(
    x: np.ndarray, t: np.ndarray, design: StudyDesign
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`observe`: masks (observed, censored) and durations.

    ``d`` is only meaningful where ``observed`` is True.  Element-wise
    identical to observe() applied unit by unit.
    """
    observed = x > t
    censored = observed & (x > t + design.s)
    d = np.minimum(x, t + design.s) - t
    return observed, censored, d


def observation_probability(theta: float, tdist: TruncationDist) -> float:
    """P(unit enters the panel) = sum_t pmf(t) * (1 - theta)^t."""
    check_theta(theta)
    ages = np.arange(tdist.G)
    return float(np.dot(tdist.pmf, (1.0 - theta) ** ages))
