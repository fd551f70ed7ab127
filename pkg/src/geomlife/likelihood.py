"""Conditional likelihood for truncated/censored units, plus a numerical maximizer.

Conditioning on observability makes each unit's contribution free of the
truncation-age distribution:

    L(theta) = 1                                          if x <= t (never seen)
             = theta^{1{x <= t+s}} * (1-theta)^{min(x-1, t+s) - t}   otherwise

The sample log-likelihood collapses to counts:  m_uncens * log(theta) +
(R - m_uncens) * log(1 - theta).  ``grid_argmax`` maximizes it numerically
(grid scan + golden-section refinement) and serves as an independent check
on the closed-form estimator; it never uses the m_uncens / R formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimator import NoRiskTimeError, SufficientStats
from .model import THETA_EPS, LatentUnit, StudyDesign, check_theta

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LogLikProfile:
    """Grid of theta values, log-likelihood values, and the refined argmax."""

    grid: np.ndarray
    values: np.ndarray
    argmax_theta: float


def likelihood_contribution(unit: LatentUnit, design: StudyDesign, theta: float) -> float:
    """Conditional likelihood contribution of one latent unit."""
    check_theta(theta)
    x, t, s = unit.x, unit.t, design.s
    if x <= t:
        return 1.0
    event = 1 if x <= t + s else 0
    exponent = min(x - 1, t + s) - t
    return theta**event * (1.0 - theta) ** exponent


def _xlogy(count: float, p: float) -> float:
    """count * log(p) with the 0 * log(0) = 0 convention."""
    if count == 0:
        return 0.0
    if p == 0.0:
        return -math.inf
    return count * math.log(p)


def conditional_loglik(stats: SufficientStats, theta: float) -> float:
    """m_uncens * log(theta) + (R - m_uncens) * log(1 - theta).

    Returns -inf (not an exception) at theta in {0, 1} when the
    corresponding count is positive.
    """
    check_theta(theta)
    R = stats.risk_time
    return _xlogy(stats.m_uncens, theta) + _xlogy(R - stats.m_uncens, 1.0 - theta)


def _golden_section_max(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Maximize a unimodal f on [lo, hi] to within tol."""
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_argmax(
    stats: SufficientStats,
    resolution: int = 2001,
    eps: float = THETA_EPS,
) -> LogLikProfile:
    """Numerically maximize the conditional log-likelihood over [eps, 1-eps].

    A uniform grid of ``resolution`` points locates the mode; golden-section
    search on the bracketing interval refines it to ~1e-9.
    """
    if resolution < 1000:
        raise ValueError(f"resolution must be >= 1000, got {resolution}")
    if stats.risk_time == 0:
        raise NoRiskTimeError("no observed risk time; log-likelihood is flat")
    grid = np.linspace(eps, 1.0 - eps, resolution)
    values = np.array([conditional_loglik(stats, th) for th in grid])
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, resolution - 1)]
    argmax_theta = _golden_section_max(lambda th: conditional_loglik(stats, th), lo, hi)
    return LogLikProfile(grid=grid, values=values, argmax_theta=argmax_theta)
