"""The search distribution: truncated normal sampling around the current
pattern, plus the score-function term used by the gradient estimate.

Each channel is drawn independently from a one-dimensional normal centered
on the pattern's channel, truncated to [0, 255] via the inverse CDF of the
truncated interval. Inverse-CDF sampling (rather than rejection) keeps the
per-sample cost bounded and makes every candidate a pure function of
(seed, index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import truncnorm

from .errors import ShapeMismatchError
from .seeding import derive_rng
from .texture import CHANNEL_MAX, CHANNEL_MIN, CamouflagePattern


@dataclass(frozen=True)
class SearchDistribution:
    mean: CamouflagePattern
    sigma: float
    popsize: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.popsize < 2:
            raise ValueError(f"population size must be >= 2, got {self.popsize}")


def sample(dist: SearchDistribution, seed: int, index: int) -> CamouflagePattern:
    """Draw candidate ``index`` of the population keyed by ``seed``.

    Deterministic in (seed, index); concurrent sampling of different
    indices is order-independent.
    """
    rng = derive_rng(seed, index)
    mean = dist.mean.channels
    u = rng.random(mean.shape)
    a = (CHANNEL_MIN - mean) / dist.sigma
    b = (CHANNEL_MAX - mean) / dist.sigma
    drawn = truncnorm.ppf(u, a, b, loc=mean, scale=dist.sigma)
    # guard against ppf landing a few ulp outside the interval
    return CamouflagePattern(np.clip(drawn, CHANNEL_MIN, CHANNEL_MAX))


def score_gradient(
    mean: CamouflagePattern, candidate: CamouflagePattern, sigma: float
) -> np.ndarray:
    """Gradient of the log-density at the candidate: (candidate - mean) / sigma^2.

    This is the untruncated-normal score; sampling is truncated but the
    estimator keeps the plain normal score term.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if mean.channels.shape != candidate.channels.shape:
        raise ShapeMismatchError(
            f"pattern shapes differ: {mean.channels.shape} vs {candidate.channels.shape}"
        )
    return (candidate.channels - mean.channels) / (sigma * sigma)
