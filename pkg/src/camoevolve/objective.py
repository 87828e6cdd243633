"""Score aggregation and shaping.

Three small pieces sit between raw detector confidences and the gradient
estimate: the per-scene mean score, the cross-entropy-to-zero shaping loss,
and the z-scoring of candidate scores across the population.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InsufficientPopulationError

BCE_EPS = 1e-6  # keeps the loss finite when a detector reports exactly 1.0
NO_DETECTION_SCORE = 0.0  # convention: an empty scene counts as full attack success


class MeanScore(NamedTuple):
    value: float
    no_detection: bool


def mean_vehicle_score(
    scores: Sequence[float], no_detection_score: float = NO_DETECTION_SCORE
) -> MeanScore:
    """Mean confidence over the scene's unpainted vehicles.

    An empty list means nothing was detected; the configured no-detection
    score is returned with the flag set so reports can count such scenes.
    """
    if len(scores) == 0:
        return MeanScore(no_detection_score, True)
    arr = np.asarray(scores, dtype=np.float64)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError(f"scores must lie in [0, 1], got range [{arr.min()}, {arr.max()}]")
    return MeanScore(float(arr.mean()), False)


def bce_zero(s):
    """Binary cross-entropy against the zero target: -log(1 - s).

    Accepts a scalar or an array; values are clipped at 1 - 1e-6 so the
    loss stays finite at s = 1.
    """
    arr = np.asarray(s, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"score outside [0, 1]: {arr[(arr < 0) | (arr > 1)].ravel()[0]}")
    out = -np.log1p(-np.minimum(arr, 1.0 - BCE_EPS))
    return float(out) if np.isscalar(s) or arr.ndim == 0 else out


def standardize(mean_scores: Sequence[float]) -> np.ndarray:
    """Z-score candidate objectives across the population.

    Uses the sample standard deviation (n-1 denominator). A zero-variance
    population maps to all zeros, which makes the optimizer take a null step.
    """
    arr = np.asarray(mean_scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise InsufficientPopulationError(
            f"standardization needs at least 2 scores, got {arr.size}"
        )
    # all-equal counts as zero variance even when mean-subtraction rounding
    # would make np.std return a few ulp instead of exactly 0
    if np.all(arr == arr[0]):
        return np.zeros_like(arr)
    std = arr.std(ddof=1)
    if std == 0.0:
        return np.zeros_like(arr)
    z = (arr - arr.mean()) / std
    return z - z.mean()  # strip rounding residue so the output sums to 0
