"""Evolution-strategy optimizer for camouflage patterns.

One step: draw a population of candidates from the truncated-normal search
distribution, score every candidate under every transformation through the
black-box scorer, z-score the transformation-averaged candidate objectives,
weight each candidate's score-function term by its z-score times the
summed cross-entropy shaping, and take a plain gradient step on the mean
pattern (descending in attack mode, ascending in enhance mode).

The candidate-by-transformation evaluation grid is embarrassingly parallel;
gradient accumulation happens afterwards in fixed order, so results do not
depend on evaluation scheduling.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from . import distribution, objective
from .distribution import SearchDistribution
from .errors import IncompleteEvaluationError
from .scene import SceneScorer, Transformation
from .texture import CamouflagePattern, clamp

IMPROVEMENT_TOL = 1e-4  # minimum best-objective gain that resets the stall counter

CURVE_COLUMNS = ["iteration", "objective", "best_objective", "stall_count"]


class Mode(Enum):
    ATTACK = "attack"  # drive detection scores down
    ENHANCE = "enhance"  # opposite reward: drive them up


@dataclass(frozen=True)
class OptimizerConfig:
    transformations: tuple[Transformation, ...]
    mode: Mode = Mode.ATTACK
    alpha: float = 5.0
    sigma: float = 10.0
    popsize: int = 20
    max_iterations: int = 300
    patience: int = 10
    base_seed: int = 0
    max_workers: int | None = None  # None: evaluate serially

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.popsize < 2:
            raise ValueError(f"popsize must be >= 2, got {self.popsize}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if len(self.transformations) == 0:
            raise ValueError("transformation set must be non-empty")
        object.__setattr__(self, "transformations", tuple(self.transformations))


@dataclass(frozen=True)
class HistoryEntry:
    iteration: int
    objective: float
    best_objective: float
    stall_count: int


@dataclass(frozen=True)
class SearchState:
    iteration: int
    current: CamouflagePattern
    current_objective: float
    best: CamouflagePattern
    best_objective: float
    stall_count: int
    history: tuple[HistoryEntry, ...]


@dataclass(frozen=True)
class RunResult:
    best: CamouflagePattern
    best_objective: float
    history: tuple[HistoryEntry, ...]


def _evaluate_grid(
    scorer: SceneScorer,
    patterns: Sequence[CamouflagePattern],
    transformations: Sequence[Transformation],
    max_workers: int | None,
) -> np.ndarray:
    """Mean unpainted-vehicle score for every (pattern, transformation) cell."""
    grid = np.full((len(patterns), len(transformations)), np.nan)

    def cell(k: int, ti: int) -> float:
        scene = scorer.score(patterns[k], transformations[ti])
        return objective.mean_vehicle_score(scene.unpainted_confidences()).value

    jobs = [(k, ti) for k in range(len(patterns)) for ti in range(len(transformations))]
    if max_workers is not None and max_workers > 1 and scorer.concurrent_safe:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            for (k, ti), value in zip(jobs, pool.map(lambda j: cell(*j), jobs)):
                grid[k, ti] = value
    else:
        for k, ti in jobs:
            grid[k, ti] = cell(k, ti)
    return grid


def estimate_gradient(
    dist: SearchDistribution,
    evaluations: np.ndarray,
    candidates: Sequence[CamouflagePattern],
) -> np.ndarray:
    """Normalized gradient estimate of the expected mean score.

    evaluations[k, t] holds the mean score of candidate k under
    transformation t. The estimate is

        (1 / (popsize * n_transforms * sigma^2))
            * sum_t sum_k beta_k * bce_zero(evaluations[k, t]) * (candidate_k - mean)

    with beta the z-scores of the transformation-averaged candidate scores.
    Accumulation runs in fixed (t, k) order for bit-reproducibility.
    """
    evals = np.asarray(evaluations, dtype=np.float64)
    if evals.ndim != 2:
        raise IncompleteEvaluationError(f"evaluation grid must be 2-d, got shape {evals.shape}")
    lam, n_t = evals.shape
    if lam != dist.popsize or lam != len(candidates):
        raise IncompleteEvaluationError(
            f"grid rows ({lam}) must match population ({dist.popsize}) "
            f"and candidates ({len(candidates)})"
        )
    if np.isnan(evals).any():
        k, t = np.argwhere(np.isnan(evals))[0]
        raise IncompleteEvaluationError(f"missing evaluation for candidate {k}, scene {t}")

    beta = objective.standardize(evals.mean(axis=1))
    shaped = objective.bce_zero(evals)  # (lam, n_t)
    weights = beta * shaped.sum(axis=1)  # per-candidate total weight
    offsets = np.stack([c.channels - dist.mean.channels for c in candidates])
    grad = np.tensordot(weights, offsets, axes=1)
    return grad / (lam * n_t * dist.sigma * dist.sigma)


def _initial_state(
    config: OptimizerConfig, scorer: SceneScorer, initial: CamouflagePattern
) -> SearchState:
    evals = _evaluate_grid(scorer, [initial], config.transformations, config.max_workers)
    obj = float(evals.mean())
    return SearchState(
        iteration=0,
        current=initial,
        current_objective=obj,
        best=initial,
        best_objective=obj,
        stall_count=0,
        history=(HistoryEntry(0, obj, obj, 0),),
    )


def step(state: SearchState, config: OptimizerConfig, scorer: SceneScorer) -> SearchState:
    """One optimizer iteration; returns a new state, leaving ``state`` intact."""
    dist = SearchDistribution(mean=state.current, sigma=config.sigma, popsize=config.popsize)
    candidates = [
        distribution.sample(dist, config.base_seed, state.iteration * config.popsize + k)
        for k in range(config.popsize)
    ]
    evals = _evaluate_grid(scorer, candidates, config.transformations, config.max_workers)
    grad = estimate_gradient(dist, evals, candidates)

    sign = -1.0 if config.mode is Mode.ATTACK else 1.0
    updated = clamp(state.current.channels + sign * config.alpha * grad)

    mean_evals = _evaluate_grid(scorer, [updated], config.transformations, config.max_workers)
    obj = float(mean_evals.mean())

    if config.mode is Mode.ATTACK:
        improved_best = obj < state.best_objective
        significant = state.best_objective - obj > IMPROVEMENT_TOL
    else:
        improved_best = obj > state.best_objective
        significant = obj - state.best_objective > IMPROVEMENT_TOL

    best = updated if improved_best else state.best
    best_obj = obj if improved_best else state.best_objective
    stall = 0 if significant else state.stall_count + 1
    iteration = state.iteration + 1
    entry = HistoryEntry(iteration, obj, best_obj, stall)
    return SearchState(
        iteration=iteration,
        current=updated,
        current_objective=obj,
        best=best,
        best_objective=best_obj,
        stall_count=stall,
        history=state.history + (entry,),
    )


def run(
    config: OptimizerConfig, scorer: SceneScorer, initial: CamouflagePattern
) -> RunResult:
    """Iterate until the objective stalls for ``patience`` steps or the
    iteration budget runs out; returns the best-so-far pattern (the
    objective is noisy, so the final iterate is not necessarily the best).
    """
    state = _initial_state(config, scorer, initial)
    while state.iteration < config.max_iterations and state.stall_count < config.patience:
        state = step(state, config, scorer)
    return RunResult(best=state.best, best_objective=state.best_objective, history=state.history)


def write_curve_csv(history: Sequence[HistoryEntry], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for e in history:
            writer.writerow([e.iteration, repr(e.objective), repr(e.best_objective), e.stall_count])
