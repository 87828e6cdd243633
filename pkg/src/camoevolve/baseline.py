"""Baseline camouflage generators and the comparison protocol.

Two baseline rows: six real vehicle colors and five seeded random
camouflages. Row metrics are means of per-pattern reports, not pooled
images, and every pattern is evaluated on the identical transformation set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import EvalReport, aggregate, score_image
from .scene import SceneScorer, Split, Transformation
from .seeding import derive_seed
from .texture import CamouflagePattern, new_random, solid

BASIC_COLORS: dict[str, tuple[float, float, float]] = {
    "red": (255, 0, 0),
    "black": (0, 0, 0),
    "silver": (192, 192, 192),
    "grey": (128, 128, 128),
    "blue": (0, 0, 255),
    "white": (255, 255, 255),
}
NUM_RANDOM = 5


@dataclass(frozen=True)
class BaselineSuite:
    basic_colors: dict[str, CamouflagePattern]
    random_patterns: tuple[CamouflagePattern, ...]


def build_suite(width: int, height: int, seed: int) -> BaselineSuite:
    solids = {name: solid(width, height, rgb) for name, rgb in BASIC_COLORS.items()}
    randoms = tuple(
        new_random(width, height, derive_seed(seed, i)) for i in range(NUM_RANDOM)
    )
    return BaselineSuite(basic_colors=solids, random_patterns=randoms)


def evaluate_pattern(
    pattern: CamouflagePattern,
    scorer: SceneScorer,
    transformations: Sequence[Transformation],
    split: Split,
    label: str,
) -> EvalReport:
    per_image = [score_image(scorer.score(pattern, t)) for t in transformations]
    return aggregate(per_image, split, label)


def _mean_report(reports: Sequence[EvalReport], split: Split, label: str) -> EvalReport:
    return EvalReport(
        detection_confidence=float(np.mean([r.detection_confidence for r in reports])),
        miou=float(np.mean([r.miou for r in reports])),
        p_at_05=float(np.mean([r.p_at_05 for r in reports])),
        split=split,
        camouflage_label=label,
        image_count=reports[0].image_count,
    )


def evaluate_all(
    suite: BaselineSuite,
    scorer: SceneScorer,
    grid: Sequence[Transformation],
    split: Split,
    learned: CamouflagePattern | None = None,
) -> list[EvalReport]:
    """Comparison rows for one split: basic colors, random, and optionally
    the learned pattern ("ours")."""
    transforms = [t for t in grid if t.split is split]
    color_reports = [
        evaluate_pattern(p, scorer, transforms, split, name)
        for name, p in suite.basic_colors.items()
    ]
    random_reports = [
        evaluate_pattern(p, scorer, transforms, split, f"random-{i}")
        for i, p in enumerate(suite.random_patterns)
    ]
    rows = [
        _mean_report(color_reports, split, "basic-colors"),
        _mean_report(random_reports, split, "random"),
    ]
    if learned is not None:
        rows.append(evaluate_pattern(learned, scorer, transforms, split, "ours"))
    return rows
