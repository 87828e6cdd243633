"""Figure rendering for run artifacts.

Every CSV the CLI writes gets a matplotlib rendering next to it: the
optimization curve, the baseline comparison bars, and a preview of the
pattern itself. Rendering uses the Agg backend so runs work headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evolve import HistoryEntry, Mode
from .metrics import EvalReport
from .texture import CamouflagePattern


def render_curve(history: Sequence[HistoryEntry], mode: Mode, path: str | Path) -> None:
    iterations = [e.iteration for e in history]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(iterations, [e.objective for e in history], lw=1.2, label="objective")
    ax.plot(
        iterations,
        [e.best_objective for e in history],
        lw=1.2,
        ls="--",
        label="best so far",
    )
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean detection score of unpainted vehicles")
    ax.set_title(f"{mode.value} run")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_comparison(reports: Sequence[EvalReport], path: str | Path) -> None:
    labels = [r.camouflage_label for r in reports]
    metrics = {
        "Detection confidence(%)": [r.detection_confidence for r in reports],
        "mIOU(%)": [r.miou for r in reports],
        "P@0.5(%)": [r.p_at_05 for r in reports],
    }
    x = np.arange(len(labels))
    width = 0.25
    fig, ax = plt.subplots(figsize=(7.5, 4.5))
    for i, (name, values) in enumerate(metrics.items()):
        ax.bar(x + (i - 1) * width, values, width, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("percent")
    ax.set_ylim(0, 100)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_pattern(pattern: CamouflagePattern, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(pattern.quantized(), interpolation="nearest")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
