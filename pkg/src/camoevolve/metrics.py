"""Detection evaluation metrics: IoU, per-image best IoU, and the three
report columns (detection confidence, mIoU, P@0.5).

P@0.5 counts images whose best IoU strictly exceeds 0.5.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyEvaluationError, InvalidBoxError, NoGroundTruthError
from .objective import mean_vehicle_score
from .scene import Box, SceneScore, Split

# CSV headers mirror the published table layout
CSV_COLUMNS = ["Camouflages", "Split", "Detection confidence(%)", "mIOU(%)", "P@0.5(%)", "Images"]


@dataclass(frozen=True)
class EvalReport:
    detection_confidence: float  # percent
    miou: float  # percent
    p_at_05: float  # percent
    split: Split
    camouflage_label: str
    image_count: int

    def __post_init__(self):
        for name in ("detection_confidence", "miou", "p_at_05"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name} must be a percentage in [0, 100], got {v}")
        if self.image_count < 1:
            raise ValueError("image_count must be >= 1")


def iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    if a.x_max <= a.x_min or a.y_max <= a.y_min:
        raise InvalidBoxError(f"degenerate box {a}")
    if b.x_max <= b.x_min or b.y_max <= b.y_min:
        raise InvalidBoxError(f"degenerate box {b}")
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def image_iou(predictions: Sequence[Box], ground_truth: Sequence[Box]) -> float:
    """Best IoU achieved by any prediction against any ground-truth box."""
    if len(ground_truth) == 0:
        raise NoGroundTruthError("image IoU needs at least one unpainted ground-truth box")
    if len(predictions) == 0:
        return 0.0
    return max(iou(p, g) for p in predictions for g in ground_truth)


def score_image(scene: SceneScore) -> tuple[float, float]:
    """Reduce one SceneScore to (mean unpainted confidence, best IoU).

    Detections attributed to the camouflaged vehicle are excluded from both
    numbers; a scene with no unpainted detections contributes confidence 0
    and IoU 0.
    """
    confidence = mean_vehicle_score(scene.unpainted_confidences()).value
    gt = [g.box for g in scene.ground_truth if not g.is_camouflaged]
    preds = [d.box for d in scene.detections if not d.is_camouflaged]
    return confidence, image_iou(preds, gt)


def aggregate(
    per_image: Sequence[tuple[float, float]],
    split: Split,
    camouflage_label: str,
) -> EvalReport:
    """Fold per-image (mean confidence, IoU) pairs into one report row."""
    if len(per_image) == 0:
        raise EmptyEvaluationError("cannot aggregate an empty evaluation")
    confs = np.array([c for c, _ in per_image], dtype=np.float64)
    ious = np.array([i for _, i in per_image], dtype=np.float64)
    return EvalReport(
        detection_confidence=float(confs.mean() * 100.0),
        miou=float(ious.mean() * 100.0),
        p_at_05=float((ious > 0.5).mean() * 100.0),  # strictly larger than 0.5
        split=split,
        camouflage_label=camouflage_label,
        image_count=len(per_image),
    )


def report_to_dict(report: EvalReport) -> dict:
    doc = asdict(report)
    doc["split"] = report.split.value
    return doc


def write_reports_csv(reports: Sequence[EvalReport], path: str | Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for r in reports:
        lines.append(
            f"{r.camouflage_label},{r.split.value},"
            f"{r.detection_confidence:.2f},{r.miou:.2f},{r.p_at_05:.2f},{r.image_count}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_reports_json(reports: Sequence[EvalReport], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps([report_to_dict(r) for r in reports], indent=2), encoding="ascii"
    )
