"""Scene transformations and the black-box scene-scorer contract.

A transformation bundles one rendering condition (vehicle location, camera
orientation, lighting). The scorer maps (pattern, transformation) to
per-vehicle detections; anything satisfying SceneScorer can drive the
optimizer, whether in-process or remote.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

from .errors import InvalidBoxError
from .seeding import derive_rng
from .texture import CamouflagePattern

NUM_LOCATIONS = 36
NUM_ORIENTATIONS = 20
TRAIN_LOCATIONS = 18  # locations 0..17 train, 18..35 test


class Split(Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in real pixel coordinates, half-open on each axis."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidBoxError(
                f"box must have positive extent, got "
                f"({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class Transformation:
    location_id: int
    orientation_id: int
    lighting: float
    split: Split

    def __post_init__(self):
        if not 0 <= self.location_id < NUM_LOCATIONS:
            raise ValueError(f"location_id {self.location_id} outside [0, {NUM_LOCATIONS})")
        if not 0 <= self.orientation_id < NUM_ORIENTATIONS:
            raise ValueError(
                f"orientation_id {self.orientation_id} outside [0, {NUM_ORIENTATIONS})"
            )
        if not 0.0 <= self.lighting <= 1.0:
            raise ValueError(f"lighting {self.lighting} outside [0, 1]")


@dataclass(frozen=True)
class Detection:
    confidence: float
    box: Box
    is_camouflaged: bool = False

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruth:
    vehicle_id: int
    box: Box
    is_camouflaged: bool = False


@dataclass(frozen=True)
class SceneScore:
    """One black-box evaluation: detections plus labeled ground truth."""

    detections: tuple[Detection, ...]
    ground_truth: tuple[GroundTruth, ...]

    @property
    def no_detection(self) -> bool:
        """True when no unpainted vehicle was detected at all."""
        return not any(not d.is_camouflaged for d in self.detections)

    def unpainted_confidences(self) -> list[float]:
        """Confidences of detections not attributed to the camouflaged vehicle."""
        return [d.confidence for d in self.detections if not d.is_camouflaged]


@runtime_checkable
class SceneScorer(Protocol):
    """The paint/photograph/detect composite, seen as a black box.

    Implementations must be deterministic given (pattern, transformation)
    up to their declared noise model, must tag detections belonging to the
    camouflaged vehicle, and declare via ``concurrent_safe`` whether calls
    may run concurrently.
    """

    concurrent_safe: bool

    def score(self, pattern: CamouflagePattern, t: Transformation) -> SceneScore: ...


def split_for_location(location_id: int) -> Split:
    return Split.TRAIN if location_id < TRAIN_LOCATIONS else Split.TEST


def build_transformation_grid(seed: int) -> list[Transformation]:
    """Full 36-location x 20-orientation grid with seeded per-location lighting."""
    grid = []
    for loc in range(NUM_LOCATIONS):
        lighting = float(derive_rng(seed, loc).uniform(0.0, 1.0))
        for ori in range(NUM_ORIENTATIONS):
            grid.append(
                Transformation(
                    location_id=loc,
                    orientation_id=ori,
                    lighting=lighting,
                    split=split_for_location(loc),
                )
            )
    return grid


def transformation_to_dict(t: Transformation) -> dict:
    return {
        "location_id": t.location_id,
        "orientation_id": t.orientation_id,
        "lighting": t.lighting,
        "split": t.split.value,
    }


def transformation_from_dict(doc: dict) -> Transformation:
    return Transformation(
        location_id=int(doc["location_id"]),
        orientation_id=int(doc["orientation_id"]),
        lighting=float(doc["lighting"]),
        split=Split(doc["split"]),
    )


def save_grid(grid: Sequence[Transformation], path: str | Path) -> None:
    doc = [transformation_to_dict(t) for t in grid]
    Path(path).write_text(json.dumps(doc), encoding="ascii")


def load_grid(path: str | Path) -> list[Transformation]:
    doc = json.loads(Path(path).read_text(encoding="ascii"))
    return [transformation_from_dict(entry) for entry in doc]
