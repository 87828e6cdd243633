"""Synthetic scene scorer with analytically known structure.

Stands in for the renderer+detector stack: per-vehicle confidence is a
logistic of a linear functional of the (tiled, [0,1]-scaled) pattern, with
optional hash-seeded noise. The family is bounded in [0, 1] like detector
confidences, monotone per channel, and has a closed-form bound-corner
optimum, which is exactly what is needed to validate the optimizer without
a real simulator.

Noise is keyed by (spec seed, transformation, pattern content), so the
scorer is a deterministic noisy function: repeat calls agree bit-for-bit
while different candidates see independent draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import CamoError, OracleUnavailableError, ShapeMismatchError
from .scene import Box, Detection, GroundTruth, SceneScore, Transformation
from .seeding import content_key, derive_rng
from .texture import CamouflagePattern, tile

GAIN = 4.0  # fixed logit gain on the normalized pattern response
CAMO_CONFIDENCE = 0.9  # the camouflaged vehicle itself is always "detected"

# defaults for the seeded generator
DEFAULT_ACTIVE_CHANNELS = 6
DEFAULT_LOCAL_WEIGHT = 0.3
CANVAS_W, CANVAS_H = 640.0, 480.0


@dataclass(frozen=True)
class SynthVehicle:
    bias: float
    box: Box


@dataclass(frozen=True)
class SynthScene:
    """Per-transformation ingredients: weight grid, vehicles, camo box."""

    weights: np.ndarray = field(repr=False)  # (h*tile_scale, w*tile_scale, 3)
    vehicles: tuple[SynthVehicle, ...]
    camo_box: Box

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise ValueError("scene weights must be finite")
        if len(self.vehicles) < 1:
            raise ValueError("scene needs at least one unpainted vehicle")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)


@dataclass(frozen=True)
class SynthSceneSpec:
    pattern_width: int
    pattern_height: int
    noise_std: float
    seed: int
    scenes: dict[tuple[int, int], SynthScene]
    tile_scale: int = 1

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.tile_scale < 1:
            raise ValueError(f"tile_scale must be >= 1, got {self.tile_scale}")
        wh = (self.pattern_height * self.tile_scale, self.pattern_width * self.tile_scale, 3)
        for key, scene in self.scenes.items():
            if scene.weights.shape != wh:
                raise ShapeMismatchError(
                    f"scene {key} weights shape {scene.weights.shape}, expected {wh}"
                )

    def scene_for(self, t: Transformation) -> SynthScene:
        key = (t.location_id, t.orientation_id)
        if key not in self.scenes:
            raise CamoError(f"transformation {key} not covered by this scene spec")
        return self.scenes[key]


def generate_spec(
    transformations: Sequence[Transformation],
    pattern_width: int,
    pattern_height: int,
    noise_std: float,
    seed: int,
    active_channels: int = DEFAULT_ACTIVE_CHANNELS,
    local_weight: float = DEFAULT_LOCAL_WEIGHT,
    tile_scale: int = 1,
) -> SynthSceneSpec:
    """Seeded random spec over the given transformations.

    All transformations share one sparse set of active channels and a
    shared weight vector, perturbed per transformation by ``local_weight``
    times fresh noise. The shared component is what lets a pattern learned
    on the train split transfer to held-out locations.
    """
    dims = pattern_height * tile_scale * pattern_width * tile_scale * 3
    shape = (pattern_height * tile_scale, pattern_width * tile_scale, 3)
    shared_rng = derive_rng(seed, 10_000)
    active = shared_rng.choice(dims, size=min(active_channels, dims), replace=False)
    shared = shared_rng.normal(0.0, 1.0, size=active.size)

    scenes: dict[tuple[int, int], SynthScene] = {}
    vehicle_counts: dict[int, int] = {}
    for t in transformations:
        key = (t.location_id, t.orientation_id)
        if key in scenes:
            raise ValueError(f"duplicate transformation {key}")
        rng = derive_rng(seed, t.location_id, t.orientation_id)
        flat = np.zeros(dims)
        flat[active] = shared + local_weight * rng.normal(0.0, 1.0, size=active.size)
        if t.location_id not in vehicle_counts:
            vehicle_counts[t.location_id] = int(derive_rng(seed, t.location_id).integers(1, 5))
        n = vehicle_counts[t.location_id]
        vehicles = tuple(
            SynthVehicle(bias=float(rng.uniform(1.0, 1.5)), box=_random_box(rng))
            for _ in range(n)
        )
        scenes[key] = SynthScene(
            weights=flat.reshape(shape), vehicles=vehicles, camo_box=_random_box(rng)
        )
    return SynthSceneSpec(
        pattern_width=pattern_width,
        pattern_height=pattern_height,
        noise_std=noise_std,
        seed=seed,
        scenes=scenes,
        tile_scale=tile_scale,
    )


def _random_box(rng: np.random.Generator) -> Box:
    w = float(rng.uniform(40.0, 160.0))
    h = float(rng.uniform(30.0, 120.0))
    x = float(rng.uniform(0.0, CANVAS_W - w))
    y = float(rng.uniform(0.0, CANVAS_H - h))
    return Box(x, y, x + w, y + h)


def _features(spec: SynthSceneSpec, pattern: CamouflagePattern) -> np.ndarray:
    tiled = tile(
        pattern, spec.pattern_width * spec.tile_scale, spec.pattern_height * spec.tile_scale
    )
    return tiled.channels / 255.0


def _response(scene: SynthScene, phi: np.ndarray) -> float:
    l1 = np.abs(scene.weights).sum()
    if l1 == 0.0:
        return 0.0
    return float((scene.weights * phi).sum() / l1)


def _shrunk_box(box: Box, confidence: float) -> Box:
    # each side moves inward by 0.5*(1-S) of its extent; floor keeps the
    # box non-degenerate for saturated logits
    s = max(confidence, 1e-9)
    fx = 0.5 * (1.0 - s) * (box.x_max - box.x_min)
    fy = 0.5 * (1.0 - s) * (box.y_max - box.y_min)
    return Box(box.x_min + fx, box.y_min + fy, box.x_max - fx, box.y_max - fy)


def synth_score(
    spec: SynthSceneSpec, pattern: CamouflagePattern, t: Transformation
) -> SceneScore:
    """Score one scene: logistic-of-linear confidences, confidence-coupled boxes.

    Per-vehicle confidence is expit(bias + gain * <w, phi>/||w||_1 + eps)
    with phi the tiled pattern scaled to [0, 1]; the predicted box is the
    ground-truth box shrunk on each side by 0.5*(1 - confidence).
    """
    if (pattern.width, pattern.height) != (spec.pattern_width, spec.pattern_height):
        raise ShapeMismatchError(
            f"pattern is {pattern.width}x{pattern.height}, spec expects "
            f"{spec.pattern_width}x{spec.pattern_height}"
        )
    scene = spec.scene_for(t)
    phi = _features(spec, pattern)
    logit = GAIN * _response(scene, phi)
    n = len(scene.vehicles)
    if spec.noise_std > 0.0:
        rng = derive_rng(
            spec.seed, t.location_id, t.orientation_id, content_key(pattern.channels.tobytes())
        )
        eps = rng.normal(0.0, spec.noise_std, size=n)
    else:
        eps = np.zeros(n)
    detections = []
    ground_truth = []
    for i, vehicle in enumerate(scene.vehicles):
        conf = float(expit(vehicle.bias + logit + eps[i]))
        detections.append(Detection(conf, _shrunk_box(vehicle.box, conf), False))
        ground_truth.append(GroundTruth(i + 1, vehicle.box, False))
    detections.append(
        Detection(CAMO_CONFIDENCE, _shrunk_box(scene.camo_box, CAMO_CONFIDENCE), True)
    )
    ground_truth.append(GroundTruth(0, scene.camo_box, True))
    return SceneScore(tuple(detections), tuple(ground_truth))


def analytic_optimum(spec: SynthSceneSpec, t: Transformation) -> CamouflagePattern:
    """Bound-corner pattern minimizing the confidences under ``t``.

    Tiled copies of a channel are folded into one effective weight; the
    channel then sits at 0 where the effective weight is positive (or zero)
    and at 255 where it is negative. Defined for noiseless specs only.
    """
    if spec.noise_std > 0.0:
        raise OracleUnavailableError("analytic optimum is defined for noise_std = 0")
    scene = spec.scene_for(t)
    s = spec.tile_scale
    folded = scene.weights.reshape(s, spec.pattern_height, s, spec.pattern_width, 3).sum(
        axis=(0, 2)
    )
    return CamouflagePattern(np.where(folded < 0.0, 255.0, 0.0))


class SynthScorer:
    """SceneScorer adapter around a SynthSceneSpec; pure, so concurrency-safe."""

    concurrent_safe = True

    def __init__(self, spec: SynthSceneSpec):
        self.spec = spec

    def score(self, pattern: CamouflagePattern, t: Transformation) -> SceneScore:
        return synth_score(self.spec, pattern, t)


def spec_to_dict(spec: SynthSceneSpec) -> dict:
    return {
        "pattern_width": spec.pattern_width,
        "pattern_height": spec.pattern_height,
        "tile_scale": spec.tile_scale,
        "noise_std": spec.noise_std,
        "seed": spec.seed,
        "scenes": [
            {
                "location_id": loc,
                "orientation_id": ori,
                "weights": scene.weights.ravel().tolist(),
                "camouflaged_box": scene.camo_box.as_list(),
                "vehicles": [
                    {"bias": v.bias, "box": v.box.as_list()} for v in scene.vehicles
                ],
            }
            for (loc, ori), scene in sorted(spec.scenes.items())
        ],
    }


def spec_from_dict(doc: dict) -> SynthSceneSpec:
    tile_scale = int(doc.get("tile_scale", 1))
    ph, pw = int(doc["pattern_height"]), int(doc["pattern_width"])
    shape = (ph * tile_scale, pw * tile_scale, 3)
    scenes = {}
    for entry in doc["scenes"]:
        weights = np.asarray(entry["weights"], dtype=np.float64).reshape(shape)
        vehicles = tuple(
            SynthVehicle(bias=float(v["bias"]), box=Box(*v["box"]))
            for v in entry["vehicles"]
        )
        scenes[(int(entry["location_id"]), int(entry["orientation_id"]))] = SynthScene(
            weights=weights, vehicles=vehicles, camo_box=Box(*entry["camouflaged_box"])
        )
    return SynthSceneSpec(
        pattern_width=pw,
        pattern_height=ph,
        noise_std=float(doc["noise_std"]),
        seed=int(doc["seed"]),
        scenes=scenes,
        tile_scale=tile_scale,
    )


def save_spec(spec: SynthSceneSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec)), encoding="ascii")


def load_spec(path: str | Path) -> SynthSceneSpec:
    return spec_from_dict(json.loads(Path(path).read_text(encoding="ascii")))
