"""camoevolve: evolution-strategy search for contextual vehicle camouflage.

Learns a bounded RGB pattern that minimizes (attack) or maximizes (enhance)
the expected detection score of unpainted vehicles across a set of scene
transformations, evaluated through a pluggable black-box scene scorer.
"""

__version__ = "0.1.0"

from .distribution import SearchDistribution, sample, score_gradient
from .errors import CamoError
from .evolve import Mode, OptimizerConfig, RunResult, SearchState, estimate_gradient, run, step
from .metrics import EvalReport, aggregate, image_iou, iou
from .objective import bce_zero, mean_vehicle_score, standardize
from .scene import (
    Box,
    Detection,
    GroundTruth,
    SceneScore,
    SceneScorer,
    Split,
    Transformation,
    build_transformation_grid,
)
from .synthsim import SynthSceneSpec, SynthScorer, analytic_optimum, generate_spec, synth_score
from .texture import CamouflagePattern, clamp, load, new_random, save, solid, tile

__all__ = [
    "Box",
    "CamoError",
    "CamouflagePattern",
    "Detection",
    "EvalReport",
    "GroundTruth",
    "Mode",
    "OptimizerConfig",
    "RunResult",
    "SceneScore",
    "SceneScorer",
    "SearchDistribution",
    "SearchState",
    "Split",
    "SynthSceneSpec",
    "SynthScorer",
    "Transformation",
    "aggregate",
    "analytic_optimum",
    "bce_zero",
    "build_transformation_grid",
    "clamp",
    "estimate_gradient",
    "generate_spec",
    "image_iou",
    "iou",
    "load",
    "mean_vehicle_score",
    "new_random",
    "run",
    "sample",
    "save",
    "score_gradient",
    "solid",
    "standardize",
    "step",
    "synth_score",
    "tile",
]
