import itertools

import numpy as np
import pytest

from camoevolve.errors import CamoError, OracleUnavailableError, ShapeMismatchError
from camoevolve.metrics import iou
from camoevolve.objective import mean_vehicle_score
from camoevolve.scene import Box, Split, Transformation, build_transformation_grid
from camoevolve.synthsim import (
    SynthScene,
    SynthSceneSpec,
    SynthScorer,
    SynthVehicle,
    analytic_optimum,
    generate_spec,
    load_spec,
    save_spec,
    spec_from_dict,
    spec_to_dict,
    synth_score,
)
from camoevolve.texture import CamouflagePattern, new_random, solid

T0 = Transformation(0, 0, 0.5, Split.TRAIN)


def make_spec(weights, biases, width=2, height=1, noise_std=0.0, tile_scale=1, seed=3):
    shape = (height * tile_scale, width * tile_scale, 3)
    scene = SynthScene(
        weights=np.asarray(weights, dtype=float).reshape(shape),
        vehicles=tuple(
            SynthVehicle(bias=b, box=Box(10 * i, 10 * i, 10 * i + 8, 10 * i + 6))
            for i, b in enumerate(biases)
        ),
        camo_box=Box(100, 100, 140, 130),
    )
    return SynthSceneSpec(
        pattern_width=width,
        pattern_height=height,
        noise_std=noise_std,
        seed=seed,
        scenes={(0, 0): scene},
        tile_scale=tile_scale,
    )


def stilde(spec, pattern, t=T0):
    return mean_vehicle_score(synth_score(spec, pattern, t).unpainted_confidences()).value


def test_zero_weights_zero_bias_gives_half():
    spec = make_spec(np.zeros(6), biases=[0.0, 0.0])
    score = synth_score(spec, solid(2, 1, (50, 99, 200)), T0)
    assert score.unpainted_confidences() == [0.5, 0.5]


def test_bound_corner_minimizes_score():
    rng = np.random.default_rng(8)
    weights = rng.normal(0, 1, 6)
    spec = make_spec(weights, biases=[0.3])
    best = analytic_optimum(spec, T0)
    best_score = stilde(spec, best)
    for seed in range(40):
        assert stilde(spec, new_random(2, 1, seed)) >= best_score


def test_optimum_matches_exhaustive_corner_search():
    # 2x1 pattern: 6 channels, 64 bound corners enumerable exactly
    rng = np.random.default_rng(15)
    weights = rng.normal(0, 1, 6)
    spec = make_spec(weights, biases=[0.1, 0.7])
    scores = {}
    for corner in itertools.product((0.0, 255.0), repeat=6):
        pattern = CamouflagePattern(np.array(corner).reshape(1, 2, 3))
        scores[corner] = stilde(spec, pattern)
    expected = min(scores, key=scores.get)
    opt = analytic_optimum(spec, T0)
    assert tuple(opt.channels.ravel()) == expected


def test_optimum_sign_rule():
    spec_pos = make_spec(np.full(6, 0.5), biases=[0.0])
    assert np.all(analytic_optimum(spec_pos, T0).channels == 0.0)
    spec_neg = make_spec(np.full(6, -0.5), biases=[0.0])
    assert np.all(analytic_optimum(spec_neg, T0).channels == 255.0)
    mixed = np.array([1.0, -1.0, 0.0, 2.0, -2.0, 0.5])
    spec_mixed = make_spec(mixed, biases=[0.0])
    expected = np.where(mixed < 0, 255.0, 0.0)
    assert np.array_equal(analytic_optimum(spec_mixed, T0).channels.ravel(), expected)


def test_optimum_with_tiling_folds_copies():
    # tile_scale 2: each pattern channel appears in 4 tiled cells; the
    # optimum follows the SIGN OF THE SUM of those copies
    rng = np.random.default_rng(21)
    weights = rng.normal(0, 1, size=(2, 4, 3))  # pattern 2x1, tiled 2x
    spec = make_spec(weights, biases=[0.2], width=2, height=1, tile_scale=2)
    scores = {}
    for corner in itertools.product((0.0, 255.0), repeat=6):
        pattern = CamouflagePattern(np.array(corner).reshape(1, 2, 3))
        scores[corner] = stilde(spec, pattern)
    expected = min(scores, key=scores.get)
    assert tuple(analytic_optimum(spec, T0).channels.ravel()) == expected


def test_confidence_monotone_in_weight_direction():
    rng = np.random.default_rng(4)
    weights = rng.normal(0, 1, 6)
    spec = make_spec(weights, biases=[0.4])
    base = np.full((1, 2, 3), 128.0)
    s0 = stilde(spec, CamouflagePattern(base))
    for ch in range(6):
        bumped = base.ravel().copy()
        bumped[ch] += 20.0 * np.sign(weights[ch])
        s1 = stilde(spec, CamouflagePattern(np.clip(bumped, 0, 255).reshape(1, 2, 3)))
        assert s1 >= s0 - 1e-12


def test_saturated_confidence_keeps_ground_truth_box():
    spec = make_spec(np.zeros(6), biases=[40.0])  # expit(40) == 1.0 in float64
    score = synth_score(spec, solid(2, 1, (0, 0, 0)), T0)
    det = [d for d in score.detections if not d.is_camouflaged][0]
    gt = [g for g in score.ground_truth if not g.is_camouflaged][0]
    assert det.confidence == 1.0
    assert iou(det.box, gt.box) == 1.0


def test_box_shrink_couples_iou_to_confidence():
    spec = make_spec(np.zeros(6), biases=[0.0])  # S = 0.5 exactly
    score = synth_score(spec, solid(2, 1, (0, 0, 0)), T0)
    det = [d for d in score.detections if not d.is_camouflaged][0]
    gt = [g for g in score.ground_truth if not g.is_camouflaged][0]
    # width scales by S, so nested-box IoU is S^2
    assert iou(det.box, gt.box) == pytest.approx(0.25)


def test_camouflaged_vehicle_emitted_and_tagged():
    spec = make_spec(np.ones(6), biases=[0.0])
    score = synth_score(spec, solid(2, 1, (10, 10, 10)), T0)
    camo = [d for d in score.detections if d.is_camouflaged]
    assert len(camo) == 1 and camo[0].confidence == 0.9
    assert any(g.is_camouflaged and g.vehicle_id == 0 for g in score.ground_truth)


def test_noise_is_deterministic_per_pattern():
    spec = make_spec(np.ones(6), biases=[0.2, 0.8], noise_std=0.05)
    p = new_random(2, 1, seed=5)
    a = synth_score(spec, p, T0)
    b = synth_score(spec, p, T0)
    assert a == b
    other = synth_score(spec, new_random(2, 1, seed=6), T0)
    assert a.unpainted_confidences() != other.unpainted_confidences()


def test_noise_changes_scores_vs_noiseless():
    clean = make_spec(np.ones(6), biases=[0.2])
    noisy = make_spec(np.ones(6), biases=[0.2], noise_std=0.05)
    p = new_random(2, 1, seed=5)
    assert stilde(clean, p) != stilde(noisy, p)


def test_analytic_optimum_refuses_noise():
    spec = make_spec(np.ones(6), biases=[0.0], noise_std=0.01)
    with pytest.raises(OracleUnavailableError):
        analytic_optimum(spec, T0)


def test_unknown_transformation_rejected():
    spec = make_spec(np.ones(6), biases=[0.0])
    with pytest.raises(CamoError):
        synth_score(spec, solid(2, 1, (0, 0, 0)), Transformation(1, 1, 0.5, Split.TRAIN))


def test_pattern_shape_must_match_spec():
    spec = make_spec(np.ones(6), biases=[0.0])
    with pytest.raises(ShapeMismatchError):
        synth_score(spec, solid(4, 4, (0, 0, 0)), T0)


def test_generated_spec_properties():
    grid = build_transformation_grid(seed=1)[:40]
    spec = generate_spec(grid, 16, 16, noise_std=0.01, seed=9)
    assert len(spec.scenes) == 40
    for (loc, ori), scene in spec.scenes.items():
        assert 1 <= len(scene.vehicles) <= 4
    # vehicle count is a per-location constant
    by_loc = {}
    for (loc, _), scene in spec.scenes.items():
        by_loc.setdefault(loc, set()).add(len(scene.vehicles))
    assert all(len(counts) == 1 for counts in by_loc.values())
    assert generate_spec(grid, 16, 16, noise_std=0.01, seed=9).scenes.keys() == spec.scenes.keys()


def test_generated_spec_deterministic():
    grid = build_transformation_grid(seed=1)[:10]
    a = generate_spec(grid, 8, 8, noise_std=0.0, seed=4)
    b = generate_spec(grid, 8, 8, noise_std=0.0, seed=4)
    p = new_random(8, 8, 2)
    for t in grid:
        assert synth_score(a, p, t) == synth_score(b, p, t)


def test_spec_json_round_trip(tmp_path):
    grid = build_transformation_grid(seed=1)[:5]
    spec = generate_spec(grid, 4, 4, noise_std=0.02, seed=11)
    path = tmp_path / "spec.json"
    save_spec(spec, path)
    loaded = load_spec(path)
    p = new_random(4, 4, 3)
    for t in grid:
        assert synth_score(spec, p, t) == synth_score(loaded, p, t)
    assert spec_to_dict(loaded) == spec_to_dict(spec)
    assert spec_from_dict(spec_to_dict(spec)).noise_std == spec.noise_std


def test_scorer_adapter():
    grid = build_transformation_grid(seed=1)[:3]
    spec = generate_spec(grid, 4, 4, noise_std=0.0, seed=11)
    scorer = SynthScorer(spec)
    assert scorer.concurrent_safe
    p = new_random(4, 4, 3)
    assert scorer.score(p, grid[0]) == synth_score(spec, p, grid[0])
