"""Command-line orchestrator: attack, enhance, eval, baselines.

Configuration comes from flags, optionally layered over a JSON config file
(flags win). Every run writes a manifest JSON with the fully resolved
configuration and seed, which is sufficient to reproduce the run
bit-for-bit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import baseline, evolve, metrics, reports, synthsim, texture
from .bridge import BridgeConfig, BridgeScorer, healthcheck
from .errors import CamoError
from .evolve import Mode, OptimizerConfig
from .scene import SceneScorer, Split, Transformation, build_transformation_grid

DEFAULTS = {
    "scorer": "synth",
    "endpoint": None,
    "alpha": 5.0,
    "sigma": 10.0,
    "lambda": 20,
    "iters": 300,
    "patience": 10,
    "seed": 0,
    "width": 16,
    "height": 16,
    "out": "runs/latest",
    "split": "both",
    "ours": None,
    "noise_std": 0.0,
    "scene_spec": None,
    "train_transforms": None,
    "eval_transforms": None,
    "workers": None,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camoevolve",
        description="Learn and evaluate camouflage patterns against a scene scorer",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("attack", "minimize detection scores of unpainted vehicles"),
        ("enhance", "opposite reward: maximize detection scores"),
        ("eval", "evaluate a saved pattern (requires --ours)"),
        ("baselines", "write the baseline comparison table"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--scorer", choices=["synth", "bridge"])
        p.add_argument("--endpoint", help="bridge service URL (required with --scorer bridge)")
        p.add_argument("--alpha", type=float, help="learning rate in channel units")
        p.add_argument("--sigma", type=float, help="search distribution std in channel units")
        p.add_argument("--lambda", type=int, dest="lambda_", help="population size")
        p.add_argument("--iters", type=int, help="iteration budget")
        p.add_argument("--patience", type=int, help="stall iterations before stopping")
        p.add_argument("--seed", type=int, help="base seed (non-negative)")
        p.add_argument("--width", type=int, help="pattern width in pixels")
        p.add_argument("--height", type=int, help="pattern height in pixels")
        p.add_argument("--out", help="output directory (created if missing)")
        p.add_argument("--split", choices=["train", "test", "both"])
        p.add_argument("--ours", help="path to a saved pattern (PPM with sidecar)")
        p.add_argument("--noise-std", type=float, dest="noise_std",
                       help="synthetic scorer noise (synth scorer only)")
        p.add_argument("--scene-spec", dest="scene_spec",
                       help="JSON scene spec file (default: generated from --seed)")
        p.add_argument("--train-transforms", type=int, dest="train_transforms",
                       help="cap on train-split transformations used for optimization")
        p.add_argument("--eval-transforms", type=int, dest="eval_transforms",
                       help="cap on per-split transformations used for reports")
        p.add_argument("--workers", type=int, help="parallel scorer calls per step")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """DEFAULTS <- config file <- explicit flags, in increasing precedence."""
    resolved = dict(DEFAULTS)
    if args.config:
        try:
            file_values = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise CamoError(f"cannot read config file {args.config}: {exc}") from exc
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise CamoError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(file_values)
    for key in DEFAULTS:
        flag = {"lambda": "lambda_"}.get(key, key)
        value = getattr(args, flag, None)
        if value is not None:
            resolved[key] = value
    resolved["command"] = args.command
    if resolved["scorer"] == "bridge" and not resolved["endpoint"]:
        raise CamoError("--scorer bridge requires --endpoint")
    if resolved["width"] < 1 or resolved["height"] < 1:
        raise CamoError("pattern dimensions must be >= 1")
    if resolved["seed"] < 0:
        raise CamoError("--seed must be non-negative")
    return resolved


def _subsample(items: list, cap: int | None) -> list:
    if cap is None or cap >= len(items):
        return items
    if cap < 1:
        raise CamoError("transformation caps must be >= 1")
    idx = [round(i * (len(items) - 1) / (cap - 1)) for i in range(cap)] if cap > 1 else [0]
    return [items[i] for i in sorted(set(idx))]


def _make_scorer(cfg: dict, grid: list[Transformation]) -> SceneScorer:
    if cfg["scorer"] == "bridge":
        bridge_cfg = BridgeConfig(endpoint=cfg["endpoint"])
        healthcheck(bridge_cfg)
        return BridgeScorer(bridge_cfg)
    if cfg["scene_spec"]:
        spec = synthsim.load_spec(cfg["scene_spec"])
    else:
        spec = synthsim.generate_spec(
            grid,
            pattern_width=cfg["width"],
            pattern_height=cfg["height"],
            noise_std=cfg["noise_std"],
            seed=cfg["seed"],
        )
    return synthsim.SynthScorer(spec)


def _splits(cfg: dict) -> list[Split]:
    return {"train": [Split.TRAIN], "test": [Split.TEST]}.get(
        cfg["split"], [Split.TRAIN, Split.TEST]
    )


def _eval_transforms(grid: list[Transformation], split: Split, cap: int | None) -> list:
    return _subsample([t for t in grid if t.split is split], cap)


def _write_manifest(cfg: dict, out: Path) -> None:
    from . import __version__

    manifest = {"tool": "camoevolve", "version": __version__}
    # everything that shapes the artifacts' content; the output path does
    # not, and leaving it out keeps manifests comparable across run dirs
    manifest.update({k: cfg[k] for k in sorted(cfg) if k != "out"})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="ascii")


def _run_optimizer(cfg: dict, mode: Mode) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    grid = build_transformation_grid(cfg["seed"])
    scorer = _make_scorer(cfg, grid)
    train = _subsample(
        [t for t in grid if t.split is Split.TRAIN], cfg["train_transforms"]
    )
    config = OptimizerConfig(
        transformations=tuple(train),
        mode=mode,
        alpha=cfg["alpha"],
        sigma=cfg["sigma"],
        popsize=cfg["lambda"],
        max_iterations=cfg["iters"],
        patience=cfg["patience"],
        base_seed=cfg["seed"],
        max_workers=cfg["workers"],
    )
    initial = texture.new_random(cfg["width"], cfg["height"], cfg["seed"])
    result = evolve.run(config, scorer, initial)

    texture.save(result.best, out / "pattern.ppm")
    evolve.write_curve_csv(result.history, out / "curve.csv")
    reports.render_curve(result.history, mode, out / "curve.png")
    reports.render_pattern(result.best, out / "pattern_preview.png")
    for split in _splits(cfg):
        transforms = _eval_transforms(grid, split, cfg["eval_transforms"])
        report = baseline.evaluate_pattern(result.best, scorer, transforms, split, "ours")
        metrics.write_reports_csv([report], out / f"report_{split.value}.csv")
        metrics.write_reports_json([report], out / f"report_{split.value}.json")
    _write_manifest(cfg, out)
    print(f"{mode.value}: best objective {result.best_objective:.6f} "
          f"after {result.history[-1].iteration} iterations -> {out}")
    return 0


def _run_eval(cfg: dict) -> int:
    if not cfg["ours"]:
        raise CamoError("eval requires --ours PATH")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    pattern = texture.load(cfg["ours"])
    grid = build_transformation_grid(cfg["seed"])
    scorer = _make_scorer(cfg, grid)
    rows = []
    for split in _splits(cfg):
        transforms = _eval_transforms(grid, split, cfg["eval_transforms"])
        rows.append(baseline.evaluate_pattern(pattern, scorer, transforms, split, "ours"))
    metrics.write_reports_csv(rows, out / "report.csv")
    metrics.write_reports_json(rows, out / "report.json")
    reports.render_comparison(rows, out / "report.png")
    _write_manifest(cfg, out)
    print(f"eval: wrote {len(rows)} report row(s) -> {out}")
    return 0


def _run_baselines(cfg: dict) -> int:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    grid = build_transformation_grid(cfg["seed"])
    scorer = _make_scorer(cfg, grid)
    suite = baseline.build_suite(cfg["width"], cfg["height"], cfg["seed"])
    learned = texture.load(cfg["ours"]) if cfg["ours"] else None
    for split in _splits(cfg):
        transforms = _eval_transforms(grid, split, cfg["eval_transforms"])
        sub_grid = transforms  # evaluate_all filters by split itself
        rows = baseline.evaluate_all(suite, scorer, sub_grid, split, learned)
        metrics.write_reports_csv(rows, out / f"baselines_{split.value}.csv")
        metrics.write_reports_json(rows, out / f"baselines_{split.value}.json")
        reports.render_comparison(rows, out / f"baselines_{split.value}.png")
    _write_manifest(cfg, out)
    print(f"baselines: wrote comparison table(s) -> {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "attack":
            return _run_optimizer(cfg, Mode.ATTACK)
        if args.command == "enhance":
            return _run_optimizer(cfg, Mode.ENHANCE)
        if args.command == "eval":
            return _run_eval(cfg)
        return _run_baselines(cfg)
    except (CamoError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
