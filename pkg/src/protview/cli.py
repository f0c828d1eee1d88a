"""Command-line interface: render, run, fuse, evaluate, gradcheck, synth."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


from . import cnn
from .dataset import generate_synthetic_dataset, load_manifest
from .evaluation import evaluate, read_score_csv, write_score_csv
from .fusion import sum_rule_fuse
from .pipeline import RunConfig, render_dataset, run_pipeline

GRADCHECK_LIMIT = 1e-4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest CSV")
    parser.add_argument("--config", help="RunConfig JSON file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument(
        "--representations", nargs="+", help="override the representation list"
    )
    parser.add_argument("--grid-step", type=float, help="rotation step in degrees")
    parser.add_argument("--image-size", type=int, help="square image size in pixels")
    parser.add_argument("--folds", type=int, help="cross-validation folds")
    parser.add_argument("--workers", type=int, help=f"render workers (or ${'PROTVIEW_WORKERS'})")


def _load_config(args) -> RunConfig:
    if args.config:
        config = RunConfig.from_json(Path(args.config).read_text())
    else:
        config = RunConfig(representations=("ribbons",))
    overrides = {}
    if args.representations:
        overrides["representations"] = tuple(args.representations)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.grid_step is not None:
        overrides["grid_step"] = args.grid_step
    if args.image_size is not None:
        overrides["image_size"] = args.image_size
    if getattr(args, "folds", None) is not None:
        overrides["folds"] = args.folds
    if overrides:
        import dataclasses

        config = dataclasses.replace(config, **overrides)
    return config


def _cmd_render(args) -> int:
    manifest = load_manifest(args.manifest)
    config = _load_config(args)
    result = render_dataset(manifest, config, Path(args.out) / "renders", workers=args.workers)
    print(f"rendered {result.written} images, skipped {result.skipped} (unchanged)")
    if result.failures:
        for protein, rep, err in result.failures:
            print(f"FAILED {protein}/{rep}: {err}", file=sys.stderr)
        return 1
    return 0


def _cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    config = _load_config(args)
    result = run_pipeline(manifest, config, args.out, workers=args.workers)
    print(Path(result.out_dir, "summary.txt").read_text(), end="")
    if result.sweep:
        print("view sweep:")
        for count, auc, acc in result.sweep:
            auc_s = "n/a" if auc is None else f"{auc:.2f}"
            print(f"  views={count}: auc={auc_s} accuracy={acc:.4f}")
    return 0


def _cmd_fuse(args) -> int:
    loaded = [read_score_csv(p) for p in args.scores]
    matrices = [m for m, _, _ in loaded]
    labels = loaded[0][1]
    fused = sum_rule_fuse(matrices)
    write_score_csv(args.out, fused, labels, None)
    report = evaluate(fused, labels, name=args.name)
    print(report.to_text(), end="")
    return 0


def _cmd_evaluate(args) -> int:
    matrix, labels, folds = read_score_csv(args.scores)
    plan = None
    if folds and min(folds.values()) >= 0:
        from .evaluation import FoldPlan

        plan = FoldPlan(k=max(folds.values()) + 1, assignment=folds, seed=-1)
    report = evaluate(matrix, labels, plan, name=Path(args.scores).stem)
    print(report.to_text(), end="")
    return 0


def _cmd_gradcheck(args) -> int:
    worst = 0.0
    for seed in range(args.seed, args.seed + args.repeats):
        worst = max(worst, cnn.gradient_check(seed=seed))
    print(f"max relative gradient error over {args.repeats} seed(s): {worst:.3e}")
    if worst >= GRADCHECK_LIMIT:
        print(f"FAIL: error exceeds {GRADCHECK_LIMIT:.0e}", file=sys.stderr)
        return 1
    print(f"pass: below {GRADCHECK_LIMIT:.0e}")
    return 0


def _cmd_synth(args) -> int:
    manifest = generate_synthetic_dataset(args.out, n_per_class=args.n_per_class, seed=args.seed)
    print(f"wrote {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protview",
        description="Render multi-view protein images and evaluate view-ensemble classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render the protein x representation x pose image tree")
    _add_common(p)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("run", help="full cross-validated train/evaluate/fuse run")
    _add_common(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("fuse", help="sum-rule fuse score CSVs")
    p.add_argument("--scores", nargs="+", required=True, help="member score CSVs")
    p.add_argument("--out", required=True, help="fused score CSV path")
    p.add_argument("--name", default="fused")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("evaluate", help="report accuracy/AUC/confusion for a score CSV")
    p.add_argument("--scores", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference check of the classifier gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("synth", help="generate a synthetic two-class dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
