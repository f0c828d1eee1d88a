"""End-to-end runs: render image trees, train per representation and fold,
average views, fuse, and report.

All interchange between stages is file-based (PNG + CSV) so each stage can be
rerun or inspected on its own.  Rendering is idempotent through content
hashes; score CSVs are byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import cnn
from .dataset import DatasetManifest
from .errors import PipelineError, UnreadableImageError
from .evaluation import (
    EvalReport,
    FoldPlan,
    evaluate,
    stratified_kfold,
    write_confusion_csv,
    write_score_csv,
)
from .fusion import EnsembleSpec, ScoreMatrix, average_views, oracle_accuracy, sum_rule_fuse
from .multiview import (
    RotationGrid,
    ViewPose,
    fit_camera_family,
    pose_grid,
    rotation_matrix,
    subsample_poses,
)
from .pdb import centroid, parse_pdb
from .raster import RenderConfig, read_image, render_packed, write_image
from .representations import RepresentationType, StyleConfig, build_scene
from .scene import pack_scene, rotate_packed

_HASH_VERSION = "protview-render-v1"
WORKERS_ENV = "PROTVIEW_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    representations: tuple[str, ...]
    grid_step: float = 45.0
    image_size: int = 64
    train: cnn.TrainConfig = field(default_factory=cnn.TrainConfig)
    folds: int = 10
    seed: int = 0
    ensembles: tuple[EnsembleSpec, ...] = ()
    auto_top: tuple[int, ...] = ()
    view_counts: tuple[int, ...] = ()
    sweep_representation: str | None = None
    include_hetero: bool = False
    supersample: bool = False
    save_models: bool = False

    def __post_init__(self) -> None:
        if not self.representations:
            raise ValueError("at least one representation required")
        for rep in self.representations:
            RepresentationType.from_name(rep)
        for spec in self.ensembles:
            for member in spec.members:
                if member not in self.representations:
                    raise ValueError(f"ensemble member {member!r} not among representations")
        if self.sweep_representation is not None and self.sweep_representation not in self.representations:
            raise ValueError(f"sweep representation {self.sweep_representation!r} not among representations")

    def grid(self) -> RotationGrid:
        return RotationGrid.from_step(self.grid_step)

    def to_json(self) -> str:
        data = dataclasses.asdict(self)
        data["train"] = self.train.to_dict()
        data["ensembles"] = [
            {"name": e.name, "members": list(e.members)} for e in self.ensembles
        ]
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        data["representations"] = tuple(data["representations"])
        data["train"] = cnn.TrainConfig(**data.get("train", {}))
        data["ensembles"] = tuple(
            EnsembleSpec(e["name"], tuple(e["members"])) for e in data.get("ensembles", [])
        )
        for key in ("auto_top", "view_counts"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass
class RenderResult:
    index_rows: list[tuple[str, str, str, str]]  # protein, representation, pose, path
    failures: list[tuple[str, str, str]]  # protein, representation, error
    written: int
    skipped: int


def _workers(explicit: int | None) -> int:
    if explicit is not None:
        return max(1, explicit)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _image_hash(pdb_bytes: bytes, rep: str, config: RunConfig, pose_name: str) -> str:
    h = hashlib.sha256()
    for part in (
        _HASH_VERSION,
        rep,
        pose_name,
        str(config.image_size),
        str(config.supersample),
        str(config.include_hetero),
        json.dumps(dataclasses.asdict(StyleConfig()), sort_keys=True),
    ):
        h.update(part.encode())
        h.update(b"\0")
    h.update(pdb_bytes)
    return h.hexdigest()


def _render_job(args) -> tuple[list, list, int, int, dict]:
    (protein_id, pdb_path, rep_name, pose_names, out_dir, cfg_json, state) = args
    config = RunConfig.from_json(cfg_json)
    out_dir = Path(out_dir)
    rows: list[tuple[str, str, str, str]] = []
    written = skipped = 0
    new_state: dict[str, str] = {}
    try:
        pdb_bytes = Path(pdb_path).read_bytes()
        structure = parse_pdb(
            pdb_bytes.decode(errors="replace"),
            structure_id=protein_id,
            include_hetero=config.include_hetero,
        )
        rep = RepresentationType.from_name(rep_name)
        scene = build_scene(structure, rep)
        center = centroid(structure)
        size = (config.image_size, config.image_size)
        camera = fit_camera_family(scene, center, size)
        render_cfg = RenderConfig(image_size=size, supersample=config.supersample)
        kinds, params = pack_scene(scene)
        for pose_name in pose_names:
            fname = f"{protein_id}_{rep_name}_{pose_name}.png"
            path = out_dir / fname
            digest = _image_hash(pdb_bytes, rep_name, config, pose_name)
            rows.append((protein_id, rep_name, pose_name, fname))
            new_state[fname] = digest
            if state.get(fname) == digest and path.is_file():
                skipped += 1
                continue
            rot = rotation_matrix(_pose_from_name(pose_name))
            posed = rotate_packed(kinds, params, rot, center)
            write_image(render_packed(kinds, posed, camera, render_cfg), path)
            written += 1
    except Exception as exc:  # noqa: BLE001 - per-protein failures are collected
        return [], [(protein_id, rep_name, f"{type(exc).__name__}: {exc}")], written, skipped, {}
    return rows, [], written, skipped, new_state


def _pose_from_name(name: str) -> ViewPose:
    values = {}
    for part in name.split("_"):
        if len(part) < 3 or part[0] != "r" or part[1] not in "xyz":
            raise ValueError(f"bad pose token {part!r} in {name!r}")
        values[part[1]] = float(part[2:])
    return ViewPose(values["x"], values["y"], values["z"])


def render_dataset(
    manifest: DatasetManifest,
    config: RunConfig,
    out_dir,
    workers: int | None = None,
    poses: list[ViewPose] | None = None,
    update_index: bool = True,
) -> RenderResult:
    """Render protein x representation x pose PNGs plus index/failure files.

    Unchanged inputs are skipped via content hashes recorded in state.json.
    """
    renders = Path(out_dir)
    renders.mkdir(parents=True, exist_ok=True)
    state_path = renders / "state.json"
    state: dict[str, str] = {}
    if state_path.is_file():
        state = json.loads(state_path.read_text())
    poses = poses if poses is not None else pose_grid(config.grid())
    pose_names = [p.name() for p in poses]
    cfg_json = config.to_json()
    jobs = [
        (
            e.protein_id,
            str(e.pdb_path),
            rep,
            pose_names,
            str(renders),
            cfg_json,
            {k: v for k, v in state.items() if k.startswith(f"{e.protein_id}_{rep}_")},
        )
        for e in manifest.entries
        for rep in config.representations
    ]
    n_workers = _workers(workers)
    if n_workers > 1:
        with Pool(n_workers) as pool:
            results = pool.map(_render_job, jobs)
    else:
        results = [_render_job(job) for job in jobs]

    index_rows: list[tuple[str, str, str, str]] = []
    failures: list[tuple[str, str, str]] = []
    written = skipped = 0
    for rows, fails, w, s, updates in results:
        index_rows.extend(rows)
        failures.extend(fails)
        written += w
        skipped += s
        state.update(updates)
    state_path.write_text(json.dumps(state, indent=0, sort_keys=True))
    if update_index:
        with open(renders / "index.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["protein_id", "representation", "pose", "path"])
            writer.writerows(index_rows)
        with open(renders / "failures.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["protein_id", "representation", "error"])
            writer.writerows(failures)
    return RenderResult(index_rows, failures, written, skipped)


def _derived_seed(base: int, rep_index: int, fold: int, variant: int = 0) -> int:
    return abs(base * 1_000_003 + variant * 10_007 + rep_index * 1_009 + fold) % (2**31)


def _train_eval_representation(
    manifest: DatasetManifest,
    rep: str,
    pose_names: list[str],
    renders_dir: Path,
    plan: FoldPlan,
    config: RunConfig,
    rep_index: int,
    models_dir: Path | None,
    variant: int = 0,
) -> ScoreMatrix:
    """Per-fold training on out-of-fold views, view-averaged protein scores."""
    labels = manifest.labels
    ids = [e.protein_id for e in manifest.entries]
    stacks: dict[str, np.ndarray] = {}
    for pid in ids:
        imgs = []
        for pose in pose_names:
            path = renders_dir / f"{pid}_{rep}_{pose}.png"
            try:
                imgs.append(read_image(path))
            except OSError as exc:
                raise UnreadableImageError(f"{path}: {exc}") from exc
        stacks[pid] = np.stack(imgs)
    spec = cnn.default_network_spec(manifest.n_classes, config.image_size)
    protein_rows: dict[str, np.ndarray] = {}
    for fold in range(plan.k):
        test_ids = [pid for pid in ids if plan.fold_of(pid) == fold]
        train_ids = [pid for pid in ids if plan.fold_of(pid) != fold]
        if not test_ids:
            continue
        if not train_ids:
            raise PipelineError(f"fold {fold} leaves no training proteins")
        x_train = np.concatenate([stacks[pid] for pid in train_ids])
        y_train = np.repeat([labels[pid] for pid in train_ids], len(pose_names))
        tcfg = dataclasses.replace(
            config.train, seed=_derived_seed(config.seed, rep_index, fold, variant)
        )
        try:
            network, history = cnn.train(x_train, y_train, spec, tcfg)
        except Exception as exc:
            raise PipelineError(f"training failed for {rep} fold {fold}: {exc}") from exc
        if models_dir is not None:
            tag = f"{rep}_fold{fold}" if variant == 0 else f"{rep}_v{variant}_fold{fold}"
            with open(models_dir / f"history_{tag}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["epoch", "loss"])
                for epoch, loss in enumerate(history, start=1):
                    writer.writerow([epoch, repr(loss)])
            if config.save_models:
                cnn.save_network(network, models_dir / f"model_{tag}.npz")
        x_test = np.concatenate([stacks[pid] for pid in test_ids])
        view_ids = [f"{pid}|{pose}" for pid in test_ids for pose in pose_names]
        probs = cnn.predict(network, x_test)
        view_matrix = ScoreMatrix(tuple(view_ids), probs)
        grouping = {vid: vid.split("|", 1)[0] for vid in view_ids}
        prot = average_views(view_matrix, grouping)
        for pid, row in zip(prot.row_ids, prot.scores):
            protein_rows[pid] = row
    missing = [pid for pid in ids if pid not in protein_rows]
    if missing:
        raise PipelineError(f"no out-of-fold scores for {missing}")
    return ScoreMatrix(tuple(ids), np.vstack([protein_rows[pid] for pid in ids]))


@dataclass
class RunResult:
    out_dir: Path
    summary: list[tuple[str, float | None, float]]  # name, auc, accuracy
    sweep: list[tuple[int, float | None, float]]  # views, auc, accuracy
    reports: dict[str, EvalReport]


def run_pipeline(
    manifest: DatasetManifest,
    config: RunConfig,
    out_dir,
    workers: int | None = None,
) -> RunResult:
    """Render (idempotently), cross-validate every representation, fuse, and
    write score CSVs plus a summary shaped representations + ensembles."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.json").write_text(config.to_json())
    manifest_hash = hashlib.sha256()
    for e in manifest.entries:
        manifest_hash.update(e.protein_id.encode())
        manifest_hash.update(e.pdb_path.read_bytes())
        manifest_hash.update(str(e.class_label).encode())
    (out_dir / "manifest_hash.txt").write_text(manifest_hash.hexdigest() + "\n")

    renders_dir = out_dir / "renders"
    rr = render_dataset(manifest, config, renders_dir, workers=workers)
    if rr.failures:
        names = ", ".join(f"{p}/{r}" for p, r, _ in rr.failures[:5])
        raise PipelineError(f"{len(rr.failures)} render failures (e.g. {names}); see failures.csv")

    scores_dir = out_dir / "scores"
    reports_dir = out_dir / "reports"
    models_dir = out_dir / "models"
    for d in (scores_dir, reports_dir, models_dir):
        d.mkdir(exist_ok=True)

    poses = pose_grid(config.grid())
    pose_names = [p.name() for p in poses]
    labels = manifest.labels
    plan = stratified_kfold(labels, k=config.folds, seed=config.seed)

    rep_matrices: dict[str, ScoreMatrix] = {}
    reports: dict[str, EvalReport] = {}
    summary: list[tuple[str, float | None, float]] = []
    for ri, rep in enumerate(config.representations):
        matrix = _train_eval_representation(
            manifest, rep, pose_names, renders_dir, plan, config, ri, models_dir
        )
        rep_matrices[rep] = matrix
        write_score_csv(scores_dir / f"{rep}.csv", matrix, labels, plan)
        report = evaluate(matrix, labels, plan, name=rep)
        reports[rep] = report
        _write_report(reports_dir, report)
        summary.append((rep, report.auc, report.accuracy))

    ranked = sorted(
        config.representations,
        key=lambda r: (-(reports[r].auc if reports[r].auc is not None else -1.0), r),
    )
    ensembles = list(config.ensembles)
    for k in config.auto_top:
        if 2 <= k <= len(ranked):
            ensembles.append(EnsembleSpec(f"top{k}", tuple(ranked[:k])))
    for spec in ensembles:
        fused = sum_rule_fuse([rep_matrices[m] for m in spec.members])
        write_score_csv(scores_dir / f"{spec.name}.csv", fused, labels, plan)
        report = evaluate(fused, labels, plan, name=spec.name)
        reports[spec.name] = report
        _write_report(reports_dir, report)
        summary.append((spec.name, report.auc, report.accuracy))

    label_vec = np.array([labels[pid] for pid in rep_matrices[config.representations[0]].row_ids])
    oracle = oracle_accuracy(list(rep_matrices.values()), label_vec)
    summary.append(("oracle", None, oracle))

    _write_summary(out_dir / "summary.csv", summary)
    (out_dir / "summary.txt").write_text(_summary_text(summary))

    sweep: list[tuple[int, float | None, float]] = []
    if config.view_counts:
        sweep_rep = config.sweep_representation or config.representations[0]
        rep_index = config.representations.index(sweep_rep)
        sweep_dir = out_dir / "sweep"
        sweep_dir.mkdir(exist_ok=True)
        sweep_cfg = dataclasses.replace(
            config, representations=(sweep_rep,), ensembles=(), auto_top=(),
            view_counts=(), sweep_representation=None,
        )
        for count in config.view_counts:
            sel = subsample_poses(poses, count, config.seed)
            sel_names = [p.name() for p in sel]
            # budgets above the base grid refine it; render any missing poses
            extra = render_dataset(
                manifest, sweep_cfg, renders_dir, workers=workers, poses=sel, update_index=False
            )
            if extra.failures:
                raise PipelineError(f"sweep render failures at {count} views")
            matrix = _train_eval_representation(
                manifest, sweep_rep, sel_names, renders_dir, plan, config,
                rep_index, models_dir=None, variant=count,
            )
            write_score_csv(sweep_dir / f"views{count}_{sweep_rep}.csv", matrix, labels, plan)
            report = evaluate(matrix, labels, plan, name=f"{sweep_rep} views={count}")
            sweep.append((count, report.auc, report.accuracy))
        with open(sweep_dir / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["views", "auc", "accuracy"])
            for count, auc, acc in sweep:
                writer.writerow([count, "" if auc is None else repr(auc), repr(acc)])

    return RunResult(out_dir=out_dir, summary=summary, sweep=sweep, reports=reports)


def _write_report(reports_dir: Path, report: EvalReport) -> None:
    (reports_dir / f"{report.name}.txt").write_text(report.to_text())
    write_confusion_csv(reports_dir / f"{report.name}_confusion.csv", report)


def _write_summary(path: Path, summary) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "auc", "accuracy"])
        for name, auc, acc in summary:
            writer.writerow([name, "" if auc is None else repr(auc), repr(acc)])


def _summary_text(summary) -> str:
    width = max(len(name) for name, _, _ in summary)
    lines = [f"{'name':<{width}}  {'auc':>7}  accuracy"]
    for name, auc, acc in summary:
        auc_s = "  n/a" if auc is None else f"{auc:7.2f}"
        lines.append(f"{name:<{width}}  {auc_s}  {acc:8.4f}")
    return "\n".join(lines) + "\n"
