"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The end-to-end criteria
(7 and 8) render and cross-validate a synthetic two-class dataset at 125
views per protein; expect roughly 10-25 minutes single-threaded depending on
whether the compiled kernels are built.
"""


import numpy as np
import pytest

from conftest import random_packed_scene
from raster_reference import render_reference
from test_cnn import toy_image_task
from protview import cnn, kernels
from protview.cnn import TrainConfig
from protview.dataset import generate_synthetic_dataset, load_manifest
from protview.evaluation import auc_macro_ovr, stratified_kfold
from protview.fusion import ScoreMatrix, oracle_accuracy, sum_rule_fuse
from protview.multiview import ViewPose, pose_grid
from protview.pipeline import RunConfig, run_pipeline
from protview.raster import DEPTH_SENTINEL


def _report(criterion: str, passed: bool, detail: str = "") -> None:
    tag = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] {criterion}{suffix}", flush=True)
    assert passed, f"{criterion}{suffix}"


def test_criterion_1_view_count():
    poses = pose_grid()
    expected_angles = (0.0, 45.0, 90.0, 135.0, 180.0)
    expected = [
        ViewPose(rx, ry, rz)
        for rx in expected_angles
        for ry in expected_angles
        for rz in expected_angles
    ]
    ok = len(poses) == 125 and poses == expected
    _report("criterion 1: default grid = exactly 125 poses in lexicographic order", ok)


def test_criterion_2_rasterizer_oracle():
    rng = np.random.default_rng(2024)
    light = np.array([0.0, 0.0, -1.0])
    mismatches = 0
    for _ in range(500):
        kinds, params = random_packed_scene(rng, max_prims=10)
        color = np.full((32, 32, 3), 255, dtype=np.uint8)
        depth = np.full((32, 32), DEPTH_SENTINEL)
        kernels.raster_scene(kinds, params, 6.0, 16.0, 16.0, light, 0.3, 0.7, color, depth)
        ref_color, ref_depth = render_reference(
            kinds, params, 6.0, 16.0, 16.0, light, 0.3, 0.7, 32, 32
        )
        if not (np.array_equal(color, ref_color) and np.array_equal(depth, ref_depth)):
            mismatches += 1
    _report(
        "criterion 2: rasterizer bit-identical to brute-force reference on 500 scenes",
        mismatches == 0,
        f"mismatching scenes: {mismatches}, backend: {kernels.BACKEND}",
    )


def test_criterion_3_gradient_check():
    worst = max(cnn.gradient_check(seed=seed) for seed in range(20))
    _report(
        "criterion 3: analytic vs central-difference gradients, 20 seeds",
        worst < 1e-4,
        f"max relative error {worst:.3e}",
    )


def test_criterion_4_training_hyperparameters():
    config = TrainConfig()
    serialized = config.to_dict()
    values_ok = (
        serialized["epochs"] == 20
        and serialized["batch_size"] == 30
        and serialized["learning_rate"] == 0.001
    )
    images, labels = toy_image_task(300, seed=0)
    net, _ = cnn.train(images, labels, cnn.default_network_spec(2, 16), TrainConfig(seed=0))
    accuracy = float((cnn.predict(net, images).argmax(axis=1) == labels).mean())
    _report(
        "criterion 4: default config = 20 epochs / batch 30 / lr 0.001; toy task solved",
        values_ok and accuracy == 1.0,
        f"toy training accuracy {accuracy:.3f}",
    )


def _random_prob_rows(rng, n, k):
    raw = rng.random((n, k)) + 1e-9
    return raw / raw.sum(axis=1, keepdims=True)


def test_criterion_5_fusion_properties():
    rng = np.random.default_rng(55)

    dominance_ok = True
    for _ in range(1000):
        n = int(rng.integers(3, 25))
        k = int(rng.integers(2, 6))
        pool = [
            ScoreMatrix(tuple(f"p{i}" for i in range(n)), _random_prob_rows(rng, n, k))
            for _ in range(rng.integers(1, 5))
        ]
        labels = rng.integers(0, k, n)
        oracle = oracle_accuracy(pool, labels)
        if any(oracle < (m.argmax() == labels).mean() for m in pool):
            dominance_ok = False
            break

    rescale_ok = True
    for _ in range(200):
        members = [
            ScoreMatrix(tuple(f"p{i}" for i in range(12)), _random_prob_rows(rng, 12, 4))
            for _ in range(3)
        ]
        fused = sum_rule_fuse(members).argmax()
        c = float(rng.uniform(0.01, 50.0))
        scaled = np.mean([c * m.scores for m in members], axis=0).argmax(axis=1)
        if not np.array_equal(fused, scaled):
            rescale_ok = False
            break

    auc_ok = True
    worst_gap = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 201))
        k = int(rng.integers(2, 5))
        raw = rng.integers(0, 6, (n, k)) + 1.0  # quantized scores force ties
        rows = raw / raw.sum(axis=1, keepdims=True)
        labels = rng.integers(0, k, n)
        if len(np.unique(labels)) < 2:
            continue
        scores = ScoreMatrix(tuple(f"p{i}" for i in range(n)), rows)
        per_class = []
        for c in np.unique(labels):
            pos = rows[labels == c, c][:, None]
            neg = rows[labels != c, c][None, :]
            conc = (pos > neg).sum() + 0.5 * (pos == neg).sum()
            per_class.append(conc / (pos.size * neg.shape[1]))
        brute = 100.0 * float(np.mean(per_class))
        gap = abs(auc_macro_ovr(scores, labels) - brute)
        worst_gap = max(worst_gap, gap)
        if gap > 1e-9:
            auc_ok = False

    _report(
        "criterion 5: oracle dominance, rescale-invariant fusion, AUC = concordance",
        dominance_ok and rescale_ok and auc_ok,
        f"worst AUC gap {worst_gap:.2e}",
    )


def test_criterion_6_stratification():
    balanced = {f"p{c}_{i}": c for c in range(7) for i in range(100)}
    plan = stratified_kfold(balanced, k=10, seed=3)
    balanced_ok = True
    for c in range(7):
        counts = [0] * 10
        for pid, fold in plan.assignment.items():
            if balanced[pid] == c:
                counts[fold] += 1
        if counts != [10] * 10:
            balanced_ok = False

    sizes = [9, 9, 9, 50, 18]
    skewed = {f"c{c}_{i}": c for c, n in enumerate(sizes) for i in range(n)}
    plan2 = stratified_kfold(skewed, k=10, seed=4)
    skew_ok = True
    for c, n in enumerate(sizes):
        counts = [0] * 10
        for pid, fold in plan2.assignment.items():
            if skewed[pid] == c:
                counts[fold] += 1
        if sum(counts) != n or max(counts) - min(counts) > 1:
            skew_ok = False

    # views inherit the protein fold, so no protein straddles train/test
    views = {f"{pid}|view{v}": pid for pid in skewed for v in range(3)}
    leakage_ok = all(
        plan2.assignment[pid] == plan2.assignment[views[vid]] for vid, pid in views.items()
    )
    _report(
        "criterion 6: stratified folds balanced per class; no protein straddles folds",
        balanced_ok and skew_ok and leakage_ok,
    )


# -- end-to-end criteria -------------------------------------------------------


def _acceptance_config() -> RunConfig:
    return RunConfig(
        representations=("ribbons", "rockets"),
        grid_step=45.0,
        image_size=64,
        train=TrainConfig(epochs=20, batch_size=30, learning_rate=0.02, seed=7),
        folds=2,
        seed=7,
        auto_top=(2,),
        view_counts=(30,),
        sweep_representation="ribbons",
    )


@pytest.fixture(scope="session")
def synthetic_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    manifest_path = generate_synthetic_dataset(root / "data", n_per_class=20, seed=7)
    manifest = load_manifest(manifest_path)
    config = _acceptance_config()
    result = run_pipeline(manifest, config, root / "run")
    return manifest, config, result


def test_criterion_7_end_to_end(synthetic_run):
    _, _, result = synthetic_run
    summary = {name: (auc, acc) for name, auc, acc in result.summary}

    top2_auc, top2_acc = summary["top2"]
    accuracy_ok = top2_acc >= 0.90

    member_aucs = [summary["ribbons"][0], summary["rockets"][0]]
    fusion_ok = top2_auc >= float(np.mean(member_aucs))

    auc_125 = summary["ribbons"][0]
    auc_30 = result.sweep[0][1]
    trend_ok = auc_125 >= auc_30

    _report(
        "criterion 7: synthetic end-to-end (accuracy, fusion benefit, view trend)",
        accuracy_ok and fusion_ok and trend_ok,
        f"top2 acc {top2_acc:.3f}, top2 auc {top2_auc:.2f} vs member mean "
        f"{float(np.mean(member_aucs)):.2f}, auc 125v {auc_125:.2f} vs 30v {auc_30:.2f}",
    )


def test_criterion_8_determinism(synthetic_run, tmp_path_factory):
    manifest, config, result = synthetic_run
    fresh = tmp_path_factory.mktemp("acceptance_rerun")
    rerun = run_pipeline(manifest, config, fresh / "run")
    files = ["scores/ribbons.csv", "scores/rockets.csv", "scores/top2.csv", "sweep/views30_ribbons.csv"]
    identical = all(
        (result.out_dir / f).read_bytes() == (rerun.out_dir / f).read_bytes() for f in files
    )
    _report(
        "criterion 8: rerun with the same seed reproduces byte-identical score CSVs",
        identical,
    )
