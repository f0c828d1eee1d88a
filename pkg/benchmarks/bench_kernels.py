#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallbacks.

Verifies agreement on every case it times: raster outputs must be
bit-identical across backends; classifier kernels must agree to 1e-10.

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from protview.dataset import make_helix_bundle, make_sheet_barrel  # noqa: E402
from protview.kernels import available_backends, available_net_backends  # noqa: E402
from protview.multiview import fit_camera_family, pose_grid, rotation_matrix  # noqa: E402
from protview.pdb import centroid  # noqa: E402
from protview.raster import DEPTH_SENTINEL  # noqa: E402
from protview.representations import RepresentationType, build_scene  # noqa: E402
from protview.scene import pack_scene, rotate_packed  # noqa: E402

LIGHT = np.array([0.0, 0.0, -1.0])


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raster() -> None:
    backends = available_backends()
    print(f"raster backends available: {', '.join(backends)}")
    rng = np.random.default_rng(0)
    cases = []
    for maker, rep in (
        (make_helix_bundle, RepresentationType.RIBBONS),
        (make_helix_bundle, RepresentationType.ROCKETS),
        (make_sheet_barrel, RepresentationType.SPACEFILL),
        (make_sheet_barrel, RepresentationType.WIREFRAME),
    ):
        structure = maker(f"bench_{rep.value}", np.random.default_rng(3))
        scene = build_scene(structure, rep)
        camera = fit_camera_family(scene, centroid(structure), (64, 64))
        kinds, params = pack_scene(scene)
        rot = rotation_matrix(pose_grid()[17])
        posed = rotate_packed(kinds, params, rot, centroid(structure))
        cases.append((rep.value, kinds, posed, camera))

    print(f"\n{'scene':<12} {'prims':>6} " + " ".join(f"{n:>12}" for n in backends) + "   speedup")
    for name, kinds, params, camera in cases:
        times = {}
        outputs = {}
        for bname, backend in backends.items():
            def run():
                color = np.full((64, 64, 3), 255, dtype=np.uint8)
                depth = np.full((64, 64), DEPTH_SENTINEL)
                backend.raster_scene(
                    kinds, params, camera.scale, camera.offset[0], camera.offset[1],
                    LIGHT, 0.3, 0.7, color, depth,
                )
                return color, depth

            outputs[bname] = run()
            times[bname] = _time(run, 5)
        first = next(iter(outputs.values()))
        for out in outputs.values():
            assert np.array_equal(out[0], first[0]), "raster backends disagree"
            assert np.array_equal(out[1], first[1]), "raster backends disagree"
        row = f"{name:<12} {len(kinds):>6} " + " ".join(
            f"{times[b] * 1000:>10.2f}ms" for b in backends
        )
        if len(times) > 1:
            ts = list(times.values())
            row += f"   {ts[0] / ts[-1]:>6.1f}x"
        print(row + "   (bit-identical)")


def bench_classifier() -> None:
    backends = available_net_backends()
    print(f"\nclassifier backends available: {', '.join(backends)}")
    rng = np.random.default_rng(1)
    x1 = np.ascontiguousarray(np.pad(rng.random((30, 64, 64, 3)), ((0, 0), (1, 1), (1, 1), (0, 0))))
    w1 = np.ascontiguousarray(rng.normal(0, 0.1, (3, 3, 3, 8)))
    x2 = np.ascontiguousarray(np.pad(rng.random((30, 32, 32, 8)), ((0, 0), (1, 1), (1, 1), (0, 0))))
    w2 = np.ascontiguousarray(rng.normal(0, 0.1, (3, 3, 8, 16)))
    cases = [
        ("conv 64x64x3->8", x1, w1),
        ("conv 32x32x8->16", x2, w2),
    ]
    print(f"\n{'kernel':<18} " + " ".join(f"{n:>12}" for n in backends) + "   speedup")
    for name, xp, w in cases:
        b = np.zeros(w.shape[3])
        times = {}
        outputs = {}
        for bname, backend in backends.items():
            outputs[bname] = backend.conv2d_forward(xp, w, b)
            times[bname] = _time(lambda: backend.conv2d_forward(xp, w, b), 5)
        vals = list(outputs.values())
        agree = all(np.allclose(vals[0], v, rtol=1e-10, atol=1e-10) for v in vals[1:])
        assert agree, "classifier backends disagree"
        row = f"{name:<18} " + " ".join(f"{times[b_] * 1000:>10.2f}ms" for b_ in backends)
        if len(times) > 1:
            ts = list(times.values())
            row += f"   {ts[0] / ts[-1]:>6.1f}x"
        print(row + "   (allclose 1e-10)")


if __name__ == "__main__":
    bench_raster()
    bench_classifier()
