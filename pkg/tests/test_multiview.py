import numpy as np
import pytest

from protview.errors import CameraMismatchError, EmptyAxisError
from protview.multiview import (
    OrthoCamera,
    RotationGrid,
    ViewPose,
    check_camera,
    fit_camera,
    fit_camera_family,
    pose_grid,
    pose_scene,
    rotation_matrix,
    subsample_poses,
)
from protview.scene import Cylinder, Scene, Sphere, TriMesh


def test_default_grid_is_125_lexicographic():
    poses = pose_grid()
    assert len(poses) == 125
    assert poses[0] == ViewPose(0, 0, 0)
    assert poses[1] == ViewPose(0, 0, 45)
    assert poses[-1] == ViewPose(180, 180, 180)
    angles = {0.0, 45.0, 90.0, 135.0, 180.0}
    for pose in poses:
        assert {pose.rx, pose.ry, pose.rz} <= angles


def test_grid_step_90_gives_27_poses():
    assert len(pose_grid(RotationGrid.from_step(90.0))) == 27


def test_pose_count_is_axis_product():
    grid = RotationGrid((0.0, 10.0), (0.0, 20.0, 40.0), (0.0,))
    assert len(pose_grid(grid)) == 2 * 3 * 1


def test_empty_axis_raises():
    with pytest.raises(EmptyAxisError):
        pose_grid(RotationGrid((), (0.0,), (0.0,)))


def test_pose_name_round_trip():
    assert ViewPose(0, 45, 180).name() == "rx0_ry45_rz180"


def test_subsample_poses():
    poses = pose_grid()
    sub = subsample_poses(poses, 30, seed=3)
    assert len(sub) == 30
    assert len(set(sub)) == 30
    assert all(p in poses for p in sub)
    assert sub == subsample_poses(poses, 30, seed=3)  # deterministic
    assert subsample_poses(poses, 125, seed=3) == poses
    big = subsample_poses(poses, 200, seed=3)
    assert len(big) == 200
    assert len(set(big)) == 200


# -- rotation matrices ------------------------------------------------------------


def test_rotation_identity():
    assert np.allclose(rotation_matrix(ViewPose(0, 0, 0)), np.eye(3))


def test_rotation_x_90():
    r = rotation_matrix(ViewPose(90, 0, 0))
    assert np.allclose(r @ [0, 1, 0], [0, 0, 1], atol=1e-12)


def test_rotation_composed_90_90():
    r = rotation_matrix(ViewPose(90, 90, 0))
    # Ry(90) @ Rx(90) sends +y to +z to +x
    assert np.allclose(r @ [0, 1, 0], [1, 0, 0], atol=1e-12)


def test_rotation_orthonormal_1000_poses():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pose = ViewPose(*rng.uniform(0, 180, 3))
        r = rotation_matrix(pose)
        assert np.abs(r.T @ r - np.eye(3)).max() < 1e-12
        assert abs(np.linalg.det(r) - 1.0) < 1e-12


# -- pose_scene -------------------------------------------------------------------


def _sphere_scene(center, radius=0.5):
    return Scene("t", "spacefill", [Sphere(tuple(center), radius, (10, 20, 30))])


def test_pose_scene_identity():
    scene = _sphere_scene((1.0, 2.0, 3.0))
    posed = pose_scene(scene, ViewPose(0, 0, 0), (0.0, 0.0, 0.0))
    assert np.allclose(posed.primitives[0].center, (1, 2, 3), atol=1e-12)


def test_pose_scene_rz90_about_center():
    center = np.array([5.0, 5.0, 5.0])
    scene = _sphere_scene(center + [1, 0, 0])
    posed = pose_scene(scene, ViewPose(0, 0, 90), center)
    assert np.allclose(posed.primitives[0].center, center + [0, 1, 0], atol=1e-9)
    assert posed.primitives[0].radius == 0.5
    assert posed.primitives[0].color == (10, 20, 30)


def test_pose_scene_composition():
    rng = np.random.default_rng(1)
    prims = [Sphere(tuple(rng.normal(0, 2, 3)), 0.3, (1, 2, 3)) for _ in range(5)]
    scene = Scene("t", "spacefill", prims)
    center = (0.5, -0.5, 1.0)
    twice = pose_scene(pose_scene(scene, ViewPose(90, 0, 0), center), ViewPose(90, 0, 0), center)
    once = pose_scene(scene, ViewPose(180, 0, 0), center)
    for a, b in zip(twice.primitives, once.primitives):
        assert np.allclose(a.center, b.center, atol=1e-9)


def test_pose_scene_centroid_fixed_point():
    rng = np.random.default_rng(2)
    centers = rng.normal(0, 3, (8, 3))
    scene = Scene("t", "spacefill", [Sphere(tuple(c), 0.2, (0, 0, 0)) for c in centers])
    centroid = centers.mean(axis=0)
    posed = pose_scene(scene, ViewPose(45, 90, 135), centroid)
    new_centroid = np.mean([p.center for p in posed.primitives], axis=0)
    assert np.allclose(new_centroid, centroid, atol=1e-9)


def test_pose_scene_handles_all_primitive_kinds():
    mesh = TriMesh(
        np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]),
        np.array([[0, 1, 2]]),
        np.array([[5, 6, 7]], dtype=np.uint8),
    )
    scene = Scene(
        "t",
        "x",
        [Sphere((1, 0, 0), 0.5, (1, 1, 1)), Cylinder((0, 0, 0), (1, 0, 0), 0.2, (2, 2, 2), True), mesh],
    )
    posed = pose_scene(scene, ViewPose(0, 0, 90), (0.0, 0.0, 0.0))
    assert np.allclose(posed.primitives[0].center, (0, 1, 0), atol=1e-12)
    assert np.allclose(posed.primitives[1].end_b, (0, 1, 0), atol=1e-12)
    assert posed.primitives[1].capped
    assert np.allclose(posed.primitives[2].vertices[1], (0, 1, 0), atol=1e-12)


def test_rotate_packed_matches_pose_scene():
    from protview.scene import pack_scene, rotate_packed
    from protview.multiview import rotation_matrix

    rng = np.random.default_rng(3)
    mesh = TriMesh(
        rng.normal(0, 2, (4, 3)),
        np.array([[0, 1, 2], [1, 2, 3]]),
        np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8),
    )
    scene = Scene(
        "t",
        "x",
        [
            Sphere(tuple(rng.normal(0, 2, 3)), 0.4, (9, 9, 9)),
            Cylinder(tuple(rng.normal(0, 2, 3)), tuple(rng.normal(0, 2, 3)), 0.3, (8, 8, 8), True),
            mesh,
        ],
    )
    pose = ViewPose(30, 60, 120)
    center = np.array([0.3, -0.7, 1.1])
    kinds, params = pack_scene(scene)
    fast = rotate_packed(kinds, params, rotation_matrix(pose), center)
    kinds2, slow = pack_scene(pose_scene(scene, pose, center))
    assert np.array_equal(kinds, kinds2)
    assert np.allclose(fast, slow, atol=1e-12)


# -- cameras ----------------------------------------------------------------------


def test_fit_camera_sphere_example():
    scene = _sphere_scene((0.0, 0.0, 0.0), radius=1.0)
    cam = fit_camera(scene, (100, 100), margin_fraction=0.05)
    assert abs(cam.scale - 45.0) < 1e-12  # 90 usable px over 2 angstrom
    assert np.allclose(cam.offset, (50.0, 50.0))


def test_fit_camera_deterministic():
    scene = _sphere_scene((1.0, 2.0, 3.0))
    assert fit_camera(scene, (64, 64)) == fit_camera(scene, (64, 64))


def test_fit_camera_degenerate_point():
    mesh = TriMesh(
        np.zeros((3, 3)), np.array([[0, 1, 2]]), np.array([[0, 0, 0]], dtype=np.uint8)
    )
    cam = fit_camera(Scene("t", "x", [mesh]), (64, 64))
    assert cam.scale == 1.0
    assert np.allclose(cam.offset, (32.0, 32.0))


def test_fit_camera_containment_100_random_scenes():
    rng = np.random.default_rng(7)
    for _ in range(100):
        prims = [
            Sphere(tuple(rng.normal(0, 5, 3)), float(rng.uniform(0.1, 2)), (0, 0, 0))
            for _ in range(rng.integers(1, 8))
        ]
        scene = Scene("t", "spacefill", prims)
        cam = fit_camera(scene, (48, 48))
        check_camera(scene, cam, slack=0.0)  # raises if anything sticks out


def test_fit_camera_family_pose_invariant():
    rng = np.random.default_rng(8)
    centers = rng.normal(0, 4, (6, 3))
    scene = Scene("t", "spacefill", [Sphere(tuple(c), 0.4, (0, 0, 0)) for c in centers])
    center = centers.mean(axis=0)
    cam = fit_camera_family(scene, center, (64, 64))
    for pose in (ViewPose(0, 0, 0), ViewPose(45, 90, 135), ViewPose(180, 180, 180)):
        check_camera(pose_scene(scene, pose, center), cam, slack=0.0)


def test_check_camera_mismatch():
    scene = _sphere_scene((0.0, 0.0, 0.0), radius=10.0)
    tiny = OrthoCamera(scale=10.0, offset=(32.0, 32.0), image_size=(64, 64))
    with pytest.raises(CameraMismatchError):
        check_camera(scene, tiny)
