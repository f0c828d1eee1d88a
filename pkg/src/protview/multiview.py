"""Pose enumeration, scene rotation about the centroid, and camera fitting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CameraMismatchError, EmptyAxisError, EmptySceneError
from .scene import Cylinder, Scene, Sphere, TriMesh, scene_bounds

DEFAULT_ANGLES = (0.0, 45.0, 90.0, 135.0, 180.0)


@dataclass(frozen=True)
class ViewPose:
    rx: float
    ry: float
    rz: float

    def name(self) -> str:
        """Filename token, e.g. rx0_ry45_rz180."""
        return f"rx{round(self.rx)}_ry{round(self.ry)}_rz{round(self.rz)}"


@dataclass(frozen=True)
class RotationGrid:
    angles_x: tuple[float, ...] = DEFAULT_ANGLES
    angles_y: tuple[float, ...] = DEFAULT_ANGLES
    angles_z: tuple[float, ...] = DEFAULT_ANGLES

    @classmethod
    def from_step(cls, step: float, stop: float = 180.0) -> "RotationGrid":
        n = int(round(stop / step))
        angles = tuple(step * i for i in range(n + 1))
        return cls(angles, angles, angles)

    def __len__(self) -> int:
        return len(self.angles_x) * len(self.angles_y) * len(self.angles_z)


def pose_grid(grid: RotationGrid | None = None) -> list[ViewPose]:
    """All poses of the grid in lexicographic (x, y, z) order."""
    grid = grid if grid is not None else RotationGrid()
    for axis in (grid.angles_x, grid.angles_y, grid.angles_z):
        if not axis:
            raise EmptyAxisError("rotation grid axis has no angles")
    return [
        ViewPose(rx, ry, rz)
        for rx, ry, rz in itertools.product(grid.angles_x, grid.angles_y, grid.angles_z)
    ]


def subsample_poses(poses: list[ViewPose], count: int, seed: int) -> list[ViewPose]:
    """Deterministic pose budget: seeded subsample below the grid size,
    refined 6x6x6 grid minus seeded removals above it."""
    if count == len(poses):
        return list(poses)
    rng = np.random.default_rng(seed)
    if count < len(poses):
        keep = sorted(rng.choice(len(poses), size=count, replace=False).tolist())
        return [poses[i] for i in keep]
    k = 6
    while k**3 < count:
        k += 1
    step = 180.0 / (k - 1)
    fine = pose_grid(RotationGrid.from_step(step))
    drop = set(rng.choice(len(fine), size=len(fine) - count, replace=False).tolist())
    return [p for i, p in enumerate(fine) if i not in drop]


def rotation_matrix(pose: ViewPose) -> np.ndarray:
    """R = Rz(rz) @ Ry(ry) @ Rx(rx); right-handed, counterclockwise angles."""
    ax, ay, az = (math.radians(v) for v in (pose.rx, pose.ry, pose.rz))
    cx, sx = math.cos(ax), math.sin(ax)
    cy, sy = math.cos(ay), math.sin(ay)
    cz, sz = math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def _transform(p, rot: np.ndarray, center: np.ndarray) -> tuple[float, float, float]:
    return tuple(rot @ (np.asarray(p, dtype=np.float64) - center) + center)


def pose_scene(scene: Scene, pose: ViewPose, center) -> Scene:
    """Rotate every primitive coordinate about ``center``; radii and colors
    are unchanged."""
    rot = rotation_matrix(pose)
    c = np.asarray(center, dtype=np.float64)
    prims = []
    for prim in scene.primitives:
        if isinstance(prim, Sphere):
            prims.append(Sphere(_transform(prim.center, rot, c), prim.radius, prim.color))
        elif isinstance(prim, Cylinder):
            prims.append(
                Cylinder(
                    _transform(prim.end_a, rot, c),
                    _transform(prim.end_b, rot, c),
                    prim.radius,
                    prim.color,
                    prim.capped,
                )
            )
        else:
            verts = (prim.vertices - c) @ rot.T + c
            prims.append(TriMesh(verts, prim.triangles.copy(), prim.face_colors.copy()))
    return Scene(scene.source_id, scene.representation, prims)


@dataclass(frozen=True)
class OrthoCamera:
    """Orthographic world->pixel map: u = ox + scale*x, v = oy - scale*y."""

    scale: float
    offset: tuple[float, float]
    image_size: tuple[int, int]
    margin_fraction: float = 0.05


def fit_camera(
    scene: Scene, image_size: tuple[int, int], margin_fraction: float = 0.05
) -> OrthoCamera:
    """Fit one scene: bounding box (radii included) fills the usable area."""
    if not scene.primitives:
        raise EmptySceneError("cannot fit camera to an empty scene")
    lo, hi = scene_bounds(scene)
    w, h = image_size
    extent = hi - lo
    usable = (w * (1.0 - 2.0 * margin_fraction), h * (1.0 - 2.0 * margin_fraction))
    scales = [usable[i] / extent[i] for i in range(2) if extent[i] > 0.0]
    scale = min(scales) if scales else 1.0
    cx, cy = (lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0
    return OrthoCamera(
        scale=scale,
        offset=(w / 2.0 - scale * cx, h / 2.0 + scale * cy),
        image_size=(w, h),
        margin_fraction=margin_fraction,
    )


def fit_camera_family(
    scene: Scene,
    center,
    image_size: tuple[int, int],
    margin_fraction: float = 0.05,
) -> OrthoCamera:
    """Fit one camera valid for every rotation of ``scene`` about ``center``.

    Uses the bounding sphere around the rotation center, so zoom carries no
    pose information.
    """
    if not scene.primitives:
        raise EmptySceneError("cannot fit camera to an empty scene")
    c = np.asarray(center, dtype=np.float64)
    radius = 0.0
    for prim in scene.primitives:
        if isinstance(prim, Sphere):
            radius = max(radius, float(np.linalg.norm(np.asarray(prim.center) - c)) + prim.radius)
        elif isinstance(prim, Cylinder):
            for end in (prim.end_a, prim.end_b):
                radius = max(radius, float(np.linalg.norm(np.asarray(end) - c)) + prim.radius)
        else:
            if len(prim.vertices):
                d = np.linalg.norm(prim.vertices - c, axis=1)
                radius = max(radius, float(d.max()))
    w, h = image_size
    usable = min(w, h) * (1.0 - 2.0 * margin_fraction)
    scale = usable / (2.0 * radius) if radius > 0 else 1.0
    return OrthoCamera(
        scale=scale,
        offset=(w / 2.0 - scale * float(c[0]), h / 2.0 + scale * float(c[1])),
        image_size=(w, h),
        margin_fraction=margin_fraction,
    )


def check_camera_bounds(lo, hi, camera: OrthoCamera, slack: float = 0.01) -> None:
    """Raise :class:`CameraMismatchError` when world bounds [lo, hi] project
    outside the image by more than ``slack`` of the image size."""
    w, h = camera.image_size
    ox, oy = camera.offset
    u = (ox + camera.scale * lo[0], ox + camera.scale * hi[0])
    v = (oy - camera.scale * hi[1], oy - camera.scale * lo[1])
    if min(u) < -slack * w or max(u) > (1.0 + slack) * w:
        raise CameraMismatchError("scene exceeds camera bounds in x")
    if min(v) < -slack * h or max(v) > (1.0 + slack) * h:
        raise CameraMismatchError("scene exceeds camera bounds in y")


def check_camera(scene: Scene, camera: OrthoCamera, slack: float = 0.01) -> None:
    """Scene-level wrapper around :func:`check_camera_bounds`; empty scenes
    trivially fit."""
    if not scene.primitives:
        return
    lo, hi = scene_bounds(scene)
    check_camera_bounds(lo, hi, camera, slack)
