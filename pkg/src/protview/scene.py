"""Render primitives and the packed form consumed by the raster kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .palettes import RGB

KIND_SPHERE = 0
KIND_CYLINDER = 1
KIND_TRIANGLE = 2

# Packed primitive row width (float64):
#   sphere:   cx cy cz r | R G B
#   cylinder: ax ay az bx by bz r capped | R G B
#   triangle: x0 y0 z0 x1 y1 z1 x2 y2 z2 | R G B
PACKED_WIDTH = 12


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float
    color: RGB

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class Cylinder:
    end_a: tuple[float, float, float]
    end_b: tuple[float, float, float]
    radius: float
    color: RGB
    capped: bool = False

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")


@dataclass(frozen=True)
class TriMesh:
    """Triangle list with one color per face."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int
    face_colors: np.ndarray  # (m, 3) uint8

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=np.float64)
        t = np.asarray(self.triangles, dtype=np.intp)
        c = np.asarray(self.face_colors, dtype=np.uint8)
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if len(c) != len(t):
            raise ValueError("one color per face required")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "face_colors", c)


ScenePrimitive = Sphere | Cylinder | TriMesh


@dataclass
class Scene:
    source_id: str
    representation: str
    primitives: list[ScenePrimitive] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.primitives)

    def count(self, kind: type) -> int:
        return sum(isinstance(p, kind) for p in self.primitives)


def pack_scene(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    """Flatten a scene into (kinds, params) arrays, preserving draw order.

    TriMesh primitives expand to one row per face.  The row order defines the
    depth-tie winner (first written wins).
    """
    kinds: list[int] = []
    rows: list[np.ndarray] = []
    for prim in scene.primitives:
        if isinstance(prim, Sphere):
            row = np.zeros(PACKED_WIDTH)
            row[0:3] = prim.center
            row[3] = prim.radius
            row[4:7] = prim.color
            kinds.append(KIND_SPHERE)
            rows.append(row)
        elif isinstance(prim, Cylinder):
            row = np.zeros(PACKED_WIDTH)
            row[0:3] = prim.end_a
            row[3:6] = prim.end_b
            row[6] = prim.radius
            row[7] = 1.0 if prim.capped else 0.0
            row[8:11] = prim.color
            kinds.append(KIND_CYLINDER)
            rows.append(row)
        elif isinstance(prim, TriMesh):
            verts = prim.vertices
            for face, color in zip(prim.triangles, prim.face_colors):
                row = np.zeros(PACKED_WIDTH)
                row[0:3] = verts[face[0]]
                row[3:6] = verts[face[1]]
                row[6:9] = verts[face[2]]
                row[9:12] = color
                kinds.append(KIND_TRIANGLE)
                rows.append(row)
        else:
            raise TypeError(f"unknown primitive {type(prim)!r}")
    if not rows:
        return np.zeros(0, dtype=np.int32), np.zeros((0, PACKED_WIDTH))
    return np.array(kinds, dtype=np.int32), np.vstack(rows)


def rotate_packed(kinds: np.ndarray, params: np.ndarray, rot: np.ndarray, center) -> np.ndarray:
    """Rotate packed primitive coordinates about ``center`` (vectorized).

    Matches pose_scene + pack_scene up to float rounding of the matmul path.
    """
    out = params.copy()
    c = np.asarray(center, dtype=np.float64)
    coord_slices = {
        KIND_SPHERE: (slice(0, 3),),
        KIND_CYLINDER: (slice(0, 3), slice(3, 6)),
        KIND_TRIANGLE: (slice(0, 3), slice(3, 6), slice(6, 9)),
    }
    for kind, slices in coord_slices.items():
        mask = kinds == kind
        if not mask.any():
            continue
        for sl in slices:
            out[mask, sl] = (params[mask, sl] - c) @ rot.T + c
    return out


def packed_bounds(kinds: np.ndarray, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounds of packed primitives, radii included."""
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    sph = kinds == KIND_SPHERE
    if sph.any():
        c, r = params[sph, 0:3], params[sph, 3:4]
        lo = np.minimum(lo, (c - r).min(axis=0))
        hi = np.maximum(hi, (c + r).max(axis=0))
    cyl = kinds == KIND_CYLINDER
    if cyl.any():
        r = params[cyl, 6:7]
        for sl in (slice(0, 3), slice(3, 6)):
            e = params[cyl, sl]
            lo = np.minimum(lo, (e - r).min(axis=0))
            hi = np.maximum(hi, (e + r).max(axis=0))
    tri = kinds == KIND_TRIANGLE
    if tri.any():
        for sl in (slice(0, 3), slice(3, 6), slice(6, 9)):
            v = params[tri, sl]
            lo = np.minimum(lo, v.min(axis=0))
            hi = np.maximum(hi, v.max(axis=0))
    return lo, hi


def scene_bounds(scene: Scene) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounds over all primitives, radii included."""
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for prim in scene.primitives:
        if isinstance(prim, Sphere):
            c = np.asarray(prim.center)
            lo = np.minimum(lo, c - prim.radius)
            hi = np.maximum(hi, c + prim.radius)
        elif isinstance(prim, Cylinder):
            for end in (prim.end_a, prim.end_b):
                e = np.asarray(end)
                lo = np.minimum(lo, e - prim.radius)
                hi = np.maximum(hi, e + prim.radius)
        else:
            if len(prim.vertices):
                lo = np.minimum(lo, prim.vertices.min(axis=0))
                hi = np.maximum(hi, prim.vertices.max(axis=0))
    return lo, hi
