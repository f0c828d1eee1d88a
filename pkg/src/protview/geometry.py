"""Spline interpolation and ribbon frame construction."""

from __future__ import annotations

import numpy as np

from .errors import TooFewPointsError

# Knot spacing floor; keeps the centripetal parameterization finite when
# control points coincide (duplicated end points).
_KNOT_EPS = 1e-8
# Curvature below this is treated as straight: normalizing a smaller vector
# would amplify float noise and break rotation covariance of the frames.
_STRAIGHT_EPS = 1e-6


def spline_through(points: np.ndarray, samples_per_segment: int) -> np.ndarray:
    """Centripetal Catmull-Rom spline through every input point.

    End control points are duplicated, so the curve is clamped.  Output has
    (n - 1) * samples_per_segment + 1 points; each input point appears
    exactly (segment boundaries are emitted verbatim).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
        raise TooFewPointsError("spline needs at least 2 points of dimension 3")
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")

    ctrl = np.vstack([pts[0], pts, pts[-1]])
    # centripetal increments: |dP|^(1/2), floored so duplicated end controls
    # keep the parameterization finite
    dist = np.sqrt(((ctrl[1:] - ctrl[:-1]) ** 2).sum(axis=1))
    seg = np.maximum(np.sqrt(dist), _KNOT_EPS)

    out = np.empty(((pts.shape[0] - 1) * samples_per_segment + 1, 3))
    row = 0
    for i in range(pts.shape[0] - 1):
        p0, p1, p2, p3 = ctrl[i], ctrl[i + 1], ctrl[i + 2], ctrl[i + 3]
        # local knots per segment window avoid large-sum cancellation
        t0 = 0.0
        t1 = seg[i]
        t2 = t1 + seg[i + 1]
        t3 = t2 + seg[i + 2]
        for j in range(samples_per_segment):
            if j == 0:
                out[row] = p1
            else:
                t = t1 + (t2 - t1) * (j / samples_per_segment)
                # degenerate (duplicated-control) outer intervals evaluate to
                # their constant value; the formula would extrapolate across
                # an epsilon-wide interval and cancel catastrophically
                if seg[i] <= _KNOT_EPS:
                    a1 = p1
                else:
                    a1 = ((t1 - t) * p0 + (t - t0) * p1) / (t1 - t0)
                a2 = ((t2 - t) * p1 + (t - t1) * p2) / (t2 - t1)
                if seg[i + 2] <= _KNOT_EPS:
                    a3 = p2
                else:
                    a3 = ((t3 - t) * p2 + (t - t2) * p3) / (t3 - t2)
                b1 = ((t2 - t) * a1 + (t - t0) * a2) / (t2 - t0)
                b2 = ((t3 - t) * a2 + (t - t1) * a3) / (t3 - t1)
                out[row] = ((t2 - t) * b1 + (t - t1) * b2) / (t2 - t1)
            row += 1
    out[row] = pts[-1]
    return out


def _normalize(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v / n if n > 0 else v


def _any_perpendicular(t: np.ndarray) -> np.ndarray:
    """Fixed arbitrary unit vector perpendicular to t (used on straight runs)."""
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(t, ref))) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    return _normalize(ref - np.dot(ref, t) * t)


def ribbon_frames(spline: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-point orthonormal (tangent, normal, binormal) frames.

    Tangents are normalized central differences (one-sided at the ends).
    Normals come from the discrete curvature vector, with a sign-continuity
    flip; straight stretches inherit the previous normal, and a fully
    straight spline starts from a fixed arbitrary perpendicular (note: that
    fallback is not rotation-covariant).
    """
    pts = np.asarray(spline, dtype=np.float64)
    n = pts.shape[0]
    if n < 3:
        raise TooFewPointsError("frames need at least 3 spline points")

    tangents = np.empty_like(pts)
    tangents[0] = pts[1] - pts[0]
    tangents[-1] = pts[-1] - pts[-2]
    tangents[1:-1] = pts[2:] - pts[:-2]
    for i in range(n):
        tangents[i] = _normalize(tangents[i])

    normals = np.empty_like(pts)
    prev: np.ndarray | None = None
    for i in range(1, n - 1):
        curv = pts[i + 1] - 2.0 * pts[i] + pts[i - 1]
        perp = curv - np.dot(curv, tangents[i]) * tangents[i]
        mag = float(np.linalg.norm(perp))
        if mag > _STRAIGHT_EPS:
            cand = perp / mag
            if prev is not None and float(np.dot(cand, prev)) < 0.0:
                cand = -cand
            normals[i] = cand
        elif prev is not None:
            normals[i] = _normalize(prev - np.dot(prev, tangents[i]) * tangents[i])
        else:
            normals[i] = _any_perpendicular(tangents[i])
        prev = normals[i]
    for i, j in ((0, 1), (n - 1, n - 2)):
        end = normals[j] - np.dot(normals[j], tangents[i]) * tangents[i]
        if float(np.linalg.norm(end)) > _STRAIGHT_EPS:
            normals[i] = _normalize(end)
        else:
            normals[i] = _any_perpendicular(tangents[i])

    binormals = np.cross(tangents, normals)
    for i in range(n):
        binormals[i] = _normalize(binormals[i])
    return tangents, normals, binormals
