"""Vectorized numpy raster kernel (the fallback backend).

This module defines the fragment-math contract both backends follow.  The
compiled kernel mirrors every expression below operation-for-operation (it
is built with FP contraction off), so the two backends produce bit-identical
framebuffers.

Conventions:
  pixel (row j, col i) samples world  x = (i + 0.5 - ox) / scale,
                                      y = (oy - (j + 0.5)) / scale
  rays travel along +z; depth = camera-space z, smaller is nearer
  depth test is strict less-than, so the first-written fragment wins ties
  shade = ambient + diffuse * lambert;  channel = floor(rgb * shade + 0.5)

Fragment equations:
  sphere (c, r):    d2 = dx*dx + dy*dy;  hit iff d2 <= r*r
                    z = cz - sqrt(r*r - d2)
                    lambert = max(0, (dx*lx + dy*ly - sqrt(r*r - d2)*lz) / r)
  cylinder (A,B,r): quadratic along the view line against the finite body;
                    the nearer in-range lateral root wins, then cap disks
                    (capped only); lateral normal (p - A - s*d)/r, cap
                    normals -/+ d/|d|
  triangle:         2D edge functions -> barycentric (b0, b1, b2) >= 0,
                    z = b0*z0 + b1*z1 + b2*z2, flat two-sided lambert
                    |n . l| / |n|
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..scene import KIND_CYLINDER, KIND_SPHERE

NAME = "numpy"

_BIG = np.finfo(np.float64).max


# -- classifier kernels (im2col + BLAS path) ----------------------------------


def _im2col(xp: np.ndarray, k: int) -> np.ndarray:
    """Padded (n, hp, wp, c) -> (n, ho, wo, k*k*c) patch matrix, last axis
    ordered (ky, kx, c)."""
    n, hp, wp, c = xp.shape
    ho = hp - k + 1
    flat = xp.reshape(n, hp, wp * c)
    win = sliding_window_view(flat, k * c, axis=2)[:, :, ::c, :]
    return np.concatenate([win[:, ky : ky + ho] for ky in range(k)], axis=3)


def conv2d_forward(xp: np.ndarray, w2: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid correlation of a padded (n, hp, wp, c) batch with (k, k, c, o)
    weights plus bias; returns (n, ho, wo, o)."""
    k, _, c, o = w2.shape
    cols = _im2col(xp, k)
    n, ho, wo = cols.shape[0], cols.shape[1], cols.shape[2]
    y = cols.reshape(n * ho * wo, k * k * c) @ w2.reshape(k * k * c, o)
    return y.reshape(n, ho, wo, o) + b


def conv2d_grad_w(xp: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Weight gradient for the valid correlation: (k, k, c, o)."""
    n, ho, wo, o = gy.shape
    k = xp.shape[1] - ho + 1
    c = xp.shape[3]
    cols = _im2col(xp, k)
    gwm = cols.reshape(n * ho * wo, k * k * c).T @ gy.reshape(n * ho * wo, o)
    return gwm.reshape(k, k, c, o)


def maxpool_forward(x: np.ndarray, size: int):
    """Max over disjoint size x size windows; idx holds the winning window
    slot (dy * size + dx), first maximum wins."""
    n, h, w, c = x.shape
    ho, wo = h // size, w // size
    win = x.reshape(n, ho, size, wo, size, c).transpose(0, 1, 3, 5, 2, 4)
    win = win.reshape(n, ho, wo, c, size * size)
    idx = win.argmax(axis=-1).astype(np.int32)
    y = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return y, idx


def maxpool_backward(gy: np.ndarray, idx: np.ndarray, size: int) -> np.ndarray:
    """Scatter gradients back to the winning slots."""
    n, ho, wo, c = gy.shape
    flat = np.zeros((n, ho, wo, c, size * size))
    np.put_along_axis(flat, idx[..., None].astype(np.intp), gy[..., None], axis=-1)
    return flat.reshape(n, ho, wo, c, size, size).transpose(0, 1, 4, 2, 5, 3).reshape(
        n, ho * size, wo * size, c
    )


# -- raster kernel -------------------------------------------------------------


def _pixel_range(lo: float, hi: float, scale: float, off: float, n: int, flip: bool):
    """Conservative pixel index range covering world span [lo, hi]."""
    if flip:
        a, b = off - scale * hi, off - scale * lo
    else:
        a, b = off + scale * lo, off + scale * hi
    i0 = int(np.floor(a - 0.5)) - 1
    i1 = int(np.ceil(b - 0.5)) + 1
    return max(0, i0), min(n - 1, i1)


def raster_scene(
    kinds: np.ndarray,
    params: np.ndarray,
    scale: float,
    ox: float,
    oy: float,
    light: np.ndarray,
    ambient: float,
    diffuse: float,
    color: np.ndarray,
    depth: np.ndarray,
) -> None:
    """Rasterize packed primitives into the color/depth buffers in order."""
    height, width = depth.shape
    xs_all = (np.arange(width, dtype=np.float64) + 0.5 - ox) / scale
    ys_all = (oy - (np.arange(height, dtype=np.float64) + 0.5)) / scale
    lx, ly, lz = (float(v) for v in light)

    for kind, row in zip(kinds, params):
        if kind == KIND_SPHERE:
            bbox = _sphere_bbox(row)
        elif kind == KIND_CYLINDER:
            bbox = _cylinder_bbox(row)
        else:
            bbox = _triangle_bbox(row)
        i0, i1 = _pixel_range(bbox[0], bbox[1], scale, ox, width, flip=False)
        j0, j1 = _pixel_range(bbox[2], bbox[3], scale, oy, height, flip=True)
        if i0 > i1 or j0 > j1:
            continue
        xs = xs_all[i0 : i1 + 1]
        ys = ys_all[j0 : j1 + 1]

        if kind == KIND_SPHERE:
            frag = _sphere_frag(row, xs, ys, lx, ly, lz)
        elif kind == KIND_CYLINDER:
            frag = _cylinder_frag(row, xs, ys, lx, ly, lz)
        else:
            frag = _triangle_frag(row, xs, ys, lx, ly, lz)
        if frag is None:
            continue
        mask, zval, lam, rgb = frag

        sub_depth = depth[j0 : j1 + 1, i0 : i1 + 1]
        win = mask & (zval < sub_depth)
        if not win.any():
            continue
        sub_depth[win] = np.broadcast_to(zval, win.shape)[win]
        shade = ambient + diffuse * np.asarray(lam, dtype=np.float64)
        sub_color = color[j0 : j1 + 1, i0 : i1 + 1]
        for ch in range(3):
            vals = np.floor(rgb[ch] * shade + 0.5)
            sub_color[..., ch][win] = np.broadcast_to(vals, win.shape)[win].astype(np.uint8)


def _sphere_bbox(row):
    cx, cy, r = row[0], row[1], row[3]
    return cx - r, cx + r, cy - r, cy + r


def _cylinder_bbox(row):
    ax, ay, bx, by, r = row[0], row[1], row[3], row[4], row[6]
    return min(ax, bx) - r, max(ax, bx) + r, min(ay, by) - r, max(ay, by) + r


def _triangle_bbox(row):
    xs = (row[0], row[3], row[6])
    ys = (row[1], row[4], row[7])
    return min(xs), max(xs), min(ys), max(ys)


def _sphere_frag(row, xs, ys, lx, ly, lz):
    cx, cy, cz, r = row[0], row[1], row[2], row[3]
    rr = r * r
    dx = (xs - cx)[None, :]
    dy = (ys - cy)[:, None]
    d2 = dx * dx + dy * dy
    mask = d2 <= rr
    if not mask.any():
        return None
    sq = np.sqrt(np.where(mask, rr - d2, 0.0))
    zval = cz - sq
    lam = np.maximum((dx * lx + dy * ly - sq * lz) / r, 0.0)
    return mask, zval, lam, row[4:7]


def _cylinder_frag(row, xs, ys, lx, ly, lz):
    ax, ay, az = row[0], row[1], row[2]
    bx, by, bz = row[3], row[4], row[5]
    r, capped = row[6], row[7] != 0.0
    dxv, dyv, dzv = bx - ax, by - ay, bz - az
    dd = dxv * dxv + dyv * dyv + dzv * dzv
    if dd <= 0.0:
        return None
    rr = r * r
    invdd = 1.0 / dd
    vd = dzv
    a = 1.0 - vd * vd * invdd

    mx = (xs - ax)[None, :]
    my = (ys - ay)[:, None]
    mz = -az
    md = mx * dxv + my * dyv + mz * dzv

    shape = (len(ys), len(xs))
    lat_valid = np.zeros(shape, dtype=bool)
    t_lat = np.zeros(shape)
    s_lat = np.zeros(shape)
    if a > 0.0:
        inv2a = 1.0 / (2.0 * a)
        c = (mx * mx + my * my + mz * mz) - md * md * invdd - rr
        b = 2.0 * (mz - vd * md * invdd)
        disc = b * b - 4.0 * a * c
        has = disc >= 0.0
        sq = np.sqrt(np.where(has, disc, 0.0))
        t1 = (-b - sq) * inv2a
        s1 = (md + t1 * vd) * invdd
        v1 = has & (s1 >= 0.0) & (s1 <= 1.0)
        t2 = (-b + sq) * inv2a
        s2 = (md + t2 * vd) * invdd
        v2 = has & ~v1 & (s2 >= 0.0) & (s2 <= 1.0)
        lat_valid = v1 | v2
        t_lat = np.where(v1, t1, t2)
        s_lat = np.where(v1, s1, s2)

    best = np.where(lat_valid, t_lat, _BIG)
    src = np.where(lat_valid, 0, -1)
    lam_a = lam_b = 0.0
    if capped and vd != 0.0:
        invvd = 1.0 / vd
        invlen = 1.0 / np.sqrt(dd)
        lam_a = max(0.0, -(dxv * lx + dyv * ly + dzv * lz) * invlen)
        lam_b = max(0.0, (dxv * lx + dyv * ly + dzv * lz) * invlen)
        ta = az - (mx * dxv + my * dyv) * invvd
        ha = (mx * mx + my * my) + (ta - az) * (ta - az)
        va = (ha <= rr) & (ta < best)
        best = np.where(va, ta, best)
        src = np.where(va, 1, src)
        nx = (xs - bx)[None, :]
        ny = (ys - by)[:, None]
        tb = bz - (nx * dxv + ny * dyv) * invvd
        hb = (nx * nx + ny * ny) + (tb - bz) * (tb - bz)
        vb = (hb <= rr) & (tb < best)
        best = np.where(vb, tb, best)
        src = np.where(vb, 2, src)

    mask = src >= 0
    if not mask.any():
        return None
    # non-covered entries hold sentinel garbage; they are masked out below
    with np.errstate(over="ignore", invalid="ignore"):
        nx_l = mx - s_lat * dxv
        ny_l = my - s_lat * dyv
        nz_l = (best - az) - s_lat * dzv
        lam_lat = np.maximum((nx_l * lx + ny_l * ly + nz_l * lz) / r, 0.0)
    lam = np.where(src == 0, lam_lat, np.where(src == 1, lam_a, lam_b))
    return mask, best, lam, row[8:11]


def _triangle_frag(row, xs, ys, lx, ly, lz):
    x0, y0, z0 = row[0], row[1], row[2]
    x1, y1, z1 = row[3], row[4], row[5]
    x2, y2, z2 = row[6], row[7], row[8]
    d1x, d1y = x1 - x0, y1 - y0
    d2x, d2y = x2 - x0, y2 - y0
    area = d1x * d2y - d1y * d2x
    if area == 0.0:
        return None
    e1z, e2z = z1 - z0, z2 - z0
    nfx = d1y * e2z - e1z * d2y
    nfy = e1z * d2x - d1x * e2z
    nfz = d1x * d2y - d1y * d2x
    nn = np.sqrt(nfx * nfx + nfy * nfy + nfz * nfz)
    if nn == 0.0:
        return None
    lam = abs(nfx * lx + nfy * ly + nfz * lz) / nn  # two-sided flat shading

    inva = 1.0 / area
    qx = (xs - x0)[None, :]
    qy = (ys - y0)[:, None]
    b1 = (qx * d2y - qy * d2x) * inva
    b2 = (d1x * qy - d1y * qx) * inva
    b0 = 1.0 - b1 - b2
    mask = (b0 >= 0.0) & (b1 >= 0.0) & (b2 >= 0.0)
    if not mask.any():
        return None
    zval = b0 * z0 + b1 * z1 + b2 * z2
    return mask, zval, lam, row[9:12]
