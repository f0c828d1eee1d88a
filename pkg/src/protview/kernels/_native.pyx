# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled raster kernel.

Mirrors the numpy fallback expression-for-expression (see
``numpy_backend.py`` for the fragment-math contract).  Compiled with FP
contraction off so both backends produce bit-identical framebuffers.
"""

import numpy as np

from libc.math cimport ceil, fabs, floor, sqrt

NAME = "native"

cdef double BIG = 1.7976931348623157e308  # max finite double


cdef inline Py_ssize_t _clamp_lo(double a, Py_ssize_t n) noexcept nogil:
    cdef long v = <long>floor(a - 0.5) - 1
    if v < 0:
        v = 0
    if v > n:
        v = n
    return <Py_ssize_t>v


cdef inline Py_ssize_t _clamp_hi(double b, Py_ssize_t n) noexcept nogil:
    cdef long v = <long>ceil(b - 0.5) + 1
    if v < 0:
        v = -1
    if v > n - 1:
        v = n - 1
    return <Py_ssize_t>v


cdef inline void _write(
    unsigned char[:, :, ::1] color, double[:, ::1] depth,
    Py_ssize_t j, Py_ssize_t i, double z, double shade,
    double cr, double cg, double cb,
) noexcept nogil:
    if z < depth[j, i]:
        depth[j, i] = z
        color[j, i, 0] = <unsigned char>floor(cr * shade + 0.5)
        color[j, i, 1] = <unsigned char>floor(cg * shade + 0.5)
        color[j, i, 2] = <unsigned char>floor(cb * shade + 0.5)


cdef void _sphere(
    const double[:, ::1] pv, Py_ssize_t p,
    const double[::1] xs, const double[::1] ys,
    double scale, double ox, double oy,
    double lx, double ly, double lz, double ambient, double diffuse,
    unsigned char[:, :, ::1] color, double[:, ::1] depth,
) noexcept nogil:
    cdef double cx = pv[p, 0], cy = pv[p, 1], cz = pv[p, 2], r = pv[p, 3]
    cdef double cr = pv[p, 4], cg = pv[p, 5], cb = pv[p, 6]
    cdef double rr = r * r
    cdef Py_ssize_t W = xs.shape[0], H = ys.shape[0]
    cdef Py_ssize_t i0 = _clamp_lo(ox + scale * (cx - r), W)
    cdef Py_ssize_t i1 = _clamp_hi(ox + scale * (cx + r), W)
    cdef Py_ssize_t j0 = _clamp_lo(oy - scale * (cy + r), H)
    cdef Py_ssize_t j1 = _clamp_hi(oy - scale * (cy - r), H)
    cdef Py_ssize_t i, j
    cdef double dx, dy, d2, sq, z, lam, shade
    for j in range(j0, j1 + 1):
        dy = ys[j] - cy
        for i in range(i0, i1 + 1):
            dx = xs[i] - cx
            d2 = dx * dx + dy * dy
            if d2 <= rr:
                sq = sqrt(rr - d2)
                z = cz - sq
                lam = (dx * lx + dy * ly - sq * lz) / r
                if lam < 0.0:
                    lam = 0.0
                shade = ambient + diffuse * lam
                _write(color, depth, j, i, z, shade, cr, cg, cb)


cdef void _cylinder(
    const double[:, ::1] pv, Py_ssize_t p,
    const double[::1] xs, const double[::1] ys,
    double scale, double ox, double oy,
    double lx, double ly, double lz, double ambient, double diffuse,
    unsigned char[:, :, ::1] color, double[:, ::1] depth,
) noexcept nogil:
    cdef double ax = pv[p, 0], ay = pv[p, 1], az = pv[p, 2]
    cdef double bx = pv[p, 3], by = pv[p, 4], bz = pv[p, 5]
    cdef double r = pv[p, 6]
    cdef bint capped = pv[p, 7] != 0.0
    cdef double cr = pv[p, 8], cg = pv[p, 9], cb = pv[p, 10]
    cdef double dxv = bx - ax, dyv = by - ay, dzv = bz - az
    cdef double dd = dxv * dxv + dyv * dyv + dzv * dzv
    if dd <= 0.0:
        return
    cdef double rr = r * r
    cdef double invdd = 1.0 / dd
    cdef double vd = dzv
    cdef double a = 1.0 - vd * vd * invdd
    cdef double inv2a = 0.0
    if a > 0.0:
        inv2a = 1.0 / (2.0 * a)
    cdef bint do_caps = capped and vd != 0.0
    cdef double invvd = 0.0, invlen = 0.0, lam_a = 0.0, lam_b = 0.0
    if do_caps:
        invvd = 1.0 / vd
        invlen = 1.0 / sqrt(dd)
        lam_a = -(dxv * lx + dyv * ly + dzv * lz) * invlen
        if lam_a < 0.0:
            lam_a = 0.0
        lam_b = (dxv * lx + dyv * ly + dzv * lz) * invlen
        if lam_b < 0.0:
            lam_b = 0.0

    cdef double xlo = (ax if ax < bx else bx) - r
    cdef double xhi = (ax if ax > bx else bx) + r
    cdef double ylo = (ay if ay < by else by) - r
    cdef double yhi = (ay if ay > by else by) + r
    cdef Py_ssize_t W = xs.shape[0], H = ys.shape[0]
    cdef Py_ssize_t i0 = _clamp_lo(ox + scale * xlo, W)
    cdef Py_ssize_t i1 = _clamp_hi(ox + scale * xhi, W)
    cdef Py_ssize_t j0 = _clamp_lo(oy - scale * yhi, H)
    cdef Py_ssize_t j1 = _clamp_hi(oy - scale * ylo, H)

    cdef Py_ssize_t i, j
    cdef double mx, my, mz, md, c, b, disc, sq, t1, s1, t2, s2
    cdef double best, t_lat, s_lat, ta, ha, tb, hb, nx, ny
    cdef double nx_l, ny_l, nz_l, lam, shade
    cdef int src
    mz = -az
    for j in range(j0, j1 + 1):
        my = ys[j] - ay
        for i in range(i0, i1 + 1):
            mx = xs[i] - ax
            md = mx * dxv + my * dyv + mz * dzv
            best = BIG
            src = -1
            t_lat = 0.0
            s_lat = 0.0
            if a > 0.0:
                c = (mx * mx + my * my + mz * mz) - md * md * invdd - rr
                b = 2.0 * (mz - vd * md * invdd)
                disc = b * b - 4.0 * a * c
                if disc >= 0.0:
                    sq = sqrt(disc)
                    t1 = (-b - sq) * inv2a
                    s1 = (md + t1 * vd) * invdd
                    if 0.0 <= s1 <= 1.0:
                        t_lat = t1
                        s_lat = s1
                        best = t1
                        src = 0
                    else:
                        t2 = (-b + sq) * inv2a
                        s2 = (md + t2 * vd) * invdd
                        if 0.0 <= s2 <= 1.0:
                            t_lat = t2
                            s_lat = s2
                            best = t2
                            src = 0
            if do_caps:
                ta = az - (mx * dxv + my * dyv) * invvd
                ha = (mx * mx + my * my) + (ta - az) * (ta - az)
                if ha <= rr and ta < best:
                    best = ta
                    src = 1
                nx = xs[i] - bx
                ny = ys[j] - by
                tb = bz - (nx * dxv + ny * dyv) * invvd
                hb = (nx * nx + ny * ny) + (tb - bz) * (tb - bz)
                if hb <= rr and tb < best:
                    best = tb
                    src = 2
            if src < 0:
                continue
            if src == 0:
                nx_l = mx - s_lat * dxv
                ny_l = my - s_lat * dyv
                nz_l = (best - az) - s_lat * dzv
                lam = (nx_l * lx + ny_l * ly + nz_l * lz) / r
                if lam < 0.0:
                    lam = 0.0
            elif src == 1:
                lam = lam_a
            else:
                lam = lam_b
            shade = ambient + diffuse * lam
            _write(color, depth, j, i, best, shade, cr, cg, cb)


cdef void _triangle(
    const double[:, ::1] pv, Py_ssize_t p,
    const double[::1] xs, const double[::1] ys,
    double scale, double ox, double oy,
    double lx, double ly, double lz, double ambient, double diffuse,
    unsigned char[:, :, ::1] color, double[:, ::1] depth,
) noexcept nogil:
    cdef double x0 = pv[p, 0], y0 = pv[p, 1], z0 = pv[p, 2]
    cdef double x1 = pv[p, 3], y1 = pv[p, 4], z1 = pv[p, 5]
    cdef double x2 = pv[p, 6], y2 = pv[p, 7], z2 = pv[p, 8]
    cdef double cr = pv[p, 9], cg = pv[p, 10], cb = pv[p, 11]
    cdef double d1x = x1 - x0, d1y = y1 - y0
    cdef double d2x = x2 - x0, d2y = y2 - y0
    cdef double area = d1x * d2y - d1y * d2x
    if area == 0.0:
        return
    cdef double e1z = z1 - z0, e2z = z2 - z0
    cdef double nfx = d1y * e2z - e1z * d2y
    cdef double nfy = e1z * d2x - d1x * e2z
    cdef double nfz = d1x * d2y - d1y * d2x
    cdef double nn = sqrt(nfx * nfx + nfy * nfy + nfz * nfz)
    if nn == 0.0:
        return
    cdef double lam = fabs(nfx * lx + nfy * ly + nfz * lz) / nn
    cdef double shade = ambient + diffuse * lam
    cdef double inva = 1.0 / area

    cdef double xlo = x0, xhi = x0, ylo = y0, yhi = y0
    if x1 < xlo: xlo = x1
    if x2 < xlo: xlo = x2
    if x1 > xhi: xhi = x1
    if x2 > xhi: xhi = x2
    if y1 < ylo: ylo = y1
    if y2 < ylo: ylo = y2
    if y1 > yhi: yhi = y1
    if y2 > yhi: yhi = y2
    cdef Py_ssize_t W = xs.shape[0], H = ys.shape[0]
    cdef Py_ssize_t i0 = _clamp_lo(ox + scale * xlo, W)
    cdef Py_ssize_t i1 = _clamp_hi(ox + scale * xhi, W)
    cdef Py_ssize_t j0 = _clamp_lo(oy - scale * yhi, H)
    cdef Py_ssize_t j1 = _clamp_hi(oy - scale * ylo, H)

    cdef Py_ssize_t i, j
    cdef double qx, qy, b1, b2, b0, z
    for j in range(j0, j1 + 1):
        qy = ys[j] - y0
        for i in range(i0, i1 + 1):
            qx = xs[i] - x0
            b1 = (qx * d2y - qy * d2x) * inva
            b2 = (d1x * qy - d1y * qx) * inva
            b0 = 1.0 - b1 - b2
            if b0 >= 0.0 and b1 >= 0.0 and b2 >= 0.0:
                z = b0 * z0 + b1 * z1 + b2 * z2
                _write(color, depth, j, i, z, shade, cr, cg, cb)


def raster_scene(
    kinds, params, double scale, double ox, double oy,
    light, double ambient, double diffuse, color, depth,
):
    """Rasterize packed primitives into the color/depth buffers in order."""
    cdef const int[:] kv = np.ascontiguousarray(kinds, dtype=np.intc)
    cdef const double[:, ::1] pv = np.ascontiguousarray(params, dtype=np.float64)
    cdef unsigned char[:, :, ::1] cv = color
    cdef double[:, ::1] dv = depth
    cdef double lx = light[0], ly = light[1], lz = light[2]
    cdef Py_ssize_t H = dv.shape[0], W = dv.shape[1]
    cdef Py_ssize_t i, j, p
    cdef double[::1] xs = np.empty(W, dtype=np.float64)
    cdef double[::1] ys = np.empty(H, dtype=np.float64)
    for i in range(W):
        xs[i] = (i + 0.5 - ox) / scale
    for j in range(H):
        ys[j] = (oy - (j + 0.5)) / scale
    with nogil:
        for p in range(kv.shape[0]):
            if kv[p] == 0:
                _sphere(pv, p, xs, ys, scale, ox, oy, lx, ly, lz,
                        ambient, diffuse, cv, dv)
            elif kv[p] == 1:
                _cylinder(pv, p, xs, ys, scale, ox, oy, lx, ly, lz,
                          ambient, diffuse, cv, dv)
            else:
                _triangle(pv, p, xs, ys, scale, ox, oy, lx, ly, lz,
                          ambient, diffuse, cv, dv)
