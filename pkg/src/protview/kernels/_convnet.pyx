# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled classifier kernels (conv / maxpool inner loops).

Unlike the raster kernel, these carry no bit-parity contract with the numpy
fallback (summation order differs), so they are built with FP contraction
enabled for speed.  Results agree with the fallback to ~1e-12 relative.
"""

import numpy as np

DEF MAX_CHANNELS = 64


def conv2d_forward(xp, w2, b):
    """Valid correlation of a padded (n, hp, wp, c) batch with (k, k, c, o)
    weights plus bias; returns (n, ho, wo, o)."""
    cdef const double[:, :, :, ::1] xv = xp
    cdef const double[:, :, :, ::1] wv = w2
    cdef const double[::1] bv = b
    cdef Py_ssize_t n = xv.shape[0], hp = xv.shape[1], wp = xv.shape[2], c = xv.shape[3]
    cdef Py_ssize_t k = wv.shape[0], o = wv.shape[3]
    cdef Py_ssize_t ho = hp - k + 1, wo = wp - k + 1
    if o > MAX_CHANNELS:
        raise ValueError(f"compiled kernel supports up to {MAX_CHANNELS} output channels")
    y = np.empty((n, ho, wo, o), dtype=np.float64)
    cdef double[:, :, :, ::1] yv = y
    cdef const double* xrow
    cdef const double* wrow
    cdef Py_ssize_t nn, i, j, ky, kx, cc, oo
    cdef double xval
    cdef double acc[MAX_CHANNELS]
    with nogil:
        for nn in range(n):
            for i in range(ho):
                for j in range(wo):
                    for oo in range(o):
                        acc[oo] = bv[oo]
                    for ky in range(k):
                        for kx in range(k):
                            xrow = &xv[nn, i + ky, j + kx, 0]
                            wrow = &wv[ky, kx, 0, 0]
                            for cc in range(c):
                                xval = xrow[cc]
                                for oo in range(o):
                                    acc[oo] = acc[oo] + xval * wrow[cc * o + oo]
                    for oo in range(o):
                        yv[nn, i, j, oo] = acc[oo]
    return y


def conv2d_grad_w(xp, gy):
    """Weight gradient for the valid correlation: (k, k, c, o)."""
    cdef const double[:, :, :, ::1] xv = xp
    cdef const double[:, :, :, ::1] gv = gy
    cdef Py_ssize_t n = xv.shape[0], hp = xv.shape[1], wp = xv.shape[2], c = xv.shape[3]
    cdef Py_ssize_t ho = gv.shape[1], wo = gv.shape[2], o = gv.shape[3]
    cdef Py_ssize_t k = hp - ho + 1
    gw = np.zeros((k, k, c, o), dtype=np.float64)
    cdef double[:, :, :, ::1] gwv = gw
    cdef double* gwbase = &gwv[0, 0, 0, 0]
    cdef double* gwrow
    cdef const double* xrow
    cdef const double* grow
    cdef Py_ssize_t nn, i, j, ky, kx, cc, oo
    cdef double xval
    with nogil:
        for nn in range(n):
            for i in range(ho):
                for j in range(wo):
                    grow = &gv[nn, i, j, 0]
                    for ky in range(k):
                        for kx in range(k):
                            xrow = &xv[nn, i + ky, j + kx, 0]
                            gwrow = gwbase + ((ky * k + kx) * c) * o
                            for cc in range(c):
                                xval = xrow[cc]
                                for oo in range(o):
                                    gwrow[cc * o + oo] = gwrow[cc * o + oo] + xval * grow[oo]
    return gw


def maxpool_forward(x, Py_ssize_t size):
    """Max over disjoint size x size windows; idx holds the winning window
    slot (dy * size + dx), first maximum wins."""
    cdef const double[:, :, :, ::1] xv = x
    cdef Py_ssize_t n = xv.shape[0], h = xv.shape[1], w = xv.shape[2], c = xv.shape[3]
    cdef Py_ssize_t ho = h // size, wo = w // size
    y = np.empty((n, ho, wo, c), dtype=np.float64)
    idx = np.zeros((n, ho, wo, c), dtype=np.int32)
    cdef double[:, :, :, ::1] yv = y
    cdef int[:, :, :, ::1] iv = idx
    cdef Py_ssize_t nn, i, j, cc, dy, dx
    cdef double v
    with nogil:
        for nn in range(n):
            for i in range(ho):
                for j in range(wo):
                    for cc in range(c):
                        yv[nn, i, j, cc] = xv[nn, i * size, j * size, cc]
                    for dy in range(size):
                        for dx in range(size):
                            if dy == 0 and dx == 0:
                                continue
                            for cc in range(c):
                                v = xv[nn, i * size + dy, j * size + dx, cc]
                                if v > yv[nn, i, j, cc]:
                                    yv[nn, i, j, cc] = v
                                    iv[nn, i, j, cc] = <int>(dy * size + dx)
    return y, idx


def maxpool_backward(gy, idx, Py_ssize_t size):
    """Scatter gradients back to the winning slots."""
    cdef const double[:, :, :, ::1] gv = gy
    cdef const int[:, :, :, ::1] iv = idx
    cdef Py_ssize_t n = gv.shape[0], ho = gv.shape[1], wo = gv.shape[2], c = gv.shape[3]
    gx = np.zeros((n, ho * size, wo * size, c), dtype=np.float64)
    cdef double[:, :, :, ::1] xv = gx
    cdef Py_ssize_t nn, i, j, cc
    cdef int slot
    with nogil:
        for nn in range(n):
            for i in range(ho):
                for j in range(wo):
                    for cc in range(c):
                        slot = iv[nn, i, j, cc]
                        xv[nn, i * size + slot // size, j * size + slot % size, cc] = gv[nn, i, j, cc]
    return gx
