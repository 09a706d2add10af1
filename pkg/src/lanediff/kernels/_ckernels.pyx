# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: conv1d/conv2d forward+backward, nearest-point
squared distances, and Bresenham stroke rasterization.

Semantics match lanediff.kernels._pure; the stroke rasterizer and
nearest_sqdist are cell/bit identical, convolutions agree to roundoff
(different summation order than BLAS).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv1d_forward(double[:, :, ::1] x, double[:, :, ::1] w, int stride, int padding):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t Co = w.shape[0], K = w.shape[2]
    cdef Py_ssize_t Lo = (L + 2 * padding - K) // stride + 1
    y_arr = np.zeros((B, Co, Lo), dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef Py_ssize_t b, co, ci, lo, k, pos
    cdef double acc
    for b in range(B):
        for co in range(Co):
            for lo in range(Lo):
                acc = 0.0
                for ci in range(Ci):
                    for k in range(K):
                        pos = lo * stride + k - padding
                        if 0 <= pos < L:
                            acc += x[b, ci, pos] * w[co, ci, k]
                y[b, co, lo] = acc
    return y_arr


def conv1d_backward(double[:, :, ::1] x, double[:, :, ::1] w, double[:, :, ::1] gy,
                    int stride, int padding):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t Co = w.shape[0], K = w.shape[2]
    cdef Py_ssize_t Lo = gy.shape[2]
    gx_arr = np.zeros((B, Ci, L), dtype=np.float64)
    gw_arr = np.zeros((Co, Ci, K), dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef Py_ssize_t b, co, ci, lo, k, pos
    cdef double g
    for b in range(B):
        for co in range(Co):
            for lo in range(Lo):
                g = gy[b, co, lo]
                for ci in range(Ci):
                    for k in range(K):
                        pos = lo * stride + k - padding
                        if 0 <= pos < L:
                            gx[b, ci, pos] += g * w[co, ci, k]
                            gw[co, ci, k] += g * x[b, ci, pos]
    return gx_arr, gw_arr


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w, int stride, int padding):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t Co = w.shape[0], Kh = w.shape[2], Kw = w.shape[3]
    cdef Py_ssize_t Ho = (H + 2 * padding - Kh) // stride + 1
    cdef Py_ssize_t Wo = (W + 2 * padding - Kw) // stride + 1
    y_arr = np.zeros((B, Co, Ho, Wo), dtype=np.float64)
    cdef double[:, :, :, ::1] y = y_arr
    cdef Py_ssize_t b, co, ci, ho, wo, ki, kj, pi, pj
    cdef double acc
    for b in range(B):
        for co in range(Co):
            for ho in range(Ho):
                for wo in range(Wo):
                    acc = 0.0
                    for ci in range(Ci):
                        for ki in range(Kh):
                            pi = ho * stride + ki - padding
                            if pi < 0 or pi >= H:
                                continue
                            for kj in range(Kw):
                                pj = wo * stride + kj - padding
                                if 0 <= pj < W:
                                    acc += x[b, ci, pi, pj] * w[co, ci, ki, kj]
                    y[b, co, ho, wo] = acc
    return y_arr


def conv2d_backward(double[:, :, :, ::1] x, double[:, :, :, ::1] w,
                    double[:, :, :, ::1] gy, int stride, int padding):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t Co = w.shape[0], Kh = w.shape[2], Kw = w.shape[3]
    cdef Py_ssize_t Ho = gy.shape[2], Wo = gy.shape[3]
    gx_arr = np.zeros((B, Ci, H, W), dtype=np.float64)
    gw_arr = np.zeros((Co, Ci, Kh, Kw), dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef Py_ssize_t b, co, ci, ho, wo, ki, kj, pi, pj
    cdef double g
    for b in range(B):
        for co in range(Co):
            for ho in range(Ho):
                for wo in range(Wo):
                    g = gy[b, co, ho, wo]
                    for ci in range(Ci):
                        for ki in range(Kh):
                            pi = ho * stride + ki - padding
                            if pi < 0 or pi >= H:
                                continue
                            for kj in range(Kw):
                                pj = wo * stride + kj - padding
                                if 0 <= pj < W:
                                    gx[b, ci, pi, pj] += g * w[co, ci, ki, kj]
                                    gw[co, ci, ki, kj] += g * x[b, ci, pi, pj]
    return gx_arr, gw_arr


def nearest_sqdist(double[:, ::1] a, double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double best, dx, dy, d2
    if m == 0:
        out_arr[:] = np.inf
        return out_arr
    for i in range(n):
        best = np.inf
        for j in range(m):
            dx = a[i, 0] - b[j, 0]
            dy = a[i, 1] - b[j, 1]
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
        out[i] = best
    return out_arr


def stroke_lines(double[:, ::1] canvas, long[::1] i0, long[::1] j0,
                 long[::1] i1, long[::1] j1):
    cdef Py_ssize_t h = canvas.shape[0], w = canvas.shape[1]
    cdef Py_ssize_t n = i0.shape[0]
    cdef Py_ssize_t idx
    cdef long a0, b0, a1, b1, di, dj, si, sj, err, e2, i, j
    for idx in range(n):
        a0 = i0[idx]; b0 = j0[idx]; a1 = i1[idx]; b1 = j1[idx]
        di = a1 - a0 if a1 >= a0 else a0 - a1
        dj = b1 - b0 if b1 >= b0 else b0 - b1
        si = 1 if a0 < a1 else -1
        sj = 1 if b0 < b1 else -1
        err = di - dj
        i = a0; j = b0
        while True:
            if 0 <= i < h and 0 <= j < w:
                canvas[i, j] = 1.0
            if i == a1 and j == b1:
                break
            e2 = 2 * err
            if e2 > -dj:
                err -= dj
                i += si
            if e2 < di:
                err += di
                j += sj
    return np.asarray(canvas)
