"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or LANEDIFF_PURE is set.
Convolutions go through strided column views + BLAS; the integer stroke
rasterizer matches the compiled Bresenham cell-for-cell.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided


def conv1d_forward(x: np.ndarray, w: np.ndarray, stride: int, padding: int) -> np.ndarray:
    btch, cin, length = x.shape
    cout, _, k = w.shape
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding)))
    lp = x.shape[2]
    lo = (lp - k) // stride + 1
    sb, sc, sl = x.strides
    cols = as_strided(x, (btch, cin, lo, k), (sb, sc, sl * stride, sl))
    y = np.tensordot(cols, w, axes=([1, 3], [1, 2]))  # (B, Lo, Co)
    return np.ascontiguousarray(np.transpose(y, (0, 2, 1)))


def conv1d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray,
                    stride: int, padding: int) -> tuple[np.ndarray, np.ndarray]:
    btch, cin, length = x.shape
    cout, _, k = w.shape
    if padding:
        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding)))
    else:
        xp = x
    lp = xp.shape[2]
    lo = gy.shape[2]
    sb, sc, sl = xp.strides
    cols = as_strided(xp, (btch, cin, lo, k), (sb, sc, sl * stride, sl))
    gw = np.transpose(np.tensordot(gy, cols, axes=([0, 2], [0, 2])), (0, 1, 2))
    gxp = np.zeros_like(xp)
    t = np.einsum("bol,oik->bilk", gy, w, optimize=True)
    for kk in range(k):
        gxp[:, :, kk:kk + lo * stride:stride] += t[:, :, :, kk]
    if padding:
        return np.ascontiguousarray(gxp[:, :, padding:lp - padding]), gw
    return gxp, gw


def conv2d_forward(x: np.ndarray, w: np.ndarray, stride: int, padding: int) -> np.ndarray:
    btch, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    hp, wp = x.shape[2], x.shape[3]
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sb, sc, sh, sw = x.strides
    cols = as_strided(
        x, (btch, cin, ho, wo, kh, kw),
        (sb, sc, sh * stride, sw * stride, sh, sw),
    )
    y = np.tensordot(cols, w, axes=([1, 4, 5], [1, 2, 3]))  # (B, Ho, Wo, Co)
    return np.ascontiguousarray(np.transpose(y, (0, 3, 1, 2)))


def conv2d_backward(x: np.ndarray, w: np.ndarray, gy: np.ndarray,
                    stride: int, padding: int) -> tuple[np.ndarray, np.ndarray]:
    btch, cin, h, wd = x.shape
    cout, _, kh, kw = w.shape
    if padding:
        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    else:
        xp = x
    hp, wp = xp.shape[2], xp.shape[3]
    ho, wo = gy.shape[2], gy.shape[3]
    sb, sc, sh, sw = xp.strides
    cols = as_strided(
        xp, (btch, cin, ho, wo, kh, kw),
        (sb, sc, sh * stride, sw * stride, sh, sw),
    )
    gw = np.tensordot(gy, cols, axes=([0, 2, 3], [0, 2, 3]))
    gxp = np.zeros_like(xp)
    t = np.einsum("bohw,oikl->bihwkl", gy, w, optimize=True)
    for ki in range(kh):
        for kj in range(kw):
            gxp[:, :, ki:ki + ho * stride:stride, kj:kj + wo * stride:stride] \
                += t[:, :, :, :, ki, kj]
    if padding:
        return np.ascontiguousarray(gxp[:, :, padding:hp - padding, padding:wp - padding]), gw
    return gxp, gw


def nearest_sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum squared distance from each point of a to the set b."""
    n = a.shape[0]
    if b.shape[0] == 0:
        return np.full(n, np.inf)
    out = np.empty(n, dtype=np.float64)
    chunk = max(1, 4_000_000 // max(b.shape[0], 1))
    for s in range(0, n, chunk):
        dx = a[s:s + chunk, 0:1] - b[None, :, 0]
        dy = a[s:s + chunk, 1:2] - b[None, :, 1]
        out[s:s + chunk] = np.min(dx * dx + dy * dy, axis=1)
    return out


def stroke_lines(canvas: np.ndarray, i0: np.ndarray, j0: np.ndarray,
                 i1: np.ndarray, j1: np.ndarray) -> np.ndarray:
    """Draw 1-cell Bresenham strokes in place; out-of-bounds cells clipped."""
    h, w = canvas.shape
    for a0, b0, a1, b1 in zip(i0.tolist(), j0.tolist(), i1.tolist(), j1.tolist()):
        di = abs(a1 - a0)
        dj = abs(b1 - b0)
        si = 1 if a0 < a1 else -1
        sj = 1 if b0 < b1 else -1
        err = di - dj
        i, j = a0, b0
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
    return canvas
