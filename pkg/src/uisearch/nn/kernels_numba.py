"""Numba-compiled kernels: the default backend.

Loop nests keep the innermost stride-1 so LLVM can vectorize them. Parallel
loops only split work that is written to disjoint output slices; every
reduction runs in a fixed serial order, so results are deterministic for a
given input.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def conv3x3_forward(x, w, b):
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    y = np.empty((n, cout, h, wd), x.dtype)
    for i in prange(n):
        for o in range(cout):
            yo = y[i, o]
            for r in range(h):
                for c in range(wd):
                    yo[r, c] = b[o]
            for ci in range(cin):
                xc = x[i, ci]
                for dr in range(3):
                    r0 = max(0, 1 - dr)
                    r1 = min(h, h + 1 - dr)
                    for dc in range(3):
                        c0 = max(0, 1 - dc)
                        c1 = min(wd, wd + 1 - dc)
                        wv = w[o, ci, dr, dc]
                        for r in range(r0, r1):
                            xr = xc[r + dr - 1]
                            yr = yo[r]
                            for c in range(c0, c1):
                                yr[c] += wv * xr[c + dc - 1]
    return y


@njit(cache=True, parallel=True)
def _conv3x3_grad_x(w, gy, cin):
    n, cout, h, wd = gy.shape
    gx = np.zeros((n, cin, h, wd), gy.dtype)
    for i in prange(n):
        for ci in range(cin):
            gxc = gx[i, ci]
            for o in range(cout):
                gyo = gy[i, o]
                for dr in range(3):
                    r0 = max(0, 1 - dr)
                    r1 = min(h, h + 1 - dr)
                    for dc in range(3):
                        c0 = max(0, 1 - dc)
                        c1 = min(wd, wd + 1 - dc)
                        wv = w[o, ci, dr, dc]
                        for r in range(r0, r1):
                            gxr = gxc[r + dr - 1]
                            gyr = gyo[r]
                            for c in range(c0, c1):
                                gxr[c + dc - 1] += wv * gyr[c]
    return gx


@njit(cache=True, parallel=True)
def _conv3x3_grad_wb(x, gy, cout):
    n, cin, h, wd = x.shape
    gw = np.zeros((cout, cin, 3, 3), x.dtype)
    gb = np.zeros(cout, x.dtype)
    for o in prange(cout):
        sb = 0.0
        for i in range(n):
            gyo = gy[i, o]
            for r in range(h):
                for c in range(wd):
                    sb += gyo[r, c]
            for ci in range(cin):
                xc = x[i, ci]
                for dr in range(3):
                    r0 = max(0, 1 - dr)
                    r1 = min(h, h + 1 - dr)
                    for dc in range(3):
                        c0 = max(0, 1 - dc)
                        c1 = min(wd, wd + 1 - dc)
                        acc = 0.0
                        for r in range(r0, r1):
                            xr = xc[r + dr - 1]
                            gyr = gyo[r]
                            for c in range(c0, c1):
                                acc += gyr[c] * xr[c + dc - 1]
                        gw[o, ci, dr, dc] += acc
        gb[o] = sb
    return gw, gb


def conv3x3_backward(x, w, gy):
    gx = _conv3x3_grad_x(w, gy, x.shape[1])
    gw, gb = _conv3x3_grad_wb(x, gy, w.shape[0])
    return gx, gw, gb


@njit(cache=True, parallel=True)
def conv1x1_forward(x, w, b):
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    y = np.empty((n, cout, h, wd), x.dtype)
    for i in prange(n):
        for o in range(cout):
            yo = y[i, o]
            for r in range(h):
                for c in range(wd):
                    yo[r, c] = b[o]
            for ci in range(cin):
                wv = w[o, ci]
                xc = x[i, ci]
                for r in range(h):
                    yr = yo[r]
                    xr = xc[r]
                    for c in range(wd):
                        yr[c] += wv * xr[c]
    return y


@njit(cache=True, parallel=True)
def _conv1x1_grad_x(w, gy, cin):
    n, cout, h, wd = gy.shape
    gx = np.zeros((n, cin, h, wd), gy.dtype)
    for i in prange(n):
        for ci in range(cin):
            gxc = gx[i, ci]
            for o in range(cout):
                wv = w[o, ci]
                gyo = gy[i, o]
                for r in range(h):
                    gxr = gxc[r]
                    gyr = gyo[r]
                    for c in range(wd):
                        gxr[c] += wv * gyr[c]
    return gx


@njit(cache=True, parallel=True)
def _conv1x1_grad_wb(x, gy, cout):
    n, cin, h, wd = x.shape
    gw = np.zeros((cout, cin), x.dtype)
    gb = np.zeros(cout, x.dtype)
    for o in prange(cout):
        sb = 0.0
        for i in range(n):
            gyo = gy[i, o]
            for r in range(h):
                for c in range(wd):
                    sb += gyo[r, c]
            for ci in range(cin):
                xc = x[i, ci]
                acc = 0.0
                for r in range(h):
                    xr = xc[r]
                    gyr = gyo[r]
                    for c in range(wd):
                        acc += gyr[c] * xr[c]
                gw[o, ci] += acc
        gb[o] = sb
    return gw, gb


def conv1x1_backward(x, w, gy):
    gx = _conv1x1_grad_x(w, gy, x.shape[1])
    gw, gb = _conv1x1_grad_wb(x, gy, w.shape[0])
    return gx, gw, gb


@njit(cache=True, parallel=True)
def maxpool2_forward(x):
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    y = np.empty((n, c, h2, w2), x.dtype)
    idx = np.empty((n, c, h2, w2), np.int64)
    for i in prange(n):
        for ch in range(c):
            xc = x[i, ch]
            for r in range(h2):
                for cc in range(w2):
                    best = xc[2 * r, 2 * cc]
                    arg = 0
                    v = xc[2 * r, 2 * cc + 1]
                    if v > best:
                        best = v
                        arg = 1
                    v = xc[2 * r + 1, 2 * cc]
                    if v > best:
                        best = v
                        arg = 2
                    v = xc[2 * r + 1, 2 * cc + 1]
                    if v > best:
                        best = v
                        arg = 3
                    y[i, ch, r, cc] = best
                    idx[i, ch, r, cc] = arg
    return y, idx


@njit(cache=True, parallel=True)
def maxpool2_backward(gy, idx):
    n, c, h2, w2 = gy.shape
    gx = np.zeros((n, c, h2 * 2, w2 * 2), gy.dtype)
    for i in prange(n):
        for ch in range(c):
            for r in range(h2):
                for cc in range(w2):
                    arg = idx[i, ch, r, cc]
                    gx[i, ch, 2 * r + arg // 2, 2 * cc + arg % 2] = gy[i, ch, r, cc]
    return gx


@njit(cache=True, parallel=True)
def upsample2_forward(x):
    n, c, h, w = x.shape
    y = np.empty((n, c, 2 * h, 2 * w), x.dtype)
    for i in prange(n):
        for ch in range(c):
            for r in range(h):
                for cc in range(w):
                    v = x[i, ch, r, cc]
                    y[i, ch, 2 * r, 2 * cc] = v
                    y[i, ch, 2 * r, 2 * cc + 1] = v
                    y[i, ch, 2 * r + 1, 2 * cc] = v
                    y[i, ch, 2 * r + 1, 2 * cc + 1] = v
    return y


@njit(cache=True, parallel=True)
def upsample2_backward(gy):
    n, c, h2, w2 = gy.shape
    h, w = h2 // 2, w2 // 2
    gx = np.empty((n, c, h, w), gy.dtype)
    for i in prange(n):
        for ch in range(c):
            for r in range(h):
                for cc in range(w):
                    gx[i, ch, r, cc] = (
                        gy[i, ch, 2 * r, 2 * cc]
                        + gy[i, ch, 2 * r, 2 * cc + 1]
                        + gy[i, ch, 2 * r + 1, 2 * cc]
                        + gy[i, ch, 2 * r + 1, 2 * cc + 1]
                    )
    return gx
