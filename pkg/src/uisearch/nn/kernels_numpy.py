"""Pure numpy kernels: the fallback backend.

All kernels take and return C-contiguous float arrays with a leading batch
dimension (N, C, H, W). Convolutions are expressed as nine shifted
tensor contractions so the heavy lifting lands in BLAS.
"""

from __future__ import annotations

import numpy as np


def conv3x3_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    y = np.broadcast_to(b[None, :, None, None], (n, cout, h, wd)).copy()
    for dr in range(3):
        for dc in range(3):
            y += np.einsum(
                "nchw,oc->nohw",
                xp[:, :, dr:dr + h, dc:dc + wd],
                w[:, :, dr, dc],
                optimize=True,
            )
    return y


def conv3x3_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, cin, h, wd = x.shape
    cout = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    gxp = np.zeros_like(xp)
    gw = np.empty_like(w)
    for dr in range(3):
        for dc in range(3):
            patch = xp[:, :, dr:dr + h, dc:dc + wd]
            gw[:, :, dr, dc] = np.einsum("nohw,nchw->oc", gy, patch, optimize=True)
            gxp[:, :, dr:dr + h, dc:dc + wd] += np.einsum(
                "nohw,oc->nchw", gy, w[:, :, dr, dc], optimize=True
            )
    gb = gy.sum(axis=(0, 2, 3))
    return gxp[:, :, 1:-1, 1:-1].copy(), gw, gb


def conv1x1_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    y = np.einsum("nchw,oc->nohw", x, w, optimize=True)
    y += b[None, :, None, None]
    return y


def conv1x1_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gx = np.einsum("nohw,oc->nchw", gy, w, optimize=True)
    gw = np.einsum("nohw,nchw->oc", gy, x, optimize=True)
    gb = gy.sum(axis=(0, 2, 3))
    return gx, gw, gb


def maxpool2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, c, h, w = x.shape
    win = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    flat = win.reshape(n, c, h // 2, w // 2, 4)
    idx = flat.argmax(axis=-1)  # first max wins: row-major tie rule
    y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return y, idx.astype(np.int64)


def maxpool2_backward(gy: np.ndarray, idx: np.ndarray) -> np.ndarray:
    n, c, h2, w2 = gy.shape
    flat = np.zeros((n, c, h2, w2, 4), dtype=gy.dtype)
    np.put_along_axis(flat, idx[..., None], gy[..., None], axis=-1)
    win = flat.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    return win.reshape(n, c, h2 * 2, w2 * 2).copy()


def upsample2_forward(x: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)


def upsample2_backward(gy: np.ndarray) -> np.ndarray:
    n, c, h, w = gy.shape
    return gy.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))
