"""Dense-tensor operations with hand-derived gradients.

Tensors are plain numpy arrays (contiguous, row-major). Spatial operations
take either a single sample ``(C, H, W)`` or a batch ``(N, C, H, W)``; the
fully connected layer takes ``(n,)`` or ``(N, n)``. Every forward op has an
explicit backward companion returning exact gradients of a scalar loss, and
every backward is covered by the finite-difference checker in
:mod:`uisearch.nn.gradcheck`.

Conventions fixed here so results are reproducible bit-for-bit:

* ReLU's subgradient at exactly 0 is 0.
* maxpool2 ties route to the first maximal position in row-major order.
* MSE is the mean (not sum) of squared differences, so loss magnitudes are
  resolution-independent.
* The Dice coefficient is smoothed with ``eps = 1e-12`` in numerator and
  denominator, making the empty-vs-empty case equal 1 while leaving the
  non-empty fixtures exact to well below 1e-9.
"""

from __future__ import annotations

import numpy as np

from ..errors import OddSpatialDim, ShapeMismatch
from .backend import get_kernels

DICE_EPS = 1e-12


def _as_batch(x: np.ndarray, ndim: int) -> tuple[np.ndarray, bool]:
    if x.ndim == ndim:
        return x[None], True
    if x.ndim == ndim + 1:
        return x, False
    raise ShapeMismatch(f"expected {ndim}D or {ndim + 1}D input, got shape {x.shape}")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeMismatch(msg)


def _c(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(x)


# --- convolutions -----------------------------------------------------------

def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3x3 cross-correlation, stride 1, zero padding 1 (spatial size kept)."""
    xb, squeeze = _as_batch(x, 3)
    _require(w.ndim == 4 and w.shape[2:] == (3, 3), f"kernels must be (Cout,Cin,3,3), got {w.shape}")
    _require(xb.shape[1] == w.shape[1], f"input channels {xb.shape[1]} != kernel Cin {w.shape[1]}")
    _require(b.shape == (w.shape[0],), f"bias shape {b.shape} != ({w.shape[0]},)")
    y = get_kernels().conv3x3_forward(_c(xb), _c(w), _c(b))
    return y[0] if squeeze else y


def conv2d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (gx, gw, gb) of a scalar loss through :func:`conv2d`."""
    xb, squeeze = _as_batch(x, 3)
    gyb, _ = _as_batch(gy, 3)
    _require(gyb.shape == (xb.shape[0], w.shape[0]) + xb.shape[2:], f"upstream grad shape {gy.shape} mismatched")
    gx, gw, gb = get_kernels().conv3x3_backward(_c(xb), _c(w), _c(gyb))
    return (gx[0] if squeeze else gx), gw, gb


def conv1x1(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise (1x1) convolution: per-pixel channel mixing, w is (Cout,Cin)."""
    xb, squeeze = _as_batch(x, 3)
    _require(w.ndim == 2, f"1x1 kernels must be (Cout,Cin), got {w.shape}")
    _require(xb.shape[1] == w.shape[1], f"input channels {xb.shape[1]} != kernel Cin {w.shape[1]}")
    _require(b.shape == (w.shape[0],), f"bias shape {b.shape} != ({w.shape[0]},)")
    y = get_kernels().conv1x1_forward(_c(xb), _c(w), _c(b))
    return y[0] if squeeze else y


def conv1x1_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xb, squeeze = _as_batch(x, 3)
    gyb, _ = _as_batch(gy, 3)
    _require(gyb.shape == (xb.shape[0], w.shape[0]) + xb.shape[2:], f"upstream grad shape {gy.shape} mismatched")
    gx, gw, gb = get_kernels().conv1x1_backward(_c(xb), _c(w), _c(gyb))
    return (gx[0] if squeeze else gx), gw, gb


# --- elementwise ------------------------------------------------------------

def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, gy: np.ndarray) -> np.ndarray:
    # Gradient passes iff input > 0; the subgradient at exactly 0 is 0.
    return np.where(x > 0.0, gy, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid_backward(y: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Backward from the forward *output* y = sigmoid(x)."""
    return gy * y * (1.0 - y)


# --- pooling / upsampling ---------------------------------------------------

def maxpool2(x: np.ndarray) -> np.ndarray:
    """2x2 max pooling with stride 2; spatial dims must be even."""
    y, _ = maxpool2_with_indices(x)
    return y


def maxpool2_with_indices(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xb, squeeze = _as_batch(x, 3)
    if xb.shape[2] % 2 or xb.shape[3] % 2:
        raise OddSpatialDim(f"spatial dims {xb.shape[2]}x{xb.shape[3]} not even")
    y, idx = get_kernels().maxpool2_forward(_c(xb))
    return (y[0], idx[0]) if squeeze else (y, idx)


def maxpool2_backward(x: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Routes each window's gradient to its (first row-major) argmax cell."""
    xb, squeeze = _as_batch(x, 3)
    gyb, _ = _as_batch(gy, 3)
    if xb.shape[2] % 2 or xb.shape[3] % 2:
        raise OddSpatialDim(f"spatial dims {xb.shape[2]}x{xb.shape[3]} not even")
    _, idx = get_kernels().maxpool2_forward(_c(xb))
    gx = get_kernels().maxpool2_backward(_c(gyb), idx)
    return gx[0] if squeeze else gx


def upsample2(x: np.ndarray) -> np.ndarray:
    """Nearest-neighbor 2x replication of both spatial dims."""
    xb, squeeze = _as_batch(x, 3)
    y = get_kernels().upsample2_forward(_c(xb))
    return y[0] if squeeze else y


def upsample2_backward(gy: np.ndarray) -> np.ndarray:
    """Sums the four replicated gradients back onto each source cell."""
    gyb, squeeze = _as_batch(gy, 3)
    gx = get_kernels().upsample2_backward(_c(gyb))
    return gx[0] if squeeze else gx


# --- fully connected ---------------------------------------------------------

def fully_connected(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """y = W x + b for x of shape (n,) or batched (N, n)."""
    _require(w.ndim == 2, f"W must be 2D, got {w.shape}")
    _require(b.shape == (w.shape[0],), f"bias shape {b.shape} != ({w.shape[0]},)")
    xb, squeeze = _as_batch(x, 1)
    _require(xb.shape[1] == w.shape[1], f"input dim {xb.shape[1]} != W columns {w.shape[1]}")
    y = xb @ w.T + b
    return y[0] if squeeze else y


def fully_connected_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xb, squeeze = _as_batch(x, 1)
    gyb, _ = _as_batch(gy, 1)
    _require(gyb.shape == (xb.shape[0], w.shape[0]), f"upstream grad shape {gy.shape} mismatched")
    gx = gyb @ w
    gw = gyb.T @ xb
    gb = gyb.sum(axis=0)
    return (gx[0] if squeeze else gx), gw, gb


# --- losses -------------------------------------------------------------------

def mse_loss(x: np.ndarray, xhat: np.ndarray) -> float:
    """Mean over all entries of (x - xhat)^2."""
    _require(x.shape == xhat.shape, f"shapes {x.shape} vs {xhat.shape}")
    d = xhat - x
    return float(np.mean(d * d))


def mse_loss_backward(x: np.ndarray, xhat: np.ndarray) -> np.ndarray:
    """Gradient of :func:`mse_loss` with respect to ``xhat``."""
    _require(x.shape == xhat.shape, f"shapes {x.shape} vs {xhat.shape}")
    return 2.0 * (xhat - x) / x.size


def dice_coef(x: np.ndarray, xhat: np.ndarray) -> float:
    """Soft Dice overlap: (2 sum(x*xhat) + eps) / (sum(x) + sum(xhat) + eps).

    Symmetric in its arguments and in [0, 1] for inputs in [0, 1]; equals 1
    when both inputs are empty (all zero).
    """
    _require(x.shape == xhat.shape, f"shapes {x.shape} vs {xhat.shape}")
    inter = float(np.sum(x * xhat))
    total = float(np.sum(x)) + float(np.sum(xhat))
    return (2.0 * inter + DICE_EPS) / (total + DICE_EPS)


def dice_coef_backward(x: np.ndarray, xhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of :func:`dice_coef` w.r.t. both arguments (quotient rule)."""
    _require(x.shape == xhat.shape, f"shapes {x.shape} vs {xhat.shape}")
    inter = float(np.sum(x * xhat))
    denom = float(np.sum(x)) + float(np.sum(xhat)) + DICE_EPS
    num = 2.0 * inter + DICE_EPS
    gx = (2.0 * xhat * denom - num) / (denom * denom)
    gxhat = (2.0 * x * denom - num) / (denom * denom)
    return gx, gxhat
