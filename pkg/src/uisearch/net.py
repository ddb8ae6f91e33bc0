"""The two embedding networks and their manual forward/backward passes.

The image model is a convolutional autoencoder over semantic layout images.
Its encoder runs four blocks (3x3 conv, ReLU, 2x2 max pool) with channel
plan 3 -> 8 -> 16 -> 16 -> 32; the decoder mirrors the encoder with 2x
nearest-neighbor upsampling in place of pooling and a sigmoid on the final
3-channel layer. The last ``m`` encoder blocks are attention-conditioned:
the binary box-attention map is subsampled to the block's output resolution,
concatenated channel-wise (c + 3 channels) and projected back to c channels
by a per-block 1x1 convolution followed by ReLU. This keeps the structural
feature shape at 32 x H/16 x W/16 for every m in 0..4.

The label model is a fully connected encoder-decoder over the 11-entry
multi-hot content vector, with hidden sizes 16, 32 and 64; the 64-dim code
is the content feature. The retrieval embedding is the row-major flattened
structural feature concatenated with the content feature.

Reconstruction is scored by MSE plus the Dice-loss complement (1 - Dice).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionMismatch, ShapeMismatch
from .layout import NUM_LABELS, AnnotatedLayout, multi_hot
from .nn import ops
from .nn.backend import get_kernels
from .nn.optim import Parameter
from .raster import DEFAULT_PALETTE, Palette, attention_map, rasterize

ENCODER_CHANNELS = (8, 16, 16, 32)
LABEL_SIZES = (16, 32, 64)
EMBED_CHANNELS = ENCODER_CHANNELS[-1]  # 32


@dataclass(frozen=True)
class AutoencoderConfig:
    """Hyperparameters shared by model construction and training."""

    height: int = 256
    width: int = 256
    m: int = 4
    seed: int = 0
    learning_rate: float = 0.00005
    batch_size: int = 32
    epochs: int = 100
    patience: int = 10
    dtype: str = "float64"

    def __post_init__(self):
        if self.height % 16 or self.width % 16 or self.height <= 0 or self.width <= 0:
            raise ValueError(f"resolution {self.height}x{self.width} must be divisible by 16")
        if self.m not in (0, 1, 2, 3, 4):
            raise ValueError(f"m must be in 0..4, got {self.m}")
        if self.batch_size < 1 or self.epochs < 0 or self.patience < 0:
            raise ValueError("batch_size must be >= 1; epochs and patience >= 0")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"dtype must be float64 or float32, got {self.dtype}")

    @property
    def np_dtype(self) -> np.dtype:
        return np.dtype(self.dtype)

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def z1_shape(self) -> tuple[int, int, int]:
        return (EMBED_CHANNELS, self.height // 16, self.width // 16)

    @property
    def embedding_dim(self) -> int:
        c, h, w = self.z1_shape
        return c * h * w + LABEL_SIZES[-1]

    def is_attended(self, block: int) -> bool:
        """Whether 1-based encoder block ``block`` receives the attention map."""
        return block > 4 - self.m


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class ImageAutoencoder:
    """Attention-aware convolutional autoencoder over semantic images."""

    def __init__(self, config: AutoencoderConfig, rng: np.random.Generator | None = None):
        self.config = config
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
        dt = config.np_dtype
        self.params: dict[str, Parameter] = {}

        def add(name: str, value: np.ndarray) -> None:
            self.params[name] = Parameter(name, value)

        cin = 3
        for k, cout in enumerate(ENCODER_CHANNELS, start=1):
            add(f"enc{k}.w", _glorot(rng, (cout, cin, 3, 3), cin * 9, cout * 9, dt))
            add(f"enc{k}.b", np.zeros(cout, dtype=dt))
            if config.is_attended(k):
                add(f"proj{k}.w", _glorot(rng, (cout, cout + 3), cout + 3, cout, dt))
                add(f"proj{k}.b", np.zeros(cout, dtype=dt))
            cin = cout
        dec_plan = list(zip(ENCODER_CHANNELS[::-1], (*ENCODER_CHANNELS[-2::-1], 3)))
        for k, (cin_d, cout_d) in enumerate(dec_plan, start=1):
            add(f"dec{k}.w", _glorot(rng, (cout_d, cin_d, 3, 3), cin_d * 9, cout_d * 9, dt))
            add(f"dec{k}.b", np.zeros(cout_d, dtype=dt))

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def _check_resolution(self, x: np.ndarray, what: str) -> None:
        if x.shape[-3:] != (3, self.config.height, self.config.width):
            raise ResolutionMismatch(
                f"{what} shape {x.shape} does not match model resolution "
                f"3x{self.config.height}x{self.config.width}"
            )

    def encode(self, x: np.ndarray, attn: np.ndarray) -> tuple[np.ndarray, list[dict]]:
        """Batched forward pass of the encoder; returns (z1, cache)."""
        self._check_resolution(x, "image batch")
        self._check_resolution(attn, "attention batch")
        cache: list[dict] = []
        h = x
        for k in range(1, 5):
            blk: dict = {"conv_in": h}
            a = ops.conv2d(h, self.params[f"enc{k}.w"].value, self.params[f"enc{k}.b"].value)
            r = ops.relu(a)
            p, idx = ops.maxpool2_with_indices(r)
            blk.update(pre_relu=a, pool_idx=idx)
            h = p
            if self.config.is_attended(k):
                step_h = attn.shape[2] // p.shape[2]
                step_w = attn.shape[3] // p.shape[3]
                a_k = np.ascontiguousarray(attn[:, :, ::step_h, ::step_w])
                cat = np.concatenate([p, a_k], axis=1)
                pa = ops.conv1x1(cat, self.params[f"proj{k}.w"].value, self.params[f"proj{k}.b"].value)
                h = ops.relu(pa)
                blk.update(cat=cat, proj_pre_relu=pa)
            cache.append(blk)
        return h, cache

    def encode_backward(self, cache: list[dict], g_z1: np.ndarray) -> np.ndarray:
        """Accumulates encoder parameter gradients; returns the input gradient."""
        g = g_z1
        for k in range(4, 0, -1):
            blk = cache[k - 1]
            if self.config.is_attended(k):
                g_pa = ops.relu_backward(blk["proj_pre_relu"], g)
                g_cat, g_pw, g_pb = ops.conv1x1_backward(blk["cat"], self.params[f"proj{k}.w"].value, g_pa)
                self.params[f"proj{k}.w"].accumulate(g_pw)
                self.params[f"proj{k}.b"].accumulate(g_pb)
                g = np.ascontiguousarray(g_cat[:, : g_cat.shape[1] - 3])
            g_r = get_kernels().maxpool2_backward(np.ascontiguousarray(g), blk["pool_idx"])
            g_a = ops.relu_backward(blk["pre_relu"], g_r)
            g, g_w, g_b = ops.conv2d_backward(blk["conv_in"], self.params[f"enc{k}.w"].value, g_a)
            self.params[f"enc{k}.w"].accumulate(g_w)
            self.params[f"enc{k}.b"].accumulate(g_b)
        return g

    def decode(self, z1: np.ndarray) -> tuple[np.ndarray, list[dict]]:
        """Batched decoder pass; returns (reconstruction in (0,1), cache)."""
        expected = (EMBED_CHANNELS, self.config.height // 16, self.config.width // 16)
        if z1.shape[-3:] != expected:
            raise ShapeMismatch(f"z1 shape {z1.shape} does not match {expected}")
        cache = []
        h = z1
        for k in range(1, 5):
            u = ops.upsample2(h)
            a = ops.conv2d(u, self.params[f"dec{k}.w"].value, self.params[f"dec{k}.b"].value)
            out = ops.relu(a) if k < 4 else ops.sigmoid(a)
            cache.append({"up_in": u, "pre_act": a, "out": out})
            h = out
        return h, cache

    def decode_backward(self, cache: list[dict], g_out: np.ndarray) -> np.ndarray:
        """Accumulates decoder parameter gradients; returns the z1 gradient."""
        g = g_out
        for k in range(4, 0, -1):
            blk = cache[k - 1]
            if k == 4:
                g_a = ops.sigmoid_backward(blk["out"], g)
            else:
                g_a = ops.relu_backward(blk["pre_act"], g)
            g_u, g_w, g_b = ops.conv2d_backward(blk["up_in"], self.params[f"dec{k}.w"].value, g_a)
            self.params[f"dec{k}.w"].accumulate(g_w)
            self.params[f"dec{k}.b"].accumulate(g_b)
            g = ops.upsample2_backward(g_u)
        return g


class LabelNet:
    """Fully connected encoder-decoder over the 11-entry multi-hot vector."""

    LAYER_PLAN = (
        ("fc1", LABEL_SIZES[0], NUM_LABELS),
        ("fc2", LABEL_SIZES[1], LABEL_SIZES[0]),
        ("fc3", LABEL_SIZES[2], LABEL_SIZES[1]),
        ("fc4", LABEL_SIZES[1], LABEL_SIZES[2]),
        ("fc5", LABEL_SIZES[0], LABEL_SIZES[1]),
        ("fc6", NUM_LABELS, LABEL_SIZES[0]),
    )

    def __init__(self, config: AutoencoderConfig, rng: np.random.Generator | None = None):
        self.config = config
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
        dt = config.np_dtype
        self.params: dict[str, Parameter] = {}
        for name, rows, cols in self.LAYER_PLAN:
            self.params[f"{name}.w"] = Parameter(f"{name}.w", _glorot(rng, (rows, cols), cols, rows, dt))
            self.params[f"{name}.b"] = Parameter(f"{name}.b", np.zeros(rows, dtype=dt))

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def _fc(self, name: str, x: np.ndarray) -> np.ndarray:
        return ops.fully_connected(x, self.params[f"{name}.w"].value, self.params[f"{name}.b"].value)

    def encode(self, v: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """(N, 11) multi-hot batch -> (N, 64) content code, plus cache."""
        if v.shape[-1] != NUM_LABELS:
            raise ShapeMismatch(f"multi-hot vector must have length {NUM_LABELS}, got {v.shape}")
        a1 = self._fc("fc1", v)
        r1 = ops.relu(a1)
        a2 = self._fc("fc2", r1)
        r2 = ops.relu(a2)
        z2 = self._fc("fc3", r2)
        return z2, [v, a1, r1, a2, r2]

    def decode(self, z2: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        a4 = self._fc("fc4", z2)
        r4 = ops.relu(a4)
        a5 = self._fc("fc5", r4)
        r5 = ops.relu(a5)
        vhat = ops.sigmoid(self._fc("fc6", r5))
        return vhat, [z2, a4, r4, a5, r5, vhat]

    def reconstruct(self, v: np.ndarray) -> tuple[np.ndarray, tuple]:
        z2, enc_cache = self.encode(v)
        vhat, dec_cache = self.decode(z2)
        return vhat, (enc_cache, dec_cache)

    def backward(self, cache: tuple, g_vhat: np.ndarray) -> np.ndarray:
        """Accumulates gradients for a full reconstruct pass."""
        enc_cache, dec_cache = cache
        v, a1, r1, a2, r2 = enc_cache
        z2, a4, r4, a5, r5, vhat = dec_cache

        def back_fc(name: str, x: np.ndarray, g: np.ndarray) -> np.ndarray:
            gx, gw, gb = ops.fully_connected_backward(x, self.params[f"{name}.w"].value, g)
            self.params[f"{name}.w"].accumulate(gw)
            self.params[f"{name}.b"].accumulate(gb)
            return gx

        g = ops.sigmoid_backward(vhat, g_vhat)
        g = back_fc("fc6", r5, g)
        g = ops.relu_backward(a5, g)
        g = back_fc("fc5", r4, g)
        g = ops.relu_backward(a4, g)
        g = back_fc("fc4", z2, g)
        g = back_fc("fc3", r2, g)
        g = ops.relu_backward(a2, g)
        g = back_fc("fc2", r1, g)
        g = ops.relu_backward(a1, g)
        g = back_fc("fc1", v, g)
        return g


# --- losses -------------------------------------------------------------------

def ae_loss(x: np.ndarray, xhat: np.ndarray) -> float:
    """Reconstruction loss: MSE plus the Dice complement, both non-negative."""
    return ops.mse_loss(x, xhat) + (1.0 - ops.dice_coef(x, xhat))


def ae_loss_backward(x: np.ndarray, xhat: np.ndarray) -> np.ndarray:
    """Gradient of :func:`ae_loss` with respect to the reconstruction."""
    _, g_dice = ops.dice_coef_backward(x, xhat)
    return ops.mse_loss_backward(x, xhat) - g_dice


def batch_ae_loss(x: np.ndarray, xhat: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean per-sample autoencoder loss over a batch, with its gradient.

    Each sample contributes ``mse_i + (1 - dice_i)`` where both terms are
    computed per sample; the batch loss is their mean.
    """
    if x.shape != xhat.shape:
        raise ShapeMismatch(f"shapes {x.shape} vs {xhat.shape}")
    n = x.shape[0]
    per = x.size // n
    flat_x = x.reshape(n, -1)
    flat_h = xhat.reshape(n, -1)
    d = flat_h - flat_x
    mse = (d * d).mean(axis=1)
    inter = (flat_x * flat_h).sum(axis=1)
    total = flat_x.sum(axis=1) + flat_h.sum(axis=1)
    denom = total + ops.DICE_EPS
    num = 2.0 * inter + ops.DICE_EPS
    dice = num / denom
    loss = float(np.mean(mse + 1.0 - dice))
    g_mse = 2.0 * d / per
    g_dice = (2.0 * flat_x * denom[:, None] - num[:, None]) / (denom * denom)[:, None]
    grad = ((g_mse - g_dice) / n).reshape(x.shape)
    return loss, grad


# --- public single-sample operations -------------------------------------------

def encode_image(model: ImageAutoencoder, image: np.ndarray, attn: np.ndarray) -> np.ndarray:
    """Structural feature z1 of shape (32, H/16, W/16) for one image."""
    z1, _ = model.encode(image[None], attn[None])
    return z1[0]


def decode_image(model: ImageAutoencoder, z1: np.ndarray) -> np.ndarray:
    """Sigmoid-bounded 3xHxW reconstruction of one structural feature."""
    xhat, _ = model.decode(z1[None])
    return xhat[0]


def encode_label(labelnet: LabelNet, v: np.ndarray) -> np.ndarray:
    """Content feature z2 of length 64 for one multi-hot vector."""
    z2, _ = labelnet.encode(np.asarray(v, dtype=labelnet.config.np_dtype)[None])
    return z2[0]


def embed(
    model: ImageAutoencoder,
    labelnet: LabelNet,
    layout: AnnotatedLayout,
    palette: Palette = DEFAULT_PALETTE,
    z1_scale: float = 1.0,
    z2_scale: float = 1.0,
) -> np.ndarray:
    """Fused retrieval embedding: flattened z1 followed by z2.

    The optional per-part scales default to 1.0 (no rescaling); they exist
    for experiments weighing structure against content.
    """
    cfg = model.config
    dt = cfg.np_dtype
    img = rasterize(layout, cfg.resolution, palette).astype(dt)
    attn = attention_map(layout, cfg.resolution).astype(dt)
    z1 = encode_image(model, img, attn)
    z2 = encode_label(labelnet, multi_hot(layout))
    return np.concatenate([z1.ravel() * z1_scale, z2 * z2_scale])
