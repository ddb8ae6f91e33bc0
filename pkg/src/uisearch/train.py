"""Mini-batch SGD training of both embedding networks.

The two networks share no parameters, so one pass over the shuffled training
set steps both: the autoencoder on the reconstruction loss over semantic
images and the label net on MSE over multi-hot reconstruction. Semantic
images and attention maps are rasterized per batch (cheap box fills), so
memory stays flat for large corpora.

Everything is seeded: weight init and epoch shuffling derive from
``config.seed``, so a fixed seed reproduces bit-identical weights in
float64 mode on a given backend.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DivergedLoss, EmptySplit
from .layout import AnnotatedLayout, multi_hot
from .net import (
    AutoencoderConfig,
    ImageAutoencoder,
    LabelNet,
    batch_ae_loss,
    encode_image,  # noqa: F401  (re-exported for callers)
)
from .nn import ops
from .nn.optim import sgd_step
from .raster import DEFAULT_PALETTE, Palette, attention_map, rasterize
from .voc import Corpus, SplitSpec
from .weights import ModelWeights


@dataclass
class EpochStats:
    epoch: int
    train_ae: float
    train_label: float
    val_ae: float | None = None
    val_label: float | None = None

    @property
    def val_total(self) -> float | None:
        if self.val_ae is None or self.val_label is None:
            return None
        return self.val_ae + self.val_label


@dataclass
class TrainingLog:
    """Per-epoch losses plus the early-stopping outcome."""

    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int | None = None
    best_val: float | None = None
    stopped_early: bool = False
    wall_seconds: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "epochs": [asdict(e) for e in self.epochs],
                "best_epoch": self.best_epoch,
                "best_val": self.best_val,
                "stopped_early": self.stopped_early,
                "wall_seconds": self.wall_seconds,
            },
            indent=2,
        )


def _prepare_batch(
    layouts: list[AnnotatedLayout],
    idx: np.ndarray,
    config: AutoencoderConfig,
    palette: Palette,
    label_vecs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dt = config.np_dtype
    n = len(idx)
    x = np.empty((n, 3, config.height, config.width), dtype=dt)
    attn = np.empty_like(x)
    for row, i in enumerate(idx):
        x[row] = rasterize(layouts[i], config.resolution, palette)
        attn[row] = attention_map(layouts[i], config.resolution)
    return x, attn, label_vecs[idx].astype(dt)


def _check_finite(value: float, what: str, epoch: int) -> None:
    if not math.isfinite(value):
        raise DivergedLoss(f"{what} loss is non-finite at epoch {epoch}")


def _forward_losses(
    model: ImageAutoencoder,
    labelnet: LabelNet,
    layouts: list[AnnotatedLayout],
    indices: np.ndarray,
    config: AutoencoderConfig,
    palette: Palette,
    label_vecs: np.ndarray,
) -> tuple[float, float]:
    """Evaluation-only mean losses over the given layout indices."""
    ae_total = 0.0
    label_total = 0.0
    count = 0
    for start in range(0, len(indices), config.batch_size):
        idx = indices[start:start + config.batch_size]
        x, attn, v = _prepare_batch(layouts, idx, config, palette, label_vecs)
        z1, _ = model.encode(x, attn)
        xhat, _ = model.decode(z1)
        loss_ae, _ = batch_ae_loss(x, xhat)
        vhat, _ = labelnet.reconstruct(v)
        loss_label = ops.mse_loss(v, vhat)
        ae_total += loss_ae * len(idx)
        label_total += loss_label * len(idx)
        count += len(idx)
    return ae_total / count, label_total / count


def train(
    corpus: Corpus,
    split: SplitSpec,
    config: AutoencoderConfig,
    palette: Palette = DEFAULT_PALETTE,
) -> tuple[ModelWeights, TrainingLog]:
    """Train both networks; returns the weights and the per-epoch log.

    Early stopping watches the summed validation loss and stops after
    ``config.patience`` epochs without improvement, restoring the best
    epoch's weights. With an empty validation split the loop simply runs
    ``config.epochs`` epochs. ``config.epochs == 0`` returns the freshly
    initialized weights and an empty log.

    Raises:
        EmptySplit: the train split holds no layouts.
        DivergedLoss: a non-finite loss appeared.
    """
    by_id = corpus.by_id()
    try:
        train_layouts = [by_id[i] for i in split.train]
        val_layouts = [by_id[i] for i in split.val]
    except KeyError as e:
        raise EmptySplit(f"split id {e.args[0]!r} not present in corpus") from e
    if not train_layouts:
        raise EmptySplit("train split is empty")

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    model = ImageAutoencoder(config, np.random.Generator(np.random.PCG64(seeds[0])))
    labelnet = LabelNet(config, np.random.Generator(np.random.PCG64(seeds[1])))
    shuffle_rng = np.random.Generator(np.random.PCG64(seeds[2]))

    train_labels = np.stack([multi_hot(l) for l in train_layouts]) if train_layouts else None
    val_labels = np.stack([multi_hot(l) for l in val_layouts]) if val_layouts else None

    log = TrainingLog()
    best_snapshot: ModelWeights | None = None
    stall = 0
    t0 = time.perf_counter()

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(train_layouts))
        ae_total = 0.0
        label_total = 0.0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            x, attn, v = _prepare_batch(train_layouts, idx, config, palette, train_labels)

            z1, enc_cache = model.encode(x, attn)
            xhat, dec_cache = model.decode(z1)
            loss_ae, g_xhat = batch_ae_loss(x, xhat)
            g_z1 = model.decode_backward(dec_cache, g_xhat)
            model.encode_backward(enc_cache, g_z1)
            sgd_step(model.parameters(), config.learning_rate)

            vhat, label_cache = labelnet.reconstruct(v)
            loss_label = ops.mse_loss(v, vhat)
            labelnet.backward(label_cache, ops.mse_loss_backward(v, vhat))
            sgd_step(labelnet.parameters(), config.learning_rate)

            _check_finite(loss_ae, "train autoencoder", epoch)
            _check_finite(loss_label, "train label", epoch)
            ae_total += loss_ae * len(idx)
            label_total += loss_label * len(idx)

        stats = EpochStats(
            epoch=epoch,
            train_ae=ae_total / len(order),
            train_label=label_total / len(order),
        )

        if val_layouts:
            val_ae, val_label = _forward_losses(
                model, labelnet, val_layouts,
                np.arange(len(val_layouts)), config, palette, val_labels,
            )
            _check_finite(val_ae, "validation autoencoder", epoch)
            _check_finite(val_label, "validation label", epoch)
            stats.val_ae = val_ae
            stats.val_label = val_label
        log.epochs.append(stats)

        if val_layouts:
            total = stats.val_total
            if log.best_val is None or total < log.best_val:
                log.best_val = total
                log.best_epoch = epoch
                best_snapshot = ModelWeights.from_models(model, labelnet)
                stall = 0
            else:
                stall += 1
                if stall >= config.patience > 0:
                    log.stopped_early = True
                    break

    log.wall_seconds = time.perf_counter() - t0
    weights = best_snapshot if best_snapshot is not None else ModelWeights.from_models(model, labelnet)
    return weights, log
