"""Rasterize layouts into semantic images and box-attention maps.

A semantic image is a 3xHxW float array in [0, 1] where each element's box
is filled with its class color over a background fill. The attention map is
a 3xHxW binary array: channel 0 marks the union of all boxes, channel 1 is
all zeros and channel 2 is all ones.

Pixel coverage is defined with round-to-nearest (half away from zero) and
half-open intervals, ``[round(x_min * sx), round(x_max * sx))``, which is
bit-exact across platforms. Elements paint in decreasing-area order with
ties broken by element index, so small controls stay visible on top of
background images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyResolution, NonDivisibleResolution
from .layout import AnnotatedLayout, ComponentClass

#: Default class colors, RGB in [0,1]. All 13 colors (12 classes plus the
#: background) are pairwise separated by at least 0.15 in channel-wise L-inf
#: distance so classes stay machine-distinguishable after float round trips.
#:
#: The values 0.03/0.97 instead of exact 0/1 are deliberate: reconstruction
#: targets inside the sigmoid's reachable range (inverse-sigmoid ~ +-3.5)
#: keep gradients alive during training, while staying near-binary so the
#: Dice overlap of an image with itself stays close to 1. The most common
#: structural classes sit at near-corners of the RGB cube; rarer classes
#: take interior colors.
DEFAULT_PALETTE_COLORS: dict[ComponentClass, tuple[float, float, float]] = {
    ComponentClass.BACKGROUND_IMAGE: (0.5, 0.5, 0.5),
    ComponentClass.CHECKED_VIEW: (0.97, 0.5, 0.03),
    ComponentClass.ICON: (0.97, 0.97, 0.03),
    ComponentClass.INPUT_FIELD: (0.03, 0.97, 0.97),
    ComponentClass.IMAGE: (0.03, 0.97, 0.03),
    ComponentClass.TEXT: (0.97, 0.03, 0.03),
    ComponentClass.TEXT_BUTTON: (0.03, 0.03, 0.97),
    ComponentClass.PAGE_INDICATOR: (0.97, 0.03, 0.97),
    ComponentClass.POP_UP_WINDOW: (0.03, 0.5, 0.97),
    ComponentClass.SLIDING_MENU: (0.5, 0.03, 0.97),
    ComponentClass.SWITCH: (0.97, 0.5, 0.5),
    ComponentClass.UPPER_TASK_BAR: (0.03, 0.03, 0.03),
}

DEFAULT_BACKGROUND: tuple[float, float, float] = (0.97, 0.97, 0.97)


@dataclass(frozen=True)
class Palette:
    """Class-to-RGB map plus a background color, all channels in [0,1]."""

    colors: dict[ComponentClass, tuple[float, float, float]]
    background: tuple[float, float, float]

    def min_separation(self) -> float:
        """Smallest pairwise channel-wise L-inf distance among all 13 colors."""
        all_colors = [self.background] + [self.colors[c] for c in ComponentClass]
        best = math.inf
        for i in range(len(all_colors)):
            for j in range(i + 1, len(all_colors)):
                d = max(abs(a - b) for a, b in zip(all_colors[i], all_colors[j]))
                best = min(best, d)
        return best

    def as_dict(self) -> dict:
        """JSON-friendly form used by the HTTP palette endpoint."""
        return {
            "background": list(self.background),
            "classes": [
                {"name": c.cname, "code": int(c), "color": list(self.colors[c])}
                for c in ComponentClass
            ],
        }


DEFAULT_PALETTE = Palette(colors=DEFAULT_PALETTE_COLORS, background=DEFAULT_BACKGROUND)


def _round_half_up(x: float) -> int:
    # Platform-stable round-to-nearest; Python's round() is banker's.
    return int(math.floor(x + 0.5))


def _pixel_span(lo: float, hi: float, scale: float, limit: int) -> tuple[int, int]:
    a = _round_half_up(lo * scale)
    b = _round_half_up(hi * scale)
    return max(a, 0), min(b, limit)


def rasterize(
    layout: AnnotatedLayout,
    resolution: tuple[int, int],
    palette: Palette = DEFAULT_PALETTE,
) -> np.ndarray:
    """Paint a validated layout into a 3xHxW semantic image in [0,1].

    Raises:
        EmptyResolution: non-positive height or width.
    """
    h, w = resolution
    if h <= 0 or w <= 0:
        raise EmptyResolution(f"resolution {h}x{w}")
    img = np.empty((3, h, w), dtype=np.float64)
    for ch in range(3):
        img[ch].fill(palette.background[ch])
    sy = h / layout.height
    sx = w / layout.width
    order = sorted(
        range(len(layout.elements)),
        key=lambda i: (-layout.elements[i].box.area, i),
    )
    for i in order:
        el = layout.elements[i]
        x0, x1 = _pixel_span(el.box.x_min, el.box.x_max, sx, w)
        y0, y1 = _pixel_span(el.box.y_min, el.box.y_max, sy, h)
        if x0 >= x1 or y0 >= y1:
            continue  # box rounds to zero pixels at this resolution
        color = palette.colors[el.cls]
        for ch in range(3):
            img[ch, y0:y1, x0:x1] = color[ch]
    return img


def attention_map(layout: AnnotatedLayout, resolution: tuple[int, int]) -> np.ndarray:
    """Binary 3xHxW box-attention image for a validated layout.

    Channel 0 is the union of all scaled boxes, channel 1 is all zeros and
    channel 2 is all ones.
    """
    h, w = resolution
    if h <= 0 or w <= 0:
        raise EmptyResolution(f"resolution {h}x{w}")
    attn = np.zeros((3, h, w), dtype=np.float64)
    attn[2].fill(1.0)
    sy = h / layout.height
    sx = w / layout.width
    for el in layout.elements:
        x0, x1 = _pixel_span(el.box.x_min, el.box.x_max, sx, w)
        y0, y1 = _pixel_span(el.box.y_min, el.box.y_max, sy, h)
        if x0 >= x1 or y0 >= y1:
            continue
        attn[0, y0:y1, x0:x1] = 1.0
    return attn


def downsample_binary(attn: np.ndarray, h: int, w: int) -> np.ndarray:
    """Nearest-neighbor subsample (top-left sample per cell) of a 3xHxW map.

    Raises:
        NonDivisibleResolution: target does not divide the source dims.
    """
    _, src_h, src_w = attn.shape
    if h <= 0 or w <= 0 or src_h % h != 0 or src_w % w != 0:
        raise NonDivisibleResolution(f"{src_h}x{src_w} -> {h}x{w}")
    return attn[:, :: src_h // h, :: src_w // w]


def save_png(image: np.ndarray, path: str | Path) -> None:
    """Export a 3xHxW float image in [0,1] as an 8-bit PNG (debug aid)."""
    from PIL import Image

    arr = np.clip(image, 0.0, 1.0)
    rgb = (np.transpose(arr, (1, 2, 0)) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(rgb, mode="RGB").save(str(path), format="PNG")
