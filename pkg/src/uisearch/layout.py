"""Domain types for annotated UI layouts and the component taxonomy.

A layout is a screen: pixel dimensions plus a list of classified bounding
boxes. The twelve component classes carry stable integer codes 0..11 and
stable lowercase names used in every file format this package reads or
writes. The first eleven classes (everything except the upper task bar)
form the label set behind the multi-hot content vector; the bar is still
rasterized but is too ubiquitous to carry discriminative content.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateBox, EmptyCanvas, UnknownClass


class ComponentClass(enum.IntEnum):
    """The twelve UI component classes, codes stable across formats."""

    BACKGROUND_IMAGE = 0
    CHECKED_VIEW = 1
    ICON = 2
    INPUT_FIELD = 3
    IMAGE = 4
    TEXT = 5
    TEXT_BUTTON = 6
    PAGE_INDICATOR = 7
    POP_UP_WINDOW = 8
    SLIDING_MENU = 9
    SWITCH = 10
    UPPER_TASK_BAR = 11

    @property
    def cname(self) -> str:
        """Stable lowercase string name, e.g. ``"text_button"``."""
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "ComponentClass":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise UnknownClass(name) from None


#: The 11 classes encoded in the multi-hot content vector (codes 0..10).
LABEL_SET: tuple[ComponentClass, ...] = tuple(
    c for c in ComponentClass if c is not ComponentClass.UPPER_TASK_BAR
)

NUM_CLASSES = len(ComponentClass)  # 12
NUM_LABELS = len(LABEL_SET)  # 11


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates, origin top-left."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class LayoutElement:
    """One classified box. Confidence is present only for detector output."""

    cls: ComponentClass
    box: BoundingBox
    confidence: float | None = None


@dataclass
class AnnotatedLayout:
    """A screen: canvas dimensions plus an ordered list of elements."""

    id: str
    width: int
    height: int
    elements: list[LayoutElement] = field(default_factory=list)
    category: str | None = None


def _clamp_box(box: BoundingBox, width: float, height: float) -> BoundingBox:
    return BoundingBox(
        x_min=min(max(box.x_min, 0.0), width),
        y_min=min(max(box.y_min, 0.0), height),
        x_max=min(max(box.x_max, 0.0), width),
        y_max=min(max(box.y_max, 0.0), height),
    )


def validate_layout(layout: AnnotatedLayout) -> AnnotatedLayout:
    """Clamp element boxes to the canvas and enforce strict positive area.

    Returns a new layout; the input is not mutated. Detector boxes commonly
    overflow the canvas by a pixel, so out-of-canvas coordinates are clamped
    rather than rejected. An element whose box has zero area after clamping
    is an error, reported with its index.

    Raises:
        EmptyCanvas: width or height is not strictly positive.
        DegenerateBox: an element has zero area after clamping, or a
            non-finite coordinate, or an out-of-range confidence.
    """
    if layout.width <= 0 or layout.height <= 0:
        raise EmptyCanvas(
            f"layout {layout.id!r}: canvas {layout.width}x{layout.height}"
        )
    validated: list[LayoutElement] = []
    for i, el in enumerate(layout.elements):
        b = el.box
        for v in (b.x_min, b.y_min, b.x_max, b.y_max):
            if not math.isfinite(v):
                raise DegenerateBox(
                    f"layout {layout.id!r}: element {i} has non-finite coordinate"
                )
        if el.confidence is not None and not (0.0 <= el.confidence <= 1.0):
            raise DegenerateBox(
                f"layout {layout.id!r}: element {i} confidence {el.confidence} "
                "outside [0, 1]"
            )
        clamped = _clamp_box(b, layout.width, layout.height)
        if clamped.x_min >= clamped.x_max or clamped.y_min >= clamped.y_max:
            raise DegenerateBox(
                f"layout {layout.id!r}: element {i} ({el.cls.cname}) has zero "
                "area after clamping"
            )
        validated.append(el if clamped == b else replace(el, box=clamped))
    return replace(layout, elements=validated)


def multi_hot(layout: AnnotatedLayout) -> np.ndarray:
    """11-entry {0,1} vector marking which label-set classes appear.

    Position ``i`` is 1 iff at least one element of class code ``i`` is
    present. The upper task bar (code 11) is ignored.
    """
    vec = np.zeros(NUM_LABELS, dtype=np.float64)
    for el in layout.elements:
        if el.cls is not ComponentClass.UPPER_TASK_BAR:
            vec[int(el.cls)] = 1.0
    return vec


def scale_layout(layout: AnnotatedLayout, target_w: int, target_h: int) -> AnnotatedLayout:
    """Rescale the canvas and all boxes to ``target_w`` x ``target_h``.

    Relative positions and areas are preserved; element order is preserved.

    Raises:
        EmptyCanvas: non-positive target dimensions.
    """
    if target_w <= 0 or target_h <= 0:
        raise EmptyCanvas(f"target canvas {target_w}x{target_h}")
    sx = target_w / layout.width
    sy = target_h / layout.height
    elements = [
        replace(
            el,
            box=BoundingBox(
                el.box.x_min * sx, el.box.y_min * sy,
                el.box.x_max * sx, el.box.y_max * sy,
            ),
        )
        for el in layout.elements
    ]
    return replace(layout, width=target_w, height=target_h, elements=elements)
