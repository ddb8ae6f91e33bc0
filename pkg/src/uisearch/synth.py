"""Deterministic synthetic layout generator for tests and evaluation runs.

Six built-in templates model common mobile screen archetypes (login, login
over a background image, onboarding, image grid, settings-style list, and
an open sliding menu). Each template is a list of slots; a slot samples a
component box from fractional center/size ranges with a presence
probability and a count range. Slot ranges are chosen so every sampled box
stays inside the canvas, which keeps realized centers inside their declared
ranges (no clamping drift).

Generation is reproducible: every layout draws from its own PRNG stream
derived from (seed, category index, layout index), so corpora are
byte-identical for a given seed regardless of generation order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .layout import AnnotatedLayout, BoundingBox, ComponentClass, LayoutElement, validate_layout
from .voc import Corpus, write_voc

CANVAS_W = 360
CANVAS_H = 640


@dataclass(frozen=True)
class Slot:
    """One component sampler inside a template."""

    cls: ComponentClass
    cx: tuple[float, float]  # center x range, canvas fraction
    cy: tuple[float, float]
    w: tuple[float, float]  # size ranges, canvas fraction
    h: tuple[float, float]
    presence: float = 1.0
    count: tuple[int, int] = (1, 1)


@dataclass(frozen=True)
class TemplateSpec:
    category: str
    slots: tuple[Slot, ...]


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    per_category: int = 10
    canvas_w: int = CANVAS_W
    canvas_h: int = CANVAS_H

    def __post_init__(self):
        if self.per_category < 1:
            raise ValueError("per_category must be >= 1")


def _bar(cls: ComponentClass) -> Slot:
    return Slot(cls, cx=(0.5, 0.5), cy=(0.02, 0.03), w=(0.96, 1.0), h=(0.035, 0.05))


_LOGIN_CORE = (
    Slot(ComponentClass.TEXT, cx=(0.42, 0.58), cy=(0.16, 0.22), w=(0.4, 0.6), h=(0.05, 0.08)),
    Slot(ComponentClass.INPUT_FIELD, cx=(0.48, 0.52), cy=(0.36, 0.40), w=(0.7, 0.84), h=(0.055, 0.075)),
    Slot(ComponentClass.INPUT_FIELD, cx=(0.48, 0.52), cy=(0.47, 0.51), w=(0.7, 0.84), h=(0.055, 0.075)),
    Slot(ComponentClass.INPUT_FIELD, cx=(0.48, 0.52), cy=(0.58, 0.61), w=(0.7, 0.84), h=(0.055, 0.075), presence=0.4),
    Slot(ComponentClass.TEXT_BUTTON, cx=(0.48, 0.52), cy=(0.70, 0.74), w=(0.55, 0.8), h=(0.06, 0.08)),
    Slot(ComponentClass.CHECKED_VIEW, cx=(0.2, 0.3), cy=(0.64, 0.66), w=(0.06, 0.09), h=(0.03, 0.045), presence=0.5),
    Slot(ComponentClass.TEXT, cx=(0.45, 0.55), cy=(0.82, 0.86), w=(0.3, 0.5), h=(0.03, 0.045), presence=0.7),
)

TEMPLATES: tuple[TemplateSpec, ...] = (
    TemplateSpec("login", (_bar(ComponentClass.UPPER_TASK_BAR), *_LOGIN_CORE,
                           Slot(ComponentClass.ICON, cx=(0.44, 0.56), cy=(0.08, 0.11), w=(0.1, 0.16), h=(0.05, 0.08), presence=0.8))),
    TemplateSpec("login_with_background", (
        Slot(ComponentClass.BACKGROUND_IMAGE, cx=(0.5, 0.5), cy=(0.5, 0.5), w=(0.98, 1.0), h=(0.98, 1.0)),
        _bar(ComponentClass.UPPER_TASK_BAR),
        *_LOGIN_CORE,
    )),
    TemplateSpec("onboarding", (
        _bar(ComponentClass.UPPER_TASK_BAR),
        Slot(ComponentClass.IMAGE, cx=(0.44, 0.56), cy=(0.30, 0.38), w=(0.55, 0.8), h=(0.3, 0.42)),
        Slot(ComponentClass.TEXT, cx=(0.44, 0.56), cy=(0.60, 0.65), w=(0.5, 0.75), h=(0.05, 0.08)),
        Slot(ComponentClass.TEXT, cx=(0.44, 0.56), cy=(0.70, 0.74), w=(0.4, 0.6), h=(0.03, 0.05), presence=0.7),
        Slot(ComponentClass.PAGE_INDICATOR, cx=(0.46, 0.54), cy=(0.80, 0.83), w=(0.18, 0.28), h=(0.02, 0.03)),
        Slot(ComponentClass.TEXT_BUTTON, cx=(0.46, 0.54), cy=(0.89, 0.92), w=(0.5, 0.75), h=(0.055, 0.075)),
    )),
    TemplateSpec("grid", (
        _bar(ComponentClass.UPPER_TASK_BAR),
        Slot(ComponentClass.TEXT, cx=(0.28, 0.4), cy=(0.09, 0.12), w=(0.3, 0.45), h=(0.035, 0.05)),
        Slot(ComponentClass.ICON, cx=(0.86, 0.92), cy=(0.09, 0.12), w=(0.07, 0.1), h=(0.035, 0.05), presence=0.8),
        Slot(ComponentClass.IMAGE, cx=(0.27, 0.29), cy=(0.24, 0.26), w=(0.36, 0.42), h=(0.16, 0.2)),
        Slot(ComponentClass.IMAGE, cx=(0.71, 0.73), cy=(0.24, 0.26), w=(0.36, 0.42), h=(0.16, 0.2)),
        Slot(ComponentClass.IMAGE, cx=(0.27, 0.29), cy=(0.48, 0.50), w=(0.36, 0.42), h=(0.16, 0.2)),
        Slot(ComponentClass.IMAGE, cx=(0.71, 0.73), cy=(0.48, 0.50), w=(0.36, 0.42), h=(0.16, 0.2)),
        Slot(ComponentClass.IMAGE, cx=(0.27, 0.29), cy=(0.72, 0.74), w=(0.36, 0.42), h=(0.16, 0.2), presence=0.8),
        Slot(ComponentClass.IMAGE, cx=(0.71, 0.73), cy=(0.72, 0.74), w=(0.36, 0.42), h=(0.16, 0.2), presence=0.8),
        Slot(ComponentClass.TEXT, cx=(0.27, 0.29), cy=(0.87, 0.89), w=(0.3, 0.4), h=(0.025, 0.035), presence=0.6),
        Slot(ComponentClass.TEXT, cx=(0.71, 0.73), cy=(0.87, 0.89), w=(0.3, 0.4), h=(0.025, 0.035), presence=0.6),
    )),
    # Deliberately shares its class inventory with "grid" (bar, text, image,
    # icon): rows of thumbnails versus two-column tiles. Telling the two
    # apart requires the layout structure, not just which classes appear.
    TemplateSpec("list", (
        _bar(ComponentClass.UPPER_TASK_BAR),
        Slot(ComponentClass.TEXT, cx=(0.3, 0.45), cy=(0.09, 0.12), w=(0.35, 0.5), h=(0.04, 0.055)),
        Slot(ComponentClass.IMAGE, cx=(0.13, 0.15), cy=(0.22, 0.24), w=(0.14, 0.18), h=(0.055, 0.07)),
        Slot(ComponentClass.TEXT, cx=(0.54, 0.58), cy=(0.22, 0.24), w=(0.5, 0.6), h=(0.035, 0.05)),
        Slot(ComponentClass.IMAGE, cx=(0.13, 0.15), cy=(0.35, 0.37), w=(0.14, 0.18), h=(0.055, 0.07)),
        Slot(ComponentClass.TEXT, cx=(0.54, 0.58), cy=(0.35, 0.37), w=(0.5, 0.6), h=(0.035, 0.05)),
        Slot(ComponentClass.IMAGE, cx=(0.13, 0.15), cy=(0.48, 0.50), w=(0.14, 0.18), h=(0.055, 0.07)),
        Slot(ComponentClass.TEXT, cx=(0.54, 0.58), cy=(0.48, 0.50), w=(0.5, 0.6), h=(0.035, 0.05)),
        Slot(ComponentClass.IMAGE, cx=(0.13, 0.15), cy=(0.61, 0.63), w=(0.14, 0.18), h=(0.055, 0.07), presence=0.8),
        Slot(ComponentClass.TEXT, cx=(0.54, 0.58), cy=(0.61, 0.63), w=(0.5, 0.6), h=(0.035, 0.05), presence=0.8),
        Slot(ComponentClass.ICON, cx=(0.88, 0.9), cy=(0.22, 0.24), w=(0.06, 0.08), h=(0.034, 0.045), presence=0.5),
        Slot(ComponentClass.SWITCH, cx=(0.88, 0.9), cy=(0.35, 0.37), w=(0.09, 0.12), h=(0.035, 0.05), presence=0.3),
    )),
    TemplateSpec("sliding_menu", (
        _bar(ComponentClass.UPPER_TASK_BAR),
        Slot(ComponentClass.SLIDING_MENU, cx=(0.325, 0.36), cy=(0.52, 0.53), w=(0.65, 0.72), h=(0.9, 0.94)),
        Slot(ComponentClass.IMAGE, cx=(0.2, 0.26), cy=(0.14, 0.17), w=(0.16, 0.22), h=(0.09, 0.12)),
        Slot(ComponentClass.TEXT, cx=(0.24, 0.3), cy=(0.26, 0.28), w=(0.3, 0.4), h=(0.03, 0.04)),
        Slot(ComponentClass.TEXT, cx=(0.24, 0.3), cy=(0.35, 0.37), w=(0.3, 0.4), h=(0.03, 0.04)),
        Slot(ComponentClass.TEXT, cx=(0.24, 0.3), cy=(0.44, 0.46), w=(0.3, 0.4), h=(0.03, 0.04)),
        Slot(ComponentClass.TEXT, cx=(0.24, 0.3), cy=(0.53, 0.55), w=(0.3, 0.4), h=(0.03, 0.04), presence=0.7),
        Slot(ComponentClass.ICON, cx=(0.08, 0.1), cy=(0.26, 0.28), w=(0.06, 0.08), h=(0.034, 0.045), presence=0.8),
        Slot(ComponentClass.ICON, cx=(0.08, 0.1), cy=(0.35, 0.37), w=(0.06, 0.08), h=(0.034, 0.045), presence=0.8),
    )),
)

CATEGORIES = tuple(t.category for t in TEMPLATES)


def _sample_slot(slot: Slot, rng: np.random.Generator, cw: int, ch: int) -> list[LayoutElement]:
    elements = []
    if rng.random() >= slot.presence:
        return elements
    count = int(rng.integers(slot.count[0], slot.count[1] + 1))
    for _ in range(count):
        cx = rng.uniform(*slot.cx) * cw
        cy = rng.uniform(*slot.cy) * ch
        w = rng.uniform(*slot.w) * cw
        h = rng.uniform(*slot.h) * ch
        box = BoundingBox(
            x_min=max(cx - w / 2, 0.0),
            y_min=max(cy - h / 2, 0.0),
            x_max=min(cx + w / 2, cw),
            y_max=min(cy + h / 2, ch),
        )
        elements.append(LayoutElement(cls=slot.cls, box=box))
    return elements


def generate(config: GeneratorConfig) -> Corpus:
    """Generate ``per_category`` layouts for each built-in template.

    Every layout validates; ids are ``{category}_{index:04d}``. The same
    seed always yields the identical corpus.
    """
    layouts = []
    for t_idx, template in enumerate(TEMPLATES):
        for i in range(config.per_category):
            rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([config.seed, t_idx, i]))
            )
            elements: list[LayoutElement] = []
            for slot in template.slots:
                elements.extend(_sample_slot(slot, rng, config.canvas_w, config.canvas_h))
            layout = AnnotatedLayout(
                id=f"{template.category}_{i:04d}",
                width=config.canvas_w,
                height=config.canvas_h,
                elements=elements,
                category=template.category,
            )
            layouts.append(validate_layout(layout))
    return Corpus(layouts=layouts, provenance=f"synthetic(seed={config.seed})")


def categories_csv(corpus: Corpus) -> str:
    """The ``id,category`` sidecar contents (UTF-8 text, LF endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "category"])
    for layout in corpus.layouts:
        writer.writerow([layout.id, layout.category or ""])
    return buf.getvalue()


def export_corpus(corpus: Corpus, directory: str | Path) -> None:
    """Write one VOC XML per layout plus the categories.csv sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for layout in corpus.layouts:
        (directory / f"{layout.id}.xml").write_bytes(write_voc(layout))
    (directory / "categories.csv").write_text(categories_csv(corpus), encoding="utf-8")
