"""Pascal-VOC XML and detector-JSON ingestion, corpus loading and splits.

The XML contract is the usual VOC skeleton::

    annotation/{filename, size/{width, height},
                object*/{name, bndbox/{xmin, ymin, xmax, ymax}}}

Detector output arrives as JSON::

    {"id": str, "width": int, "height": int,
     "detections": [{"class": str, "box": [xmin, ymin, xmax, ymax],
                     "confidence": number}]}

Coordinates are emitted as integers on write (VOC convention); sub-pixel
information is not preserved, so ``parse(write(layout))`` recovers the
layout only to within 0.5 px.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.etree import ElementTree as ET

import numpy as np

from .errors import (
    EmptyCorpus,
    MalformedJson,
    MalformedXml,
    MissingField,
    UnknownClass,
)
from .layout import (
    AnnotatedLayout,
    BoundingBox,
    ComponentClass,
    LayoutElement,
    validate_layout,
)

log = logging.getLogger(__name__)

VAL_FRACTION = 0.1
TEST_FRACTION = 0.1


@dataclass
class Corpus:
    """An ordered collection of validated layouts with unique ids."""

    layouts: list[AnnotatedLayout]
    provenance: str = ""
    #: (filename, message) pairs for files that failed to parse on load.
    failures: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.layouts)

    def by_id(self) -> dict[str, AnnotatedLayout]:
        return {l.id: l for l in self.layouts}


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/val/test id lists produced by :func:`split_corpus`."""

    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    seed: int


def _text_of(root: ET.Element, path: str) -> str:
    node = root.find(path)
    if node is None or node.text is None:
        raise MissingField(path)
    return node.text.strip()


def parse_voc(xml_bytes: bytes | str) -> AnnotatedLayout:
    """Parse one Pascal-VOC annotation document into a validated layout.

    The layout id is the ``filename`` field with any extension stripped.

    Raises:
        MalformedXml: not well-formed XML, or a non-numeric field.
        MissingField: a required element is absent.
        UnknownClass: an object name outside the 12-class table.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as e:
        raise MalformedXml(str(e)) from e

    layout_id = Path(_text_of(root, "filename")).stem
    try:
        width = int(_text_of(root, "size/width"))
        height = int(_text_of(root, "size/height"))
    except ValueError as e:
        raise MalformedXml(f"non-integer canvas size: {e}") from e

    elements = []
    for obj in root.findall("object"):
        cls = ComponentClass.from_name(_text_of(obj, "name"))
        try:
            box = BoundingBox(
                x_min=float(_text_of(obj, "bndbox/xmin")),
                y_min=float(_text_of(obj, "bndbox/ymin")),
                x_max=float(_text_of(obj, "bndbox/xmax")),
                y_max=float(_text_of(obj, "bndbox/ymax")),
            )
        except ValueError as e:
            raise MalformedXml(f"non-numeric bndbox coordinate: {e}") from e
        elements.append(LayoutElement(cls=cls, box=box))

    return validate_layout(
        AnnotatedLayout(id=layout_id, width=width, height=height, elements=elements)
    )


def write_voc(layout: AnnotatedLayout) -> bytes:
    """Emit a canonical Pascal-VOC document for a validated layout.

    Output is deterministic: element order is preserved and coordinates are
    rounded to integers.
    """
    root = ET.Element("annotation")
    ET.SubElement(root, "filename").text = f"{layout.id}.png"
    size = ET.SubElement(root, "size")
    ET.SubElement(size, "width").text = str(layout.width)
    ET.SubElement(size, "height").text = str(layout.height)
    ET.SubElement(size, "depth").text = "3"
    for el in layout.elements:
        obj = ET.SubElement(root, "object")
        ET.SubElement(obj, "name").text = el.cls.cname
        bnd = ET.SubElement(obj, "bndbox")
        ET.SubElement(bnd, "xmin").text = str(round(el.box.x_min))
        ET.SubElement(bnd, "ymin").text = str(round(el.box.y_min))
        ET.SubElement(bnd, "xmax").text = str(round(el.box.x_max))
        ET.SubElement(bnd, "ymax").text = str(round(el.box.y_max))
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def parse_detections(json_bytes: bytes | str, confidence_threshold: float = 0.0) -> AnnotatedLayout:
    """Parse a detector-output document, dropping low-confidence boxes.

    Detections with ``confidence < confidence_threshold`` are discarded;
    the survivors are validated as a layout.

    Raises:
        MalformedJson: invalid JSON or a schema violation.
        UnknownClass: a class name outside the 12-class table.
    """
    try:
        doc = json.loads(json_bytes)
    except json.JSONDecodeError as e:
        raise MalformedJson(str(e)) from e
    return layout_from_detections_dict(doc, confidence_threshold)


def layout_from_detections_dict(
    doc: object, confidence_threshold: float = 0.0
) -> AnnotatedLayout:
    """Build a validated layout from an already-decoded detections document."""
    if not isinstance(doc, dict):
        raise MalformedJson("detections document must be a JSON object")
    try:
        layout_id = str(doc.get("id", "query"))
        width = int(doc["width"])
        height = int(doc["height"])
        raw = doc["detections"]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedJson(f"bad detections document: {e!r}") from e
    if not isinstance(raw, list):
        raise MalformedJson('"detections" must be a list')

    elements = []
    for i, det in enumerate(raw):
        if not isinstance(det, dict):
            raise MalformedJson(f"detection {i} must be an object")
        try:
            name = det["class"]
            box = det["box"]
        except KeyError as e:
            raise MalformedJson(f"detection {i} missing {e.args[0]!r}") from e
        cls = ComponentClass.from_name(str(name))
        if not isinstance(box, (list, tuple)) or len(box) != 4:
            raise MalformedJson(f"detection {i}: box must be [xmin,ymin,xmax,ymax]")
        try:
            coords = [float(v) for v in box]
        except (TypeError, ValueError) as e:
            raise MalformedJson(f"detection {i}: non-numeric box") from e
        confidence = det.get("confidence")
        if confidence is not None:
            confidence = float(confidence)
            if not math.isfinite(confidence):
                raise MalformedJson(f"detection {i}: non-finite confidence")
            if confidence < confidence_threshold:
                continue
        elements.append(
            LayoutElement(cls=cls, box=BoundingBox(*coords), confidence=confidence)
        )
    return validate_layout(
        AnnotatedLayout(id=layout_id, width=width, height=height, elements=elements)
    )


def layout_to_dict(layout: AnnotatedLayout) -> dict:
    """The detections-JSON form of a layout (confidence only when present)."""
    detections = []
    for el in layout.elements:
        det: dict = {
            "class": el.cls.cname,
            "box": [el.box.x_min, el.box.y_min, el.box.x_max, el.box.y_max],
        }
        if el.confidence is not None:
            det["confidence"] = el.confidence
        detections.append(det)
    doc: dict = {
        "id": layout.id,
        "width": layout.width,
        "height": layout.height,
        "detections": detections,
    }
    if layout.category is not None:
        doc["category"] = layout.category
    return doc


def load_corpus(directory: str | Path) -> Corpus:
    """Parse every ``*.xml`` file under ``directory`` (non-recursive).

    Files are visited in lexicographic filename order so the corpus order is
    deterministic. Files that fail to parse (or repeat an id) are skipped and
    recorded in ``corpus.failures`` rather than aborting the load. When a
    ``categories.csv`` sidecar is present, layout categories are filled from
    it.

    Raises:
        OSError: the directory cannot be read.
    """
    directory = Path(directory)
    categories = read_categories(directory / "categories.csv")
    layouts: list[AnnotatedLayout] = []
    failures: list[tuple[str, str]] = []
    seen: set[str] = set()
    for path in sorted(directory.glob("*.xml")):
        try:
            layout = parse_voc(path.read_bytes())
        except Exception as e:  # noqa: BLE001 - skip-and-report by contract
            failures.append((path.name, str(e)))
            log.warning("skipping %s: %s", path.name, e)
            continue
        if layout.id in seen:
            failures.append((path.name, f"duplicate id {layout.id!r}"))
            log.warning("skipping %s: duplicate id %r", path.name, layout.id)
            continue
        seen.add(layout.id)
        layout.category = categories.get(layout.id)
        layouts.append(layout)
    return Corpus(layouts=layouts, provenance=str(directory), failures=failures)


def read_categories(path: str | Path) -> dict[str, str]:
    """Read an ``id,category`` CSV sidecar; missing file gives an empty map."""
    path = Path(path)
    if not path.exists():
        return {}
    out: dict[str, str] = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:  # skip header
        if not line.strip():
            continue
        layout_id, _, category = line.partition(",")
        out[layout_id] = category
    return out


def split_corpus(corpus: Corpus, seed: int) -> SplitSpec:
    """Seeded 80:10:10 split: shuffle, then contiguous partition.

    Val and test sizes are ``floor(n/10)`` each; train absorbs the
    remainder. The same seed always yields the identical split.

    Raises:
        EmptyCorpus: the corpus holds no layouts.
    """
    n = len(corpus.layouts)
    if n == 0:
        raise EmptyCorpus("cannot split an empty corpus")
    ids = [l.id for l in corpus.layouts]
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    shuffled = [ids[i] for i in order]
    n_val = int(n * VAL_FRACTION)
    n_test = int(n * TEST_FRACTION)
    n_train = n - n_val - n_test
    return SplitSpec(
        train=tuple(shuffled[:n_train]),
        val=tuple(shuffled[n_train:n_train + n_val]),
        test=tuple(shuffled[n_train + n_val:]),
        seed=seed,
    )
