"""Retrieval and detection evaluation metrics.

Retrieval quality is precision@K: the fraction of the top-K retrieved
layouts sharing the query's design-category label, averaged over queries.
Detection quality follows the usual box-matching pipeline: greedy
confidence-ordered one-to-one matching at an IoU threshold, per-class
precision-recall curves from pooled predictions, AP as the area under the
monotone precision envelope (all-point interpolation), AUC as the
trapezoidal area under the raw PR points, and mAP as the unweighted class
mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInput,
    EmptyTestSet,
    MissingConfidence,
    NoGroundTruth,
    UnknownId,
)
from .index import EmbeddingIndex, query
from .layout import AnnotatedLayout, BoundingBox, LayoutElement
from .net import ImageAutoencoder, LabelNet, embed

RETRIEVAL_K_VALUES = (1, 2, 4, 6, 8, 10)
MIN_CATEGORY_SIZE = 10


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def precision_at_k(
    result, labels: dict[str, str], query_category: str, k: int
) -> float:
    """Fraction of the first K results sharing the query's category.

    The denominator is ``min(K, len(result))`` so short result lists are
    scored over what was actually retrieved.

    Raises:
        UnknownId: a retrieved id is missing from ``labels``.
        ValueError: k < 1.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    considered = result.entries[:k]
    if not considered:
        return 0.0
    matches = 0
    for lid, _ in considered:
        if lid not in labels:
            raise UnknownId(lid)
        if labels[lid] == query_category:
            matches += 1
    return matches / len(considered)


@dataclass(frozen=True)
class PredictionVerdict:
    confidence: float
    is_tp: bool
    matched_gt: int | None = None


@dataclass
class DetectionMatchReport:
    """Greedy matching outcome for one image and one class."""

    verdicts: list[PredictionVerdict]
    fn: int  # unmatched ground-truth boxes

    @property
    def tp(self) -> int:
        return sum(1 for v in self.verdicts if v.is_tp)

    @property
    def fp(self) -> int:
        return len(self.verdicts) - self.tp

    @property
    def n_gt(self) -> int:
        return self.tp + self.fn


def match_detections(
    preds: list[LayoutElement],
    gts: list[LayoutElement],
    iou_threshold: float = 0.5,
) -> DetectionMatchReport:
    """Match single-class predictions to ground truth, greedily by confidence.

    Predictions are processed in descending confidence (ties keep input
    order); each claims the highest-IoU still-unmatched ground-truth box if
    that IoU reaches the threshold, else it is a false positive.

    Raises:
        MissingConfidence: a prediction lacks a confidence score.
    """
    for i, p in enumerate(preds):
        if p.confidence is None:
            raise MissingConfidence(f"prediction {i} has no confidence")
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    taken = [False] * len(gts)
    verdicts: list[PredictionVerdict | None] = [None] * len(preds)
    for i in order:
        best_iou = 0.0
        best_j = None
        for j, gt in enumerate(gts):
            if taken[j]:
                continue
            v = iou(preds[i].box, gt.box)
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j is not None and best_iou >= iou_threshold:
            taken[best_j] = True
            verdicts[i] = PredictionVerdict(preds[i].confidence, True, best_j)
        else:
            verdicts[i] = PredictionVerdict(preds[i].confidence, False)
    return DetectionMatchReport(verdicts=list(verdicts), fn=taken.count(False))


@dataclass(frozen=True)
class PRCurve:
    """(recall, precision) points from confidence-sorted pooled predictions."""

    points: tuple[tuple[float, float], ...]


def average_precision(reports: list[DetectionMatchReport]) -> tuple[float, float, PRCurve]:
    """Pool one class's match reports into (AP, AUC, PR curve).

    AP integrates the monotone non-increasing precision envelope over recall
    (all-point interpolation); AUC is the trapezoidal area under the raw
    curve anchored at (0, first precision).

    Raises:
        NoGroundTruth: the class has no ground-truth instances.
    """
    n_gt = sum(r.n_gt for r in reports)
    if n_gt == 0:
        raise NoGroundTruth("AP is undefined without ground-truth instances")
    pooled = [v for r in reports for v in r.verdicts]
    pooled.sort(key=lambda v: -v.confidence)
    if not pooled:
        return 0.0, 0.0, PRCurve(points=())

    tps = np.cumsum([1.0 if v.is_tp else 0.0 for v in pooled])
    ks = np.arange(1, len(pooled) + 1)
    recalls = tps / n_gt
    precisions = tps / ks
    points = tuple(zip(recalls.tolist(), precisions.tolist()))

    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    prev_r = 0.0
    ap = 0.0
    for r, p in zip(recalls, envelope):
        ap += (r - prev_r) * p
        prev_r = r

    auc = 0.0
    prev_r, prev_p = 0.0, precisions[0]
    for r, p in zip(recalls, precisions):
        auc += (r - prev_r) * (p + prev_p) / 2.0
        prev_r, prev_p = r, p
    return float(ap), float(auc), PRCurve(points=points)


def mean_ap(per_class: dict[str, float]) -> float:
    """Unweighted arithmetic mean over the classes present.

    Raises:
        EmptyInput: the map is empty.
    """
    if not per_class:
        raise EmptyInput("mean_ap needs at least one class AP")
    return float(sum(per_class.values()) / len(per_class))


@dataclass
class RetrievalReport:
    """Precision@K table over a queried layout set."""

    precision: dict[int, float]
    query_count: int
    excluded_categories: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["K,precision"]
        lines += [f"{k},{self.precision[k]:.6f}" for k in sorted(self.precision)]
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        ks = sorted(self.precision)
        head = "  ".join(f"Top {k:>2}" for k in ks)
        vals = "  ".join(f"{self.precision[k] * 100:6.2f}" for k in ks)
        return (
            f"precision@K over {self.query_count} queries\n{head}\n{vals}\n"
        )


def eval_retrieval(
    index: EmbeddingIndex,
    model: ImageAutoencoder,
    labelnet: LabelNet,
    test_layouts: list[AnnotatedLayout],
    categories: dict[str, str] | None = None,
    k_values: tuple[int, ...] = RETRIEVAL_K_VALUES,
) -> RetrievalReport:
    """Mean precision@K over the test layouts, self-excluded.

    Category labels come from ``test_layouts`` plus the optional
    ``categories`` map (needed when the index holds layouts outside the
    test set). Queries from categories with fewer than
    ``MIN_CATEGORY_SIZE`` members among the test layouts are dropped, as
    design groups that small cannot support a top-10 evaluation.

    Raises:
        EmptyTestSet: nothing remains to query after filtering.
        UnknownId: a retrieved id has no category label.
    """
    labels: dict[str, str] = {}
    for l in test_layouts:
        if l.category is not None:
            labels[l.id] = l.category
    if categories:
        labels.update(categories)

    counts: dict[str, int] = {}
    for l in test_layouts:
        if l.category is None:
            raise EmptyTestSet(f"layout {l.id!r} has no category label")
        counts[l.category] = counts.get(l.category, 0) + 1
    excluded = sorted(c for c, n in counts.items() if n < MIN_CATEGORY_SIZE)
    queries = [l for l in test_layouts if counts[l.category] >= MIN_CATEGORY_SIZE]
    if not queries:
        raise EmptyTestSet("no category reaches the minimum group size")

    sums = {k: 0.0 for k in k_values}
    for layout in queries:
        z = embed(model, labelnet, layout)
        result = query(index, z, max(k_values), exclude=layout.id, query_id=layout.id)
        for k in k_values:
            sums[k] += precision_at_k(result, labels, layout.category, k)
    return RetrievalReport(
        precision={k: sums[k] / len(queries) for k in k_values},
        query_count=len(queries),
        excluded_categories=excluded,
    )


@dataclass
class DetectionReport:
    """Per-class AP/AUC plus the mAP summary row."""

    per_class: dict[str, tuple[float, float]]  # class name -> (AP, AUC)

    @property
    def map_value(self) -> float:
        return mean_ap({c: ap for c, (ap, _) in self.per_class.items()})

    @property
    def mean_auc(self) -> float:
        return float(sum(a for _, a in self.per_class.values()) / len(self.per_class))

    def to_csv(self) -> str:
        lines = ["class,AP,AUC"]
        lines += [
            f"{c},{ap:.6f},{auc:.6f}" for c, (ap, auc) in sorted(self.per_class.items())
        ]
        lines.append(f"mAP,{self.map_value:.6f},{self.mean_auc:.6f}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        width = max(len(c) for c in self.per_class) if self.per_class else 5
        lines = [f"{'class':<{width}}  {'AP %':>7}  {'AUC %':>7}"]
        for c, (ap, auc) in sorted(self.per_class.items()):
            lines.append(f"{c:<{width}}  {ap * 100:7.2f}  {auc * 100:7.2f}")
        lines.append(f"{'mAP':<{width}}  {self.map_value * 100:7.2f}  {self.mean_auc * 100:7.2f}")
        return "\n".join(lines) + "\n"


def eval_detections(
    gt_layouts: list[AnnotatedLayout],
    pred_layouts: list[AnnotatedLayout],
    iou_threshold: float = 0.5,
) -> DetectionReport:
    """Per-class AP/AUC over a layout set, for classes with ground truth.

    Predictions are matched to ground truth image by image (ids pair the
    layouts) and per class; images with no prediction document contribute
    only false negatives.
    """
    preds_by_id = {l.id: l for l in pred_layouts}
    classes = sorted({el.cls for l in gt_layouts for el in l.elements}, key=int)
    per_class: dict[str, tuple[float, float]] = {}
    for cls in classes:
        reports = []
        for gt in gt_layouts:
            gts = [el for el in gt.elements if el.cls is cls]
            pred_layout = preds_by_id.get(gt.id)
            preds = (
                [el for el in pred_layout.elements if el.cls is cls]
                if pred_layout is not None
                else []
            )
            if gts or preds:
                reports.append(match_detections(preds, gts, iou_threshold))
        ap, auc, _ = average_precision(reports)
        per_class[cls.cname] = (ap, auc)
    return DetectionReport(per_class=per_class)
