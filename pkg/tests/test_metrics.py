import numpy as np
import pytest

from uisearch.errors import (
    EmptyInput,
    MissingConfidence,
    NoGroundTruth,
    UnknownId,
)
from uisearch.index import RankedResult
from uisearch.layout import BoundingBox, ComponentClass, LayoutElement
from uisearch.metrics import (
    DetectionMatchReport,
    average_precision,
    iou,
    match_detections,
    mean_ap,
    precision_at_k,
)


def el(x0, y0, x1, y1, conf=None, cls=ComponentClass.TEXT):
    return LayoutElement(cls=cls, box=BoundingBox(x0, y0, x1, y1), confidence=conf)


class TestIou:
    def test_identical_boxes(self):
        b = BoundingBox(3, 4, 10, 12)
        assert iou(b, b) == 1.0

    def test_disjoint_boxes(self):
        assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0

    def test_one_seventh_fixture(self):
        value = iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3))
        assert value == 1.0 / 7.0

    def test_symmetric(self):
        a, b = BoundingBox(0, 0, 4, 4), BoundingBox(2, 1, 6, 5)
        assert iou(a, b) == iou(b, a)

    def test_touching_boxes_zero(self):
        assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(1, 0, 2, 1)) == 0.0


def ranked(*ids):
    return RankedResult(entries=tuple((i, float(k)) for k, i in enumerate(ids)))


class TestPrecisionAtK:
    LABELS = {"a1": "A", "a2": "A", "b1": "B", "b2": "B"}

    def test_all_match(self):
        assert precision_at_k(ranked("a1", "a2"), self.LABELS, "A", 2) == 1.0

    def test_two_thirds(self):
        result = ranked("a1", "a2", "b1")
        assert precision_at_k(result, self.LABELS, "A", 3) == pytest.approx(2 / 3)

    def test_top1_mismatch(self):
        assert precision_at_k(ranked("b1"), self.LABELS, "A", 1) == 0.0

    def test_unknown_id(self):
        with pytest.raises(UnknownId):
            precision_at_k(ranked("zz"), self.LABELS, "A", 1)

    def test_short_result_uses_available(self):
        assert precision_at_k(ranked("a1", "b1"), self.LABELS, "A", 10) == 0.5

    def test_invariant_under_nonquery_relabel(self):
        result = ranked("a1", "b1", "b2")
        before = precision_at_k(result, self.LABELS, "A", 3)
        relabeled = dict(self.LABELS, b1="C", b2="D")
        assert precision_at_k(result, relabeled, "A", 3) == before


class TestMatchDetections:
    def test_perfect_predictions(self):
        gts = [el(0, 0, 10, 10), el(20, 20, 30, 30)]
        preds = [el(0, 0, 10, 10, 1.0), el(20, 20, 30, 30, 1.0)]
        report = match_detections(preds, gts)
        assert report.tp == 2 and report.fp == 0 and report.fn == 0

    def test_no_overlap_all_fp(self):
        gts = [el(0, 0, 10, 10), el(20, 20, 30, 30)]
        report = match_detections([el(50, 50, 60, 60, 0.9)], gts)
        assert report.tp == 0 and report.fp == 1 and report.fn == 2

    def test_greedy_one_to_one(self):
        gt = [el(0, 0, 10, 10)]
        preds = [
            el(0, 0, 10, 6, 0.9),   # IoU 0.6
            el(0, 0, 10, 5.5, 0.8), # IoU 0.55 but gt already taken
        ]
        report = match_detections(preds, gt)
        assert [v.is_tp for v in report.verdicts] == [True, False]
        assert report.fn == 0

    def test_confidence_order_decides(self):
        gt = [el(0, 0, 10, 10)]
        preds = [
            el(0, 0, 10, 5.5, 0.8),
            el(0, 0, 10, 6, 0.9),  # higher confidence matches first
        ]
        report = match_detections(preds, gt)
        assert [v.is_tp for v in report.verdicts] == [False, True]

    def test_missing_confidence(self):
        with pytest.raises(MissingConfidence):
            match_detections([el(0, 0, 1, 1)], [])

    def test_counts_invariant(self):
        gts = [el(0, 0, 10, 10), el(30, 30, 40, 40)]
        preds = [el(0, 0, 10, 9, 0.7), el(100, 100, 110, 110, 0.6)]
        report = match_detections(preds, gts)
        assert report.tp + report.fp == len(preds)
        assert report.tp <= len(gts)


class TestAveragePrecision:
    def test_perfect_detector(self):
        report = match_detections(
            [el(0, 0, 10, 10, 1.0), el(20, 20, 30, 30, 1.0)],
            [el(0, 0, 10, 10), el(20, 20, 30, 30)],
        )
        ap, auc, curve = average_precision([report])
        assert ap == 1.0 and auc == 1.0

    def test_detector_finding_nothing(self):
        report = DetectionMatchReport(verdicts=[], fn=3)
        ap, auc, curve = average_precision([report])
        assert ap == 0.0 and auc == 0.0

    def test_tp_then_fp_fixture(self):
        gt = [el(0, 0, 10, 10)]
        preds = [el(0, 0, 10, 10, 0.9), el(50, 50, 60, 60, 0.8)]
        report = match_detections(preds, gt)
        ap, auc, curve = average_precision([report])
        assert curve.points == ((1.0, 1.0), (1.0, 0.5))
        assert ap == 1.0

    def test_fp_then_tp_envelope(self):
        gt = [el(0, 0, 10, 10)]
        preds = [el(50, 50, 60, 60, 0.9), el(0, 0, 10, 10, 0.8)]
        report = match_detections(preds, gt)
        ap, auc, curve = average_precision([report])
        assert curve.points == ((0.0, 0.0), (1.0, 0.5))
        assert ap == 0.5

    def test_no_ground_truth_rejected(self):
        with pytest.raises(NoGroundTruth):
            average_precision([DetectionMatchReport(verdicts=[], fn=0)])

    def test_bounded(self):
        rng = np.random.default_rng(0)
        gts = [el(i * 20, 0, i * 20 + 10, 10) for i in range(5)]
        preds = [
            el(i * 20 + rng.integers(0, 8), 0, i * 20 + 10, 10, float(rng.random()))
            for i in range(5)
        ]
        ap, auc, _ = average_precision([match_detections(preds, gts)])
        assert 0.0 <= ap <= 1.0 and 0.0 <= auc <= 1.0

    def test_recall_non_decreasing(self):
        gts = [el(0, 0, 10, 10), el(20, 0, 30, 10)]
        preds = [el(0, 0, 10, 10, 0.9), el(40, 0, 50, 10, 0.5), el(20, 0, 30, 10, 0.3)]
        _, _, curve = average_precision([match_detections(preds, gts)])
        recalls = [r for r, _ in curve.points]
        assert recalls == sorted(recalls)


class TestMeanAp:
    def test_single_class(self):
        assert mean_ap({"text": 0.8}) == pytest.approx(0.8)

    def test_two_classes(self):
        assert mean_ap({"a": 0.5, "b": 1.0}) == pytest.approx(0.75)

    def test_all_perfect(self):
        assert mean_ap({c: 1.0 for c in "abcd"}) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            mean_ap({})
