import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uisearch.errors import (
    EmptyCorpus,
    MalformedJson,
    MalformedXml,
    MissingField,
    UnknownClass,
)
from uisearch.layout import AnnotatedLayout, BoundingBox, ComponentClass, LayoutElement
from uisearch.voc import (
    Corpus,
    layout_to_dict,
    load_corpus,
    parse_detections,
    parse_voc,
    split_corpus,
    write_voc,
)

FIXTURE_XML = b"""<?xml version='1.0' encoding='utf-8'?>
<annotation>
  <filename>screen_01.png</filename>
  <size><width>400</width><height>800</height><depth>3</depth></size>
  <object>
    <name>text_button</name>
    <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>110</xmax><ymax>60</ymax></bndbox>
  </object>
</annotation>
"""


class TestParseVoc:
    def test_fixture(self):
        layout = parse_voc(FIXTURE_XML)
        assert layout.id == "screen_01"
        assert (layout.width, layout.height) == (400, 800)
        assert len(layout.elements) == 1
        el = layout.elements[0]
        assert el.cls is ComponentClass.TEXT_BUTTON
        assert el.box == BoundingBox(10, 20, 110, 60)

    def test_unknown_class(self):
        bad = FIXTURE_XML.replace(b"text_button", b"carousel")
        with pytest.raises(UnknownClass, match="carousel"):
            parse_voc(bad)

    def test_malformed_xml(self):
        with pytest.raises(MalformedXml):
            parse_voc(b"<annotation><unclosed>")

    def test_missing_size(self):
        with pytest.raises(MissingField, match="size/width"):
            parse_voc(b"<annotation><filename>x.png</filename></annotation>")


def boxes_strategy():
    return st.lists(
        st.tuples(
            st.integers(0, 300), st.integers(0, 600),
            st.integers(2, 80), st.integers(2, 80),
            st.sampled_from(list(ComponentClass)),
        ),
        max_size=10,
    )


def build_layout(spec, layout_id="gen"):
    elements = [
        LayoutElement(cls=c, box=BoundingBox(x, y, min(x + w, 360), min(y + h, 640)))
        for x, y, w, h, c in spec
    ]
    return AnnotatedLayout(id=layout_id, width=360, height=640, elements=elements)


class TestWriteVoc:
    def test_empty_layout(self):
        xml = write_voc(AnnotatedLayout(id="empty", width=10, height=10))
        layout = parse_voc(xml)
        assert layout.id == "empty"
        assert layout.elements == []

    def test_write_is_deterministic(self):
        layout = parse_voc(FIXTURE_XML)
        assert write_voc(layout) == write_voc(layout)

    @settings(max_examples=60)
    @given(boxes_strategy())
    def test_parse_write_round_trip(self, spec):
        layout = build_layout(spec)
        back = parse_voc(write_voc(layout))
        assert back.id == layout.id
        assert (back.width, back.height) == (layout.width, layout.height)
        assert len(back.elements) == len(layout.elements)
        for a, b in zip(layout.elements, back.elements):
            assert a.cls is b.cls
            for attr in ("x_min", "y_min", "x_max", "y_max"):
                assert abs(getattr(a.box, attr) - getattr(b.box, attr)) <= 0.5


class TestParseDetections:
    DOC = {
        "id": "det_1",
        "width": 200,
        "height": 200,
        "detections": [
            {"class": "icon", "box": [5, 5, 25, 25], "confidence": 0.9},
            {"class": "text", "box": [30, 30, 90, 60], "confidence": 0.3},
        ],
    }

    def test_threshold_drops_low_confidence(self):
        layout = parse_detections(json.dumps(self.DOC), 0.5)
        assert [e.cls for e in layout.elements] == [ComponentClass.ICON]

    def test_zero_threshold_keeps_all(self):
        layout = parse_detections(json.dumps(self.DOC), 0.0)
        assert len(layout.elements) == 2
        assert layout.elements[0].confidence == 0.9

    def test_empty_detections(self):
        doc = dict(self.DOC, detections=[])
        layout = parse_detections(json.dumps(doc), 0.5)
        assert layout.elements == []

    def test_malformed_json(self):
        with pytest.raises(MalformedJson):
            parse_detections(b"{not json")

    def test_missing_field(self):
        with pytest.raises(MalformedJson, match="box"):
            parse_detections(json.dumps({"width": 10, "height": 10,
                                         "detections": [{"class": "icon"}]}))

    def test_unknown_class(self):
        doc = dict(self.DOC, detections=[{"class": "widget", "box": [0, 0, 1, 1]}])
        with pytest.raises(UnknownClass, match="widget"):
            parse_detections(json.dumps(doc))

    def test_round_trip_through_dict(self):
        layout = parse_detections(json.dumps(self.DOC), 0.0)
        doc = layout_to_dict(layout)
        again = parse_detections(json.dumps(doc), 0.0)
        assert [e.box for e in again.elements] == [e.box for e in layout.elements]


class TestLoadCorpus(object):
    def _write(self, directory, name, data):
        (directory / name).write_bytes(data)

    def test_loads_in_lexicographic_order(self, tmp_path):
        for name in ("c.xml", "a.xml", "b.xml"):
            layout = AnnotatedLayout(id=name[:-4], width=10, height=10)
            self._write(tmp_path, name, write_voc(layout))
        corpus = load_corpus(tmp_path)
        assert [l.id for l in corpus.layouts] == ["a", "b", "c"]
        assert corpus.failures == []

    def test_malformed_file_recorded_and_skipped(self, tmp_path):
        self._write(tmp_path, "a.xml", write_voc(AnnotatedLayout(id="a", width=9, height=9)))
        self._write(tmp_path, "bad.xml", b"<oops")
        self._write(tmp_path, "c.xml", write_voc(AnnotatedLayout(id="c", width=9, height=9)))
        corpus = load_corpus(tmp_path)
        assert [l.id for l in corpus.layouts] == ["a", "c"]
        assert len(corpus.failures) == 1
        assert corpus.failures[0][0] == "bad.xml"

    def test_empty_directory(self, tmp_path):
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 0

    def test_duplicate_id_recorded(self, tmp_path):
        data = write_voc(AnnotatedLayout(id="same", width=9, height=9))
        self._write(tmp_path, "a.xml", data)
        self._write(tmp_path, "b.xml", data)
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 1 and len(corpus.failures) == 1

    def test_categories_sidecar_applied(self, tmp_path):
        self._write(tmp_path, "a.xml", write_voc(AnnotatedLayout(id="a", width=9, height=9)))
        (tmp_path / "categories.csv").write_text("id,category\na,login\n")
        corpus = load_corpus(tmp_path)
        assert corpus.layouts[0].category == "login"


def corpus_of(n):
    return Corpus(
        layouts=[AnnotatedLayout(id=f"l{i:03d}", width=10, height=10) for i in range(n)]
    )


class TestSplitCorpus:
    def test_ten_layouts_split_8_1_1(self):
        split = split_corpus(corpus_of(10), seed=1)
        assert (len(split.train), len(split.val), len(split.test)) == (8, 1, 1)

    def test_remainder_goes_to_train(self):
        split = split_corpus(corpus_of(4543), seed=1)
        assert (len(split.train), len(split.val), len(split.test)) == (3635, 454, 454)

    def test_same_seed_identical(self):
        corpus = corpus_of(37)
        assert split_corpus(corpus, 99) == split_corpus(corpus, 99)

    def test_different_seed_differs(self):
        corpus = corpus_of(100)
        assert split_corpus(corpus, 1) != split_corpus(corpus, 2)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            split_corpus(corpus_of(0), seed=1)

    @given(st.integers(1, 200), st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_partition_disjoint_and_exhaustive(self, n, seed):
        corpus = corpus_of(n)
        split = split_corpus(corpus, seed)
        combined = list(split.train) + list(split.val) + list(split.test)
        assert sorted(combined) == sorted(l.id for l in corpus.layouts)
        assert len(set(combined)) == n
