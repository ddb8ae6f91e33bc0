import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uisearch.errors import DegenerateBox, EmptyCanvas
from uisearch.layout import (
    LABEL_SET,
    NUM_LABELS,
    AnnotatedLayout,
    BoundingBox,
    ComponentClass,
    LayoutElement,
    multi_hot,
    scale_layout,
    validate_layout,
)


def make_layout(boxes, cls=ComponentClass.TEXT, w=100, h=100):
    return AnnotatedLayout(
        id="t", width=w, height=h,
        elements=[LayoutElement(cls=cls, box=BoundingBox(*b)) for b in boxes],
    )


class TestComponentClass:
    def test_twelve_stable_codes(self):
        assert len(ComponentClass) == 12
        assert [int(c) for c in ComponentClass] == list(range(12))

    def test_lowercase_names_round_trip(self):
        for c in ComponentClass:
            assert c.cname == c.cname.lower()
            assert ComponentClass.from_name(c.cname) is c

    def test_label_set_excludes_upper_task_bar(self):
        assert len(LABEL_SET) == NUM_LABELS == 11
        assert ComponentClass.UPPER_TASK_BAR not in LABEL_SET

    def test_unknown_name_raises(self):
        from uisearch.errors import UnknownClass

        with pytest.raises(UnknownClass):
            ComponentClass.from_name("carousel")


class TestValidateLayout:
    def test_valid_layout_unchanged(self):
        layout = make_layout([(10, 10, 50, 50)])
        out = validate_layout(layout)
        assert out.elements[0].box == BoundingBox(10, 10, 50, 50)

    def test_overflow_clamped(self):
        out = validate_layout(make_layout([(-5, 0, 50, 50)]))
        assert out.elements[0].box == BoundingBox(0, 0, 50, 50)

    def test_zero_width_box_rejected(self):
        with pytest.raises(DegenerateBox, match="element 0"):
            validate_layout(make_layout([(30, 30, 30, 80)]))

    def test_empty_canvas_rejected(self):
        with pytest.raises(EmptyCanvas):
            validate_layout(make_layout([], w=0, h=100))

    def test_box_outside_canvas_becomes_degenerate(self):
        with pytest.raises(DegenerateBox):
            validate_layout(make_layout([(150, 150, 220, 220)]))

    def test_bad_confidence_rejected(self):
        layout = make_layout([(1, 1, 2, 2)])
        layout.elements[0] = LayoutElement(
            cls=ComponentClass.TEXT, box=layout.elements[0].box, confidence=1.5
        )
        with pytest.raises(DegenerateBox):
            validate_layout(layout)

    def test_input_not_mutated(self):
        layout = make_layout([(-5, 0, 50, 50)])
        validate_layout(layout)
        assert layout.elements[0].box.x_min == -5


class TestMultiHot:
    def test_duplicates_collapse(self):
        layout = make_layout([(0, 0, 10, 10), (20, 20, 30, 30)], cls=ComponentClass.TEXT)
        layout.elements.append(
            LayoutElement(cls=ComponentClass.ICON, box=BoundingBox(40, 40, 50, 50))
        )
        vec = multi_hot(layout)
        expected = np.zeros(11)
        expected[int(ComponentClass.TEXT)] = 1
        expected[int(ComponentClass.ICON)] = 1
        assert np.array_equal(vec, expected)

    def test_empty_layout_all_zero(self):
        assert np.array_equal(multi_hot(make_layout([])), np.zeros(11))

    def test_all_twelve_classes_give_eleven_ones(self):
        layout = AnnotatedLayout(
            id="t", width=100, height=100,
            elements=[
                LayoutElement(cls=c, box=BoundingBox(0, 0, 10, 10))
                for c in ComponentClass
            ],
        )
        assert np.array_equal(multi_hot(layout), np.ones(11))

    @given(st.lists(st.sampled_from(list(ComponentClass)), max_size=8))
    def test_idempotent_under_duplication(self, classes):
        elements = [
            LayoutElement(cls=c, box=BoundingBox(0, 0, 10, 10)) for c in classes
        ]
        layout = AnnotatedLayout(id="t", width=100, height=100, elements=elements)
        doubled = AnnotatedLayout(
            id="t", width=100, height=100, elements=elements + elements
        )
        assert np.array_equal(multi_hot(layout), multi_hot(doubled))


class TestScaleLayout:
    def test_full_canvas_box(self):
        layout = make_layout([(0, 0, 200, 400)], w=200, h=400)
        out = scale_layout(layout, 256, 256)
        assert out.elements[0].box == BoundingBox(0, 0, 256, 256)
        assert (out.width, out.height) == (256, 256)

    def test_quarter_box_scales(self):
        out = scale_layout(make_layout([(25, 25, 75, 75)]), 256, 256)
        assert out.elements[0].box == BoundingBox(64, 64, 192, 192)

    def test_identity_scale(self):
        layout = make_layout([(10, 20, 30, 40)])
        out = scale_layout(layout, 100, 100)
        assert out.elements[0].box == layout.elements[0].box

    def test_non_positive_target_rejected(self):
        with pytest.raises(EmptyCanvas):
            scale_layout(make_layout([]), 0, 10)

    @settings(max_examples=50)
    @given(
        a=st.integers(16, 512), b=st.integers(16, 512),
        w=st.integers(16, 512), h=st.integers(16, 512),
    )
    def test_composition_matches_direct_scaling(self, a, b, w, h):
        layout = validate_layout(make_layout([(5.0, 7.5, 60.25, 90.0)]))
        twice = scale_layout(scale_layout(layout, a, b), w, h)
        once = scale_layout(layout, w, h)
        tol = 1e-6 * max(w, h)
        for e1, e2 in zip(twice.elements, once.elements):
            for attr in ("x_min", "y_min", "x_max", "y_max"):
                assert abs(getattr(e1.box, attr) - getattr(e2.box, attr)) <= tol

    @given(
        x0=st.floats(0, 90), y0=st.floats(0, 90),
        dx=st.floats(1, 10), dy=st.floats(1, 10),
    )
    def test_validated_then_scaled_stays_valid(self, x0, y0, dx, dy):
        layout = validate_layout(make_layout([(x0, y0, x0 + dx, y0 + dy)]))
        out = validate_layout(scale_layout(layout, 256, 128))
        box = out.elements[0].box
        assert 0 <= box.x_min < box.x_max <= 256
        assert 0 <= box.y_min < box.y_max <= 128
