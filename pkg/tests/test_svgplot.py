"""SVG chart rendering: structure and byte-level determinism."""

import math

from cachecancel.svgplot import Series, render_chart


def sample_series():
    curve = Series("formula", [(0, 0.44), (60, 0.43), (120, 0.41)],
                   marker=False)
    dots = Series("simulated", [(0, 0.439, 0.003), (60, 0.431, 0.003)],
                  line=False)
    return [curve, dots]


def test_renders_complete_document():
    svg = render_chart(sample_series(), x_label="radius [m]",
                       y_label="loss rate", title="sweep")
    assert svg.startswith("<?xml")
    assert svg.rstrip().endswith("</svg>")
    assert 'viewBox="0 0 640 420"' in svg
    assert "radius [m]" in svg and "loss rate" in svg and "sweep" in svg
    assert "formula" in svg and "simulated" in svg


def test_deterministic_bytes():
    a = render_chart(sample_series(), "x", "y", "t")
    b = render_chart(sample_series(), "x", "y", "t")
    assert a == b


def test_line_marker_and_errorbar_elements():
    svg = render_chart(sample_series())
    # one polyline for the 3-point curve, none for the marker-only series
    assert svg.count("<polyline") == 1
    # markers only on the dot series
    assert svg.count("<circle") == 2
    # each error bar adds a stem plus two caps over the errorless render
    bare = [Series("formula", [(0, 0.44), (60, 0.43), (120, 0.41)],
                   marker=False),
            Series("simulated", [(0, 0.439), (60, 0.431)], line=False)]
    assert svg.count("<line") == render_chart(bare).count("<line") + 6


def test_single_point_gets_no_polyline():
    svg = render_chart([Series("one", [(1.0, 2.0)])])
    assert "<polyline" not in svg
    assert svg.count("<circle") == 1


def test_nonfinite_points_are_dropped():
    s = Series("partial", [(0, 0.4), (math.inf, 0.39), (60, math.nan),
                           (120, 0.35)])
    assert len(s.points) == 2
    svg = render_chart([s])
    assert "inf" not in svg and "nan" not in svg


def test_label_escaping():
    svg = render_chart([Series("a<b&c>", [(0, 1), (1, 2)])],
                       title="x<y&z>")
    assert "a&lt;b&amp;c&gt;" in svg
    assert "x&lt;y&amp;z&gt;" in svg
    assert "a<b" not in svg


def test_empty_series_list_still_renders():
    svg = render_chart([], x_label="x", y_label="y")
    assert svg.startswith("<?xml")
    assert "</svg>" in svg
