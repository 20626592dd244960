"""SVG rendering of trace documents."""

import math
import re
import xml.etree.ElementTree as ET

import pytest

from trajex.plotting import STYLES, _nice_step, trace_svg


def doc_with(points_by_object, events=(), hit_frame=7, approximate=()):
    trajectories = []
    for oid, pts in points_by_object.items():
        trajectories.append(
            {
                "object_id": oid,
                "kind": "vehicle",
                "primary_direction": "longitudinal",
                "approximate": oid in approximate,
                "points": [
                    {
                        "frame_index": f,
                        "time_s": 0.0,
                        "x_m": x,
                        "y_m": y,
                        "speed_mps": 0.0,
                        "heading_rad": 0.0,
                    }
                    for f, x, y in pts
                ],
            }
        )
    return {
        "project_id": "p",
        "mode": "surveillance",
        "fps": 25.0,
        "hit_frame": hit_frame,
        "hit_frame_inferred": False,
        "hit_object_id": None,
        "ratio_model": None,
        "lateral_ratio_m_per_px": None,
        "events": [{"frame_index": f, "type": t, "note": ""} for f, t in events],
        "trajectories": trajectories,
    }


SIMPLE = doc_with({"car": [(1, 0.0, 0.0), (2, 1.0, 2.0), (3, 2.0, 5.0)]})


def test_svg_is_well_formed_xml():
    for style in STYLES:
        root = ET.fromstring(trace_svg(SIMPLE, style=style))
        assert root.tag.endswith("svg")


def test_invalid_style_rejected():
    with pytest.raises(ValueError):
        trace_svg(SIMPLE, style="bars")


def test_points_vs_path_elements():
    points = trace_svg(SIMPLE, style="points")
    path = trace_svg(SIMPLE, style="path")
    both = trace_svg(SIMPLE, style="both")
    assert points.count('r="3"') == 3 and "<polyline" not in points
    assert "<polyline" in path and 'r="3"' not in path
    assert "<polyline" in both and both.count('r="3"') == 3


def test_byte_determinism():
    assert trace_svg(SIMPLE, "both") == trace_svg(SIMPLE, "both")


def test_origin_always_in_extent():
    # all data far from (0,0); the origin must still be inside the view
    doc = doc_with({"car": [(1, 40.0, 40.0), (2, 42.0, 44.0)]})
    svg = trace_svg(doc, "points")
    assert "hit (0, 0) @ frame 7" in svg


def test_hit_label_without_frame():
    doc = doc_with({"car": [(1, 0.0, 0.0), (2, 1.0, 1.0)]}, hit_frame=None)
    svg = trace_svg(doc, "points")
    assert ">hit (0, 0)</text>" in svg


def test_event_markers_ring_matching_frames():
    doc = doc_with(
        {"car": [(1, 0.0, 0.0), (2, 1.0, 2.0), (3, 2.0, 5.0)]},
        events=[(2, "horn")],
    )
    svg = trace_svg(doc, "points")
    assert svg.count('r="6"') == 1  # one ring, on the frame-2 sample


def test_approximate_series_is_dashed_and_labeled():
    doc = doc_with(
        {"ego": [(1, 0.0, 0.0), (2, 1.0, 1.0)]}, approximate=("ego",)
    )
    svg = trace_svg(doc, "path")
    assert "stroke-dasharray" in svg
    assert "ego (approx.)" in svg
    solid = trace_svg(SIMPLE, "path")
    assert "stroke-dasharray" not in solid


def test_legend_lists_every_object():
    doc = doc_with(
        {
            "car": [(1, 0.0, 0.0), (2, 1.0, 1.0)],
            "walker": [(1, 3.0, 0.0), (2, 3.0, 1.0)],
        }
    )
    svg = trace_svg(doc, "points")
    assert ">car</text>" in svg and ">walker</text>" in svg


def test_equal_scale_on_both_axes():
    # a unit step in X and a unit step in Y must span the same pixel distance
    doc = doc_with({"car": [(1, 0.0, 0.0), (2, 1.0, 0.0), (3, 1.0, 1.0)]})
    svg = trace_svg(doc, "points")
    circles = re.findall(r'<circle cx="([0-9.]+)" cy="([0-9.]+)" r="3"', svg)
    (x0, y0), (x1, y1), (x2, y2) = [(float(a), float(b)) for a, b in circles]
    dx = math.hypot(x1 - x0, y1 - y0)
    dy = math.hypot(x2 - x1, y2 - y1)
    assert dx == pytest.approx(dy, rel=1e-9)


def test_empty_document_renders():
    doc = doc_with({})
    svg = trace_svg(doc, "both")
    assert svg.startswith("<svg") and svg.endswith("</svg>\n")


def test_label_escaping():
    doc = doc_with({'o<&">x': [(1, 0.0, 0.0), (2, 1.0, 1.0)]})
    svg = trace_svg(doc, "points")
    assert "o&lt;&amp;&quot;&gt;x" in svg
    ET.fromstring(svg)


def test_nice_step_values():
    assert _nice_step(10.0) == 2.0
    assert _nice_step(1.0) == 0.2
    assert _nice_step(0.5) == 0.1
    assert _nice_step(100.0) == 20.0
    assert _nice_step(0.0) == 1.0
