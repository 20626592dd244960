"""Project document model: parsing, persistence, ingestion, validation."""

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajex.errors import (
    DimensionMismatch,
    EmptyDirectory,
    IoError,
    MissingFrame,
    MissingFrameDir,
    ParseError,
    SchemaViolation,
    TrajexError,
)
from trajex.geometry import Point2
from trajex.project import (
    FRAME_NAME_RE,
    EventMarker,
    FrameAnnotation,
    FrameSequence,
    HitSpec,
    Mark,
    ObjectSpec,
    Project,
    frame_file_name,
    ingest_frames,
    load_project,
    parse_annotations,
    parse_project_document,
    project_document,
    quantize_real,
    save_project,
    validate_annotations,
)
from trajex.stabilize import ReferenceTrack
from trajex.synthetic import noise_image


RECT = (Point2(0.0, 0.0), Point2(100.0, 0.0), Point2(100.0, 50.0), Point2(0.0, 50.0))


def surveillance_project(**overrides):
    kw = dict(
        id="demo",
        mode="surveillance",
        fps=25.0,
        frame_dir="frames",
        real_reference_width_m=1.8,
        real_road_width_m=7.0,
        rectify_src_quad=RECT,
        rectify_dst_rect=RECT,
        objects=(
            ObjectSpec("car", "vehicle", "longitudinal"),
            ObjectSpec("walker", "pedestrian", "lateral"),
        ),
    )
    kw.update(overrides)
    return Project(**kw)


def fake_sequence(n=10, width=160, height=120):
    return FrameSequence(
        directory=Path("frames"),
        paths=tuple(Path(frame_file_name(i)) for i in range(1, n + 1)),
        width=width,
        height=height,
    )


def ann(frame, marks=(), ref=None, events=()):
    return FrameAnnotation(
        frame_index=frame,
        marks=tuple(Mark(oid, Point2(float(x), float(y))) for oid, x, y in marks),
        ref_width_px=ref,
        events=tuple(events),
    )


def good_annotations():
    return [
        ann(1, [("car", 10, 20), ("walker", 30, 40)], ref=25.0),
        ann(2, [("car", 11, 30), ("walker", 31, 41)]),
    ]


# ---------------------------------------------------------------------------
# primitives


def test_quantize_real_nine_significant_digits():
    assert quantize_real(1 / 3) == 0.333333333
    assert quantize_real(123456789.123) == 123456789.0
    assert quantize_real(-0.000123456789123) == -0.000123456789
    assert quantize_real(2.0) == 2.0


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_quantize_real_idempotent(v):
    assert quantize_real(quantize_real(v)) == quantize_real(v)


def test_frame_file_name_and_pattern():
    assert frame_file_name(3) == "frame_0003.png"
    assert frame_file_name(12345) == "frame_12345.png"
    assert FRAME_NAME_RE.match("frame_0001.png")
    assert FRAME_NAME_RE.match("frame_99999.png")
    assert not FRAME_NAME_RE.match("frame_001.png")
    assert not FRAME_NAME_RE.match("frame_0001.jpg")
    assert not FRAME_NAME_RE.match("img_0001.png")


def test_dataclass_invariants():
    with pytest.raises(SchemaViolation):
        ObjectSpec("x", "bicycle", "longitudinal")
    with pytest.raises(SchemaViolation):
        ObjectSpec("x", "vehicle", "diagonal")
    with pytest.raises(SchemaViolation):
        EventMarker("siren")
    with pytest.raises(SchemaViolation):
        FrameAnnotation(frame_index=0)
    with pytest.raises(SchemaViolation):
        FrameAnnotation(frame_index=1, ref_width_px=0.0)
    with pytest.raises(SchemaViolation):
        FrameAnnotation(
            frame_index=1,
            marks=(Mark("a", Point2(0, 0)), Mark("a", Point2(1, 1))),
        )


def test_project_invariants():
    with pytest.raises(SchemaViolation, match="mode"):
        surveillance_project(mode="drone")
    with pytest.raises(SchemaViolation, match="fps"):
        surveillance_project(fps=0.0)
    with pytest.raises(SchemaViolation, match="rectify_src_quad"):
        surveillance_project(rectify_src_quad=None)
    with pytest.raises(SchemaViolation):
        surveillance_project(
            rectify_dst_rect=(Point2(0, 0), Point2(1, 1), Point2(2, 2), Point2(3, 3))
        )
    with pytest.raises(SchemaViolation, match="objects"):
        surveillance_project(
            objects=(
                ObjectSpec("car", "vehicle", "longitudinal"),
                ObjectSpec("car", "vehicle", "longitudinal"),
            )
        )
    with pytest.raises(SchemaViolation, match="reference_track"):
        Project(id="r", mode="recorder", fps=30.0, frame_dir="frames")


# ---------------------------------------------------------------------------
# round-trips


def make_project_dir(tmp_path, project, annotations, n_frames=3):
    frames = tmp_path / "frames"
    frames.mkdir(exist_ok=True)
    for i in range(1, n_frames + 1):
        noise_image(16, 12, seed=i).save_png(frames / frame_file_name(i))
    path = tmp_path / "project.json"
    save_project(project, annotations, path)
    return path


def test_save_load_structural_identity(tmp_path):
    project = surveillance_project(hit=HitSpec(2, "car"))
    annotations = good_annotations() + [
        ann(3, [("car", 12, 40)], events=(EventMarker("horn", "long blast"),))
    ]
    path = make_project_dir(tmp_path, project, annotations)
    loaded, loaded_ann = load_project(path)
    assert loaded == project  # base_dir is excluded from comparison
    assert loaded.base_dir == tmp_path
    assert loaded_ann == annotations


def test_resave_is_byte_stable(tmp_path):
    project = surveillance_project()
    # deliberately unquantized inputs: first save rounds, second is stable
    annotations = [ann(1, [("car", 1 / 3, 2 / 7)], ref=np.pi), ann(2, [("car", 5, 6)])]
    path = make_project_dir(tmp_path, project, annotations)
    first = path.read_bytes()
    loaded, loaded_ann = load_project(path)
    save_project(loaded, loaded_ann, path)
    assert path.read_bytes() == first
    assert not (tmp_path / "project.json.tmp").exists()


def test_save_orders_annotations_by_frame(tmp_path):
    project = surveillance_project()
    annotations = [ann(3, [("car", 1, 1)]), ann(1, [("car", 0, 0)], ref=10.0)]
    path = make_project_dir(tmp_path, project, annotations)
    doc = json.loads(path.read_text())
    assert [a["frame_index"] for a in doc["annotations"]] == [1, 3]


def test_recorder_track_round_trip(tmp_path):
    quad = (Point2(10.0, 10.0), Point2(90.0, 10.0), Point2(90.0, 60.0), Point2(10.0, 60.0))
    shifted = tuple(Point2(p.x + 3.0, p.y - 2.0) for p in quad)
    track = ReferenceTrack(2, quad, {1: shifted, 2: quad})
    project = Project(
        id="dash",
        mode="recorder",
        fps=30.0,
        frame_dir="frames",
        real_reference_width_m=1.5,
        real_road_width_m=6.0,
        reference_track=track,
        objects=(ObjectSpec("car", "vehicle", "longitudinal"),),
    )
    path = make_project_dir(tmp_path, project, [ann(1, [("car", 5, 5)], ref=30.0)])
    loaded, _ = load_project(path)
    assert loaded.reference_track == track


def test_load_rejects_missing_frame_dir(tmp_path):
    project = surveillance_project(frame_dir="nowhere")
    path = tmp_path / "project.json"
    save_project(project, [], path)
    with pytest.raises(MissingFrameDir):
        load_project(path)


def test_load_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "project.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_project(p)
    with pytest.raises(IoError):
        load_project(tmp_path / "absent.json")


# ---------------------------------------------------------------------------
# schema violations carry field paths


def base_doc():
    return json.loads(
        json.dumps(project_document(surveillance_project(), good_annotations()))
    )


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.pop("fps"), "fps"),
        (lambda d: d.update(fps="fast"), "fps"),
        (lambda d: d.update(mode=7), "mode"),
        (lambda d: d.update(flip_y="yes"), "flip_y"),
        (lambda d: d["rectify_src_quad"].pop(), "rectify_src_quad"),
        (lambda d: d["rectify_src_quad"][0].pop(), "rectify_src_quad[0]"),
        (lambda d: d["objects"][0].update(kind="bike"), "objects[0].kind"),
        (lambda d: d["annotations"][0].pop("frame_index"), "annotations[0].frame_index"),
        (lambda d: d["annotations"][0]["marks"][1].update(x="far"), "annotations[0].marks[1].x"),
        (lambda d: d["annotations"][0]["marks"][0].pop("object_id"), "annotations[0].marks[0].object_id"),
        (lambda d: d["annotations"][1].update(ref_width_px=-2), "annotations[1].ref_width_px"),
        (lambda d: d.update(hit={"frame_index": "x", "object_id": "car"}), "hit.frame_index"),
    ],
)
def test_schema_violation_paths(mutate, path):
    doc = base_doc()
    mutate(doc)
    with pytest.raises(SchemaViolation) as exc:
        parse_project_document(doc)
    assert exc.value.path == path


def test_event_type_violation_path():
    doc = base_doc()
    doc["annotations"][0]["events"] = [{"type": "siren", "note": ""}]
    with pytest.raises(SchemaViolation) as exc:
        parse_project_document(doc)
    assert exc.value.path == "annotations[0].events[0].type"


def test_reference_track_bad_key():
    doc = base_doc()
    doc["reference_track"] = {
        "target_frame": 1,
        "target_points": [[0, 0], [1, 0], [1, 1], [0, 1]],
        "per_frame_points": {"one": [[0, 0], [1, 0], [1, 1], [0, 1]]},
    }
    with pytest.raises(SchemaViolation) as exc:
        parse_project_document(doc)
    assert "per_frame_points" in exc.value.path


def test_parse_annotations_standalone():
    out = parse_annotations(
        [{"frame_index": 4, "marks": [{"object_id": "o", "x": 1, "y": 2}]}]
    )
    assert out[0].frame_index == 4
    assert out[0].marks[0].point == Point2(1.0, 2.0)
    with pytest.raises(SchemaViolation) as exc:
        parse_annotations({"not": "a list"})
    assert exc.value.path == "annotations"


# ---------------------------------------------------------------------------
# frame ingestion


def write_frames(d, indices, size=(16, 12)):
    d.mkdir(exist_ok=True)
    for i in indices:
        noise_image(size[0], size[1], seed=i).save_png(d / frame_file_name(i))


def test_ingest_contiguous_sequence(tmp_path):
    write_frames(tmp_path / "f", [1, 2, 3])
    (tmp_path / "f" / "notes.txt").write_text("ignored")
    seq = ingest_frames(tmp_path / "f")
    assert seq.frame_count == 3
    assert seq.width == 16 and seq.height == 12
    assert seq.path_for(2).name == "frame_0002.png"
    with pytest.raises(MissingFrame):
        seq.path_for(4)
    with pytest.raises(MissingFrame):
        seq.path_for(0)


def test_ingest_gap_detected(tmp_path):
    write_frames(tmp_path / "f", [1, 3])
    with pytest.raises(MissingFrame):
        ingest_frames(tmp_path / "f")


def test_ingest_duplicate_index(tmp_path):
    write_frames(tmp_path / "f", [1])
    noise_image(16, 12).save_png(tmp_path / "f" / "frame_00001.png")
    with pytest.raises(TrajexError, match="duplicate"):
        ingest_frames(tmp_path / "f")


def test_ingest_empty_and_missing_dir(tmp_path):
    (tmp_path / "f").mkdir()
    with pytest.raises(EmptyDirectory):
        ingest_frames(tmp_path / "f")
    with pytest.raises(MissingFrameDir):
        ingest_frames(tmp_path / "absent")


def test_ingest_dimension_mismatch(tmp_path):
    write_frames(tmp_path / "f", [1])
    noise_image(20, 12).save_png(tmp_path / "f" / "frame_0002.png")
    with pytest.raises(DimensionMismatch, match="frame_0002"):
        ingest_frames(tmp_path / "f")


# ---------------------------------------------------------------------------
# validation findings


def codes(report):
    return [f.code for f in report.findings]


def test_validate_clean_annotations():
    report = validate_annotations(surveillance_project(), good_annotations(), fake_sequence())
    assert report.findings == ()
    assert not report.has_errors
    assert report.render() == "annotations valid: no findings"


def test_validate_duplicate_frame():
    anns = good_annotations() + [ann(1, [("car", 50, 50)])]
    report = validate_annotations(surveillance_project(), anns, fake_sequence())
    assert "duplicate_frame" in codes(report)
    assert report.has_errors


def test_validate_out_of_range_and_bounds():
    anns = good_annotations() + [ann(99, [("car", 10, 10)])]
    anns[0] = ann(1, [("car", 10, 20), ("walker", 200.0, 40)], ref=25.0)
    report = validate_annotations(surveillance_project(), anns, fake_sequence())
    assert "frame_out_of_range" in codes(report)
    assert "mark_out_of_bounds" in codes(report)
    bounds = next(f for f in report.findings if f.code == "mark_out_of_bounds")
    assert bounds.object_id == "walker" and bounds.frame_index == 1


def test_validate_unknown_object_and_insufficient_marks():
    anns = [ann(1, [("ghost", 5, 5)], ref=10.0), ann(2, [("car", 5, 5)])]
    report = validate_annotations(surveillance_project(), anns, fake_sequence())
    assert "unknown_object" in codes(report)
    insufficient = [f for f in report.findings if f.code == "insufficient_marks"]
    assert {f.object_id for f in insufficient} == {"car", "walker"}


def test_validate_anchor_and_width_requirements():
    anns = [ann(1, [("car", 1, 1)]), ann(2, [("car", 2, 2)])]
    report = validate_annotations(surveillance_project(), anns, fake_sequence())
    assert "no_ratio_anchor" in codes(report)

    project = surveillance_project(real_reference_width_m=None)
    report = validate_annotations(project, good_annotations(), fake_sequence())
    assert "missing_reference_width" in codes(report)

    project = surveillance_project(real_road_width_m=None)
    report = validate_annotations(project, good_annotations(), fake_sequence())
    assert "missing_road_width" in codes(report)


def test_validate_no_trace_skips_anchor_rule():
    # a single mark can never trace, so the anchor rules stay quiet
    project = surveillance_project(objects=(ObjectSpec("car", "vehicle", "longitudinal"),))
    report = validate_annotations(project, [ann(1, [("car", 1, 1)])], fake_sequence())
    assert codes(report) == ["insufficient_marks"]


def test_validate_hit_references():
    project = surveillance_project(hit=HitSpec(99, "ghost"))
    report = validate_annotations(project, good_annotations(), fake_sequence())
    assert codes(report).count("unknown_object") == 1
    assert "frame_out_of_range" in codes(report)


def recorder_project(per_frame_extra=None, n_objects=1):
    quad = (Point2(10.0, 10.0), Point2(90.0, 10.0), Point2(90.0, 60.0), Point2(10.0, 60.0))
    per = {1: quad, 2: quad}
    if per_frame_extra:
        per.update(per_frame_extra)
    track = ReferenceTrack(2, quad, per)
    return Project(
        id="dash",
        mode="recorder",
        fps=30.0,
        frame_dir="frames",
        real_reference_width_m=1.5,
        real_road_width_m=6.0,
        reference_track=track,
        objects=(ObjectSpec("car", "vehicle", "longitudinal"),),
    )


def test_validate_recorder_specifics():
    project = recorder_project()
    anns = [ann(1, [("car", 20, 20)], ref=30.0), ann(2, [("car", 21, 21)]), ann(3, [("car", 22, 22)])]
    report = validate_annotations(project, anns, fake_sequence(n=4))
    assert "missing_reference_points" in codes(report)  # frame 3 annotated, unregistered
    warn = [f for f in report.findings if f.code == "unregistered_frame"]
    assert [f.frame_index for f in warn] == [4]
    assert all(f.severity == "warning" for f in warn)


def test_validate_degenerate_reference_quad():
    bad = (Point2(0.0, 0.0), Point2(1.0, 1.0), Point2(2.0, 2.0), Point2(5.0, 9.0))
    project = recorder_project(per_frame_extra={3: bad})
    anns = [ann(1, [("car", 20, 20)], ref=30.0), ann(2, [("car", 21, 21)])]
    report = validate_annotations(project, anns, fake_sequence(n=3))
    deg = [f for f in report.findings if f.code == "degenerate_reference_quad"]
    assert [f.frame_index for f in deg] == [3]


def test_finding_render_format():
    project = surveillance_project(hit=HitSpec(99, "ghost"))
    report = validate_annotations(project, good_annotations(), fake_sequence())
    text = report.render()
    assert "ERROR [unknown_object]" in text
    assert "frame 99" in text and "object 'ghost'" in text


# ---------------------------------------------------------------------------
# property: persisted form is a fixpoint


@st.composite
def annotation_lists(draw):
    frames = draw(st.lists(st.integers(1, 50), unique=True, min_size=1, max_size=6))
    out = []
    coord = st.floats(-1e6, 1e6, allow_nan=False)
    for f in sorted(frames):
        n_marks = draw(st.integers(0, 3))
        marks = tuple(
            Mark(f"obj{i}", Point2(draw(coord), draw(coord))) for i in range(n_marks)
        )
        ref = draw(st.one_of(st.none(), st.floats(1e-3, 1e6, allow_nan=False)))
        events = tuple(
            EventMarker(draw(st.sampled_from(("horn", "lights", "brake"))), draw(st.text(max_size=12)))
            for _ in range(draw(st.integers(0, 2)))
        )
        out.append(FrameAnnotation(f, marks, ref, events))
    return out


@settings(max_examples=60, deadline=None)
@given(annotations=annotation_lists())
def test_save_load_save_fixpoint(annotations, tmp_path_factory):
    tmp = tmp_path_factory.mktemp("fixpoint")
    project = surveillance_project()
    (tmp / "frames").mkdir(exist_ok=True)
    path = tmp / "project.json"
    save_project(project, annotations, path)
    first = path.read_bytes()
    loaded, loaded_ann = load_project(path)
    save_project(loaded, loaded_ann, path)
    assert path.read_bytes() == first
