"""Project and annotation data model, JSON persistence, and validation.

A project is one JSON document: scenario configuration (mode, frame rate,
real-world reference widths, rectification quads or the recorder reference
track) plus the full per-frame annotation list.  Reals persist at up to
9 significant digits with no exponent in [1e-3, 1e9); loading and saving both
pass values through that representation, so save -> load is the identity for
any document the schema can represent and re-saving is byte-stable.

Marks and per-frame reference points are raw-frame pixel coordinates; the
trace pipeline maps them into the rectified (or target-frame) space.  A
frame's ``ref_width_px`` is the reference width measured in that rectified
space, since a scalar width cannot be transported through a homography.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image as PILImage

from .errors import (
    DegenerateCorrespondence,
    DimensionMismatch,
    EmptyDirectory,
    IoError,
    MissingFrame,
    MissingFrameDir,
    ParseError,
    SchemaViolation,
    TrajexError,
)
from .geometry import Point2, is_degenerate_quad
from .stabilize import ReferenceTrack

MODES = ("surveillance", "recorder")
OBJECT_KINDS = ("vehicle", "pedestrian")
DIRECTIONS = ("longitudinal", "lateral")
EVENT_TYPES = ("horn", "lights", "brake")

FRAME_NAME_RE = re.compile(r"^frame_(\d{4,})\.png$")


def quantize_real(v: float) -> float:
    """Round to the 9-significant-digit persisted precision."""
    return float(f"{float(v):.9g}")


def frame_file_name(index: int) -> str:
    return f"frame_{index:04d}.png"


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    kind: str
    primary_direction: str

    def __post_init__(self):
        if self.kind not in OBJECT_KINDS:
            raise SchemaViolation("kind", f"must be one of {OBJECT_KINDS}, got {self.kind!r}")
        if self.primary_direction not in DIRECTIONS:
            raise SchemaViolation(
                "primary_direction", f"must be one of {DIRECTIONS}, got {self.primary_direction!r}"
            )


@dataclass(frozen=True)
class HitSpec:
    frame_index: int
    object_id: str


@dataclass(frozen=True)
class Mark:
    object_id: str
    point: Point2


@dataclass(frozen=True)
class EventMarker:
    type: str
    note: str = ""

    def __post_init__(self):
        if self.type not in EVENT_TYPES:
            raise SchemaViolation("type", f"must be one of {EVENT_TYPES}, got {self.type!r}")


@dataclass(frozen=True)
class FrameAnnotation:
    """Operator marks for one frame: feature points, optional reference width,
    optional warning-action event markers."""

    frame_index: int
    marks: tuple[Mark, ...] = ()
    ref_width_px: float | None = None
    events: tuple[EventMarker, ...] = ()

    def __post_init__(self):
        if self.frame_index < 1:
            raise SchemaViolation("frame_index", f"must be >= 1, got {self.frame_index}")
        if self.ref_width_px is not None and not (self.ref_width_px > 0):
            raise SchemaViolation("ref_width_px", f"must be > 0, got {self.ref_width_px}")
        ids = [m.object_id for m in self.marks]
        if len(ids) != len(set(ids)):
            raise SchemaViolation(
                "marks", f"frame {self.frame_index} marks an object more than once"
            )


@dataclass(frozen=True)
class Project:
    id: str
    mode: str
    fps: float
    frame_dir: str
    real_reference_width_m: float | None = None
    real_road_width_m: float | None = None
    rectify_src_quad: tuple[Point2, Point2, Point2, Point2] | None = None
    rectify_dst_rect: tuple[Point2, Point2, Point2, Point2] | None = None
    flip_y: bool = True
    objects: tuple[ObjectSpec, ...] = ()
    hit: HitSpec | None = None
    reference_track: ReferenceTrack | None = None
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise SchemaViolation("mode", f"must be one of {MODES}, got {self.mode!r}")
        if not (self.fps > 0):
            raise SchemaViolation("fps", f"must be > 0, got {self.fps}")
        if self.real_reference_width_m is not None and not (self.real_reference_width_m > 0):
            raise SchemaViolation(
                "real_reference_width_m", f"must be > 0, got {self.real_reference_width_m}"
            )
        if self.real_road_width_m is not None and not (self.real_road_width_m > 0):
            raise SchemaViolation(
                "real_road_width_m", f"must be > 0, got {self.real_road_width_m}"
            )
        if self.mode == "surveillance":
            if self.rectify_src_quad is None:
                raise SchemaViolation("rectify_src_quad", "required in surveillance mode")
            if self.rectify_dst_rect is None:
                raise SchemaViolation("rectify_dst_rect", "required in surveillance mode")
        if self.mode == "recorder" and self.reference_track is None:
            raise SchemaViolation("reference_track", "required in recorder mode")
        for name, quad in (
            ("rectify_src_quad", self.rectify_src_quad),
            ("rectify_dst_rect", self.rectify_dst_rect),
        ):
            if quad is not None and is_degenerate_quad(quad):
                raise SchemaViolation(name, "quad has a collinear triple")
        ids = [o.id for o in self.objects]
        if len(ids) != len(set(ids)):
            raise SchemaViolation("objects", "object ids must be unique")

    def resolved_frame_dir(self) -> Path:
        p = Path(self.frame_dir)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p


# ---------------------------------------------------------------------------
# parsing


def _real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, f"expected number, got {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v):
        raise SchemaViolation(path, f"must be finite, got {v}")
    return quantize_real(v)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected integer, got {type(value).__name__}")
    return value


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected string, got {type(value).__name__}")
    return value


def _point(value, path: str) -> Point2:
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaViolation(path, "expected [x, y]")
    try:
        return Point2(_real(value[0], f"{path}[0]"), _real(value[1], f"{path}[1]"))
    except ValueError as e:
        raise SchemaViolation(path, str(e)) from e


def _quad(value, path: str) -> tuple[Point2, Point2, Point2, Point2]:
    if not isinstance(value, list) or len(value) != 4:
        raise SchemaViolation(path, "expected 4 [x, y] points")
    return tuple(_point(v, f"{path}[{i}]") for i, v in enumerate(value))


def _parse_reference_track(value, path: str) -> ReferenceTrack:
    if not isinstance(value, dict):
        raise SchemaViolation(path, "expected object")
    target_frame = _integer(value.get("target_frame"), f"{path}.target_frame")
    target_points = _quad(value.get("target_points"), f"{path}.target_points")
    per_raw = value.get("per_frame_points")
    if not isinstance(per_raw, dict):
        raise SchemaViolation(f"{path}.per_frame_points", "expected object keyed by frame")
    per: dict[int, tuple[Point2, ...]] = {}
    for key, pts in per_raw.items():
        kpath = f"{path}.per_frame_points[{key!r}]"
        try:
            frame = int(key)
        except ValueError:
            raise SchemaViolation(kpath, "key must be an integer frame index") from None
        if frame < 1:
            raise SchemaViolation(kpath, "frame index must be >= 1")
        per[frame] = _quad(pts, kpath)
    try:
        return ReferenceTrack(
            target_frame=target_frame, target_points=target_points, per_frame_points=per
        )
    except (ValueError, DegenerateCorrespondence) as e:
        raise SchemaViolation(path, str(e)) from e


def _parse_annotation(value, path: str) -> FrameAnnotation:
    if not isinstance(value, dict):
        raise SchemaViolation(path, "expected object")
    frame_index = _integer(value.get("frame_index"), f"{path}.frame_index")
    marks_raw = value.get("marks", [])
    if not isinstance(marks_raw, list):
        raise SchemaViolation(f"{path}.marks", "expected list")
    marks = []
    for i, m in enumerate(marks_raw):
        mpath = f"{path}.marks[{i}]"
        if not isinstance(m, dict):
            raise SchemaViolation(mpath, "expected object")
        if "object_id" not in m:
            raise SchemaViolation(f"{mpath}.object_id", "missing")
        oid = _string(m.get("object_id"), f"{mpath}.object_id")
        x = _real(m.get("x"), f"{mpath}.x")
        y = _real(m.get("y"), f"{mpath}.y")
        marks.append(Mark(oid, Point2(x, y)))
    ref_width = value.get("ref_width_px")
    if ref_width is not None:
        ref_width = _real(ref_width, f"{path}.ref_width_px")
    events_raw = value.get("events", [])
    if not isinstance(events_raw, list):
        raise SchemaViolation(f"{path}.events", "expected list")
    events = []
    for i, e in enumerate(events_raw):
        epath = f"{path}.events[{i}]"
        if not isinstance(e, dict):
            raise SchemaViolation(epath, "expected object")
        etype = _string(e.get("type"), f"{epath}.type")
        note = _string(e.get("note", ""), f"{epath}.note")
        try:
            events.append(EventMarker(etype, note))
        except SchemaViolation as err:
            raise SchemaViolation(f"{epath}.type", str(err)) from err
    try:
        return FrameAnnotation(
            frame_index=frame_index,
            marks=tuple(marks),
            ref_width_px=ref_width,
            events=tuple(events),
        )
    except SchemaViolation as e:
        raise SchemaViolation(f"{path}.{e.path}", e.args[0].split(": ", 1)[-1]) from e


def parse_annotations(raw, path: str = "annotations") -> list[FrameAnnotation]:
    if not isinstance(raw, list):
        raise SchemaViolation(path, "expected list")
    return [_parse_annotation(a, f"{path}[{i}]") for i, a in enumerate(raw)]


def parse_project_document(doc: dict, base_dir: Path | None = None) -> tuple[Project, list[FrameAnnotation]]:
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "top level must be an object")
    pid = _string(doc.get("id"), "id")
    mode = _string(doc.get("mode"), "mode")
    fps = _real(doc.get("fps"), "fps")
    frame_dir = _string(doc.get("frame_dir"), "frame_dir")
    ref_w = doc.get("real_reference_width_m")
    if ref_w is not None:
        ref_w = _real(ref_w, "real_reference_width_m")
    road_w = doc.get("real_road_width_m")
    if road_w is not None:
        road_w = _real(road_w, "real_road_width_m")
    src_quad = doc.get("rectify_src_quad")
    if src_quad is not None:
        src_quad = _quad(src_quad, "rectify_src_quad")
    dst_rect = doc.get("rectify_dst_rect")
    if dst_rect is not None:
        dst_rect = _quad(dst_rect, "rectify_dst_rect")
    flip_y = doc.get("flip_y", True)
    if not isinstance(flip_y, bool):
        raise SchemaViolation("flip_y", f"expected boolean, got {type(flip_y).__name__}")
    objects_raw = doc.get("objects", [])
    if not isinstance(objects_raw, list):
        raise SchemaViolation("objects", "expected list")
    objects = []
    for i, o in enumerate(objects_raw):
        opath = f"objects[{i}]"
        if not isinstance(o, dict):
            raise SchemaViolation(opath, "expected object")
        try:
            objects.append(
                ObjectSpec(
                    id=_string(o.get("id"), f"{opath}.id"),
                    kind=_string(o.get("kind"), f"{opath}.kind"),
                    primary_direction=_string(
                        o.get("primary_direction"), f"{opath}.primary_direction"
                    ),
                )
            )
        except SchemaViolation as e:
            if e.path in ("kind", "primary_direction"):
                raise SchemaViolation(f"{opath}.{e.path}", e.args[0].split(": ", 1)[-1]) from e
            raise
    hit_raw = doc.get("hit")
    hit = None
    if hit_raw is not None:
        if not isinstance(hit_raw, dict):
            raise SchemaViolation("hit", "expected object or null")
        hit = HitSpec(
            frame_index=_integer(hit_raw.get("frame_index"), "hit.frame_index"),
            object_id=_string(hit_raw.get("object_id"), "hit.object_id"),
        )
        if hit.frame_index < 1:
            raise SchemaViolation("hit.frame_index", "must be >= 1")
    track_raw = doc.get("reference_track")
    track = None
    if track_raw is not None:
        track = _parse_reference_track(track_raw, "reference_track")
    annotations = parse_annotations(doc.get("annotations", []))
    try:
        project = Project(
            id=pid,
            mode=mode,
            fps=fps,
            frame_dir=frame_dir,
            real_reference_width_m=ref_w,
            real_road_width_m=road_w,
            rectify_src_quad=src_quad,
            rectify_dst_rect=dst_rect,
            flip_y=flip_y,
            objects=tuple(objects),
            hit=hit,
            reference_track=track,
            base_dir=base_dir,
        )
    except DegenerateCorrespondence as e:
        raise SchemaViolation("rectify_src_quad", str(e)) from e
    return project, annotations


def load_project(path: str | Path) -> tuple[Project, list[FrameAnnotation]]:
    """Load and fully validate a project document; checks the frame dir exists."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read project file {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON: {e}") from e
    project, annotations = parse_project_document(doc, base_dir=path.parent)
    frames = project.resolved_frame_dir()
    if not frames.is_dir():
        raise MissingFrameDir(f"frame directory {frames} does not exist")
    return project, annotations


# ---------------------------------------------------------------------------
# serialization


def _point_json(p: Point2) -> list[float]:
    return [quantize_real(p.x), quantize_real(p.y)]


def _quad_json(quad) -> list[list[float]] | None:
    if quad is None:
        return None
    return [_point_json(p) for p in quad]


def annotation_to_json(a: FrameAnnotation) -> dict:
    return {
        "frame_index": a.frame_index,
        "marks": [
            {
                "object_id": m.object_id,
                "x": quantize_real(m.point.x),
                "y": quantize_real(m.point.y),
            }
            for m in a.marks
        ],
        "ref_width_px": None if a.ref_width_px is None else quantize_real(a.ref_width_px),
        "events": [{"type": e.type, "note": e.note} for e in a.events],
    }


def project_document(project: Project, annotations: list[FrameAnnotation]) -> dict:
    """Canonical JSON form: full key set, annotations sorted by frame."""
    track = project.reference_track
    track_json = None
    if track is not None:
        track_json = {
            "target_frame": track.target_frame,
            "target_points": _quad_json(track.target_points),
            "per_frame_points": {
                str(f): _quad_json(track.per_frame_points[f])
                for f in sorted(track.per_frame_points)
            },
        }
    return {
        "id": project.id,
        "mode": project.mode,
        "fps": quantize_real(project.fps),
        "frame_dir": project.frame_dir,
        "real_reference_width_m": (
            None
            if project.real_reference_width_m is None
            else quantize_real(project.real_reference_width_m)
        ),
        "real_road_width_m": (
            None
            if project.real_road_width_m is None
            else quantize_real(project.real_road_width_m)
        ),
        "rectify_src_quad": _quad_json(project.rectify_src_quad),
        "rectify_dst_rect": _quad_json(project.rectify_dst_rect),
        "flip_y": project.flip_y,
        "objects": [
            {"id": o.id, "kind": o.kind, "primary_direction": o.primary_direction}
            for o in project.objects
        ],
        "hit": (
            None
            if project.hit is None
            else {"frame_index": project.hit.frame_index, "object_id": project.hit.object_id}
        ),
        "reference_track": track_json,
        "annotations": [
            annotation_to_json(a)
            for a in sorted(annotations, key=lambda a: a.frame_index)
        ],
    }


def save_project(project: Project, annotations: list[FrameAnnotation], path: str | Path) -> None:
    """Atomically write the canonical document (temp file + rename)."""
    path = Path(path)
    doc = project_document(project, annotations)
    payload = json.dumps(doc, indent=2) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as e:
        raise IoError(f"cannot write project file {path}: {e}") from e


# ---------------------------------------------------------------------------
# frame ingestion


@dataclass(frozen=True)
class FrameSequence:
    """Contiguous frame files (frame_0001.png ...) with uniform dimensions."""

    directory: Path
    paths: tuple[Path, ...]
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.paths)

    @property
    def frame_count(self) -> int:
        return len(self.paths)

    def path_for(self, frame_index: int) -> Path:
        if not 1 <= frame_index <= len(self.paths):
            raise MissingFrame(frame_index)
        return self.paths[frame_index - 1]


def ingest_frames(directory: str | Path) -> FrameSequence:
    """Scan a directory of frame_%04d.png files into a checked sequence."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFrameDir(f"frame directory {directory} does not exist")
    indexed: dict[int, Path] = {}
    for entry in sorted(directory.iterdir()):
        m = FRAME_NAME_RE.match(entry.name)
        if not m:
            continue
        index = int(m.group(1))
        if index in indexed:
            raise TrajexError(
                f"duplicate frame files for index {index}: {indexed[index].name}, {entry.name}"
            )
        indexed[index] = entry
    if not indexed:
        raise EmptyDirectory(f"no frame_NNNN.png files in {directory}")
    count = max(indexed)
    for expected in range(1, count + 1):
        if expected not in indexed:
            raise MissingFrame(expected)
    paths = tuple(indexed[i] for i in range(1, count + 1))
    width = height = None
    for p in paths:
        try:
            with PILImage.open(p) as im:
                w, h = im.size
        except OSError as e:
            raise IoError(f"cannot read frame {p}: {e}") from e
        if width is None:
            width, height = w, h
        elif (w, h) != (width, height):
            raise DimensionMismatch(
                f"{p.name} is {w}x{h}, expected {width}x{height}"
            )
    return FrameSequence(directory=directory, paths=paths, width=width, height=height)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    frame_index: int | None = None
    object_id: str | None = None

    def render(self) -> str:
        where = []
        if self.frame_index is not None:
            where.append(f"frame {self.frame_index}")
        if self.object_id is not None:
            where.append(f"object {self.object_id!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{self.severity.upper()} [{self.code}] {self.message}{suffix}"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "frame_index": self.frame_index,
            "object_id": self.object_id,
        }


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def has_errors(self) -> bool:
        return any(f.severity == "error" for f in self.findings)

    def render(self) -> str:
        if not self.findings:
            return "annotations valid: no findings"
        return "\n".join(f.render() for f in self.findings)

    def to_json(self) -> dict:
        return {"findings": [f.to_json() for f in self.findings]}


def validate_annotations(
    project: Project,
    annotations: list[FrameAnnotation],
    sequence: FrameSequence,
) -> ValidationReport:
    """Pure consistency check; findings are data, never exceptions."""
    findings: list[Finding] = []
    known_ids = {o.id for o in project.objects}

    seen_frames: set[int] = set()
    marks_per_object: dict[str, int] = {o.id: 0 for o in project.objects}
    any_ref_width = False
    for a in sorted(annotations, key=lambda a: a.frame_index):
        if a.frame_index in seen_frames:
            findings.append(
                Finding(
                    "error",
                    "duplicate_frame",
                    "multiple annotation entries for one frame (conflicting marks/anchors)",
                    frame_index=a.frame_index,
                )
            )
        seen_frames.add(a.frame_index)
        if a.frame_index > len(sequence):
            findings.append(
                Finding(
                    "error",
                    "frame_out_of_range",
                    f"annotation beyond the {len(sequence)}-frame sequence",
                    frame_index=a.frame_index,
                )
            )
        if a.ref_width_px is not None:
            any_ref_width = True
        for m in a.marks:
            if m.object_id not in known_ids:
                findings.append(
                    Finding(
                        "error",
                        "unknown_object",
                        f"mark references undeclared object {m.object_id!r}",
                        frame_index=a.frame_index,
                        object_id=m.object_id,
                    )
                )
            else:
                marks_per_object[m.object_id] += 1
            x, y = m.point.x, m.point.y
            if not (0 <= x <= sequence.width - 1 and 0 <= y <= sequence.height - 1):
                findings.append(
                    Finding(
                        "error",
                        "mark_out_of_bounds",
                        f"mark at ({x}, {y}) outside {sequence.width}x{sequence.height} frame",
                        frame_index=a.frame_index,
                        object_id=m.object_id,
                    )
                )

    for oid, count in marks_per_object.items():
        if count < 2:
            findings.append(
                Finding(
                    "error",
                    "insufficient_marks",
                    f"{count} mark(s); at least 2 needed to form a trajectory",
                    object_id=oid,
                )
            )

    will_trace = any(count >= 2 for count in marks_per_object.values())
    if project.mode == "recorder" and project.reference_track is not None:
        will_trace = will_trace or len(project.reference_track.per_frame_points) >= 2
    if will_trace and not any_ref_width:
        findings.append(
            Finding(
                "error",
                "no_ratio_anchor",
                "no frame carries ref_width_px; the longitudinal scale is unanchored",
            )
        )
    if will_trace and any_ref_width and project.real_reference_width_m is None:
        findings.append(
            Finding(
                "error",
                "missing_reference_width",
                "real_reference_width_m is not set; reference pixel widths cannot be converted",
            )
        )
    if will_trace and project.real_road_width_m is None:
        findings.append(
            Finding(
                "error",
                "missing_road_width",
                "real_road_width_m is not set; lateral scaling is impossible",
            )
        )

    if project.hit is not None:
        if project.hit.object_id not in known_ids:
            findings.append(
                Finding(
                    "error",
                    "unknown_object",
                    f"hit references undeclared object {project.hit.object_id!r}",
                    frame_index=project.hit.frame_index,
                    object_id=project.hit.object_id,
                )
            )
        if project.hit.frame_index > len(sequence):
            findings.append(
                Finding(
                    "error",
                    "frame_out_of_range",
                    "hit frame beyond the sequence",
                    frame_index=project.hit.frame_index,
                )
            )

    if project.mode == "recorder" and project.reference_track is not None:
        registered = set(project.reference_track.per_frame_points)
        for f, pts in sorted(project.reference_track.per_frame_points.items()):
            if is_degenerate_quad(pts):
                findings.append(
                    Finding(
                        "error",
                        "degenerate_reference_quad",
                        "reference quad has a collinear triple",
                        frame_index=f,
                    )
                )
        for a in annotations:
            if (a.marks or a.ref_width_px is not None) and a.frame_index not in registered:
                findings.append(
                    Finding(
                        "error",
                        "missing_reference_points",
                        "annotated frame has no reference quad; it cannot be registered",
                        frame_index=a.frame_index,
                    )
                )
        for f in range(1, len(sequence) + 1):
            if f not in registered and f not in seen_frames:
                findings.append(
                    Finding(
                        "warning",
                        "unregistered_frame",
                        "frame has no reference quad; it will be skipped by stabilization",
                        frame_index=f,
                    )
                )

    return ValidationReport(tuple(findings))
