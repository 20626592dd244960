"""End-to-end trajectory computation for a validated project.

Pipeline: raw marks are mapped into the working pixel space (the rectified
dst-rect space in surveillance mode, the target-frame space in recorder
mode), the ratio model is fitted from reference-width measurements, every
object's track is scaled longitudinally and laterally, kinematics are
estimated, and all trajectories are translated so the hit-frame sample sits
at the origin.  Output serialization is deterministic byte-for-byte so the
CLI and the annotation server produce identical documents.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .errors import TrajexError
from .geometry import Point2, map_point
from .project import (
    FrameAnnotation,
    FrameSequence,
    Project,
    validate_annotations,
)
from .scaling import (
    PixelTrack,
    RatioMeasurement,
    RatioModel,
    Trajectory,
    TrackSample,
    center_on_hit_point,
    estimate_heading,
    estimate_velocity,
    fit_ratio_gradient,
    lateral_ratio,
    longitudinal_displacement,
    scale_lateral,
    scale_longitudinal,
)
from .stabilize import ego_track, register_to_target_frame, stabilize_track
from .warp import rectification_from_lane_quad

EGO_OBJECT_ID = "ego"


@dataclass(frozen=True)
class TraceResult:
    project_id: str
    mode: str
    fps: float
    hit_frame: int | None
    hit_frame_inferred: bool
    hit_object_id: str | None
    ratio_model: RatioModel | None
    lateral_ratio_m_per_px: float | None
    trajectories: tuple[Trajectory, ...]
    object_meta: dict[str, tuple[str, str]]  # object_id -> (kind, primary_direction)
    events: tuple[tuple[int, str, str], ...]  # (frame_index, type, note)


def working_tracks(
    project: Project,
    annotations: list[FrameAnnotation],
    sequence: FrameSequence,
) -> tuple[dict[str, PixelTrack], dict[str, bool]]:
    """Raw marks mapped into working-space pixel tracks, per object.

    Returns (tracks, approximate flags).  Recorder mode adds the synthetic
    ego track when at least two frames are registered.
    """
    raw: dict[str, list[TrackSample]] = {o.id: [] for o in project.objects}
    for a in sorted(annotations, key=lambda a: a.frame_index):
        for m in a.marks:
            if m.object_id in raw:
                raw[m.object_id].append(TrackSample(a.frame_index, m.point))

    tracks: dict[str, PixelTrack] = {}
    approximate: dict[str, bool] = {}
    if project.mode == "surveillance":
        h = rectification_from_lane_quad(project.rectify_src_quad, project.rectify_dst_rect)
        for oid, samples in raw.items():
            if not samples:
                continue
            mapped = tuple(
                TrackSample(s.frame_index, map_point(h, s.point)) for s in samples
            )
            tracks[oid] = PixelTrack(oid, mapped)
            approximate[oid] = False
    else:
        registrations = register_to_target_frame(project.reference_track)
        for oid, samples in raw.items():
            if not samples:
                continue
            tracks[oid] = stabilize_track(PixelTrack(oid, tuple(samples)), registrations)
            approximate[oid] = False
        if len(registrations) >= 2 and EGO_OBJECT_ID not in tracks:
            tracks[EGO_OBJECT_ID] = ego_track(
                registrations, sequence.width, sequence.height, EGO_OBJECT_ID
            )
            approximate[EGO_OBJECT_ID] = True
    return tracks, approximate


def ratio_measurements(
    project: Project, annotations: list[FrameAnnotation]
) -> list[RatioMeasurement]:
    w = project.real_reference_width_m
    ms = []
    for a in sorted(annotations, key=lambda a: a.frame_index):
        if a.ref_width_px is None:
            continue
        if w is None:
            raise TrajexError(
                "ref_width_px present but real_reference_width_m is not set"
            )
        ms.append(
            RatioMeasurement(
                frame_index=a.frame_index, ref_width_px=a.ref_width_px, ref_width_m=w
            )
        )
    return ms


def road_width_px(project: Project) -> float:
    """Lateral pixel extent of the working space's road-spanning quad."""
    if project.mode == "surveillance":
        quad = project.rectify_dst_rect
    else:
        quad = project.reference_track.target_points
    xs = [p.x for p in quad]
    extent = max(xs) - min(xs)
    if extent <= 0:
        raise TrajexError("road-spanning quad has zero lateral extent")
    return extent


def infer_hit_frame(
    project: Project, tracks: dict[str, PixelTrack]
) -> int | None:
    """Frame minimizing working-space distance between the vehicle and the
    pedestrian (ties toward the earlier frame)."""
    def first_of_kind(kind: str) -> str | None:
        for o in project.objects:
            if o.kind == kind and o.id in tracks:
                return o.id
        return None

    ordered = [o.id for o in project.objects if o.id in tracks]
    if EGO_OBJECT_ID in tracks and EGO_OBJECT_ID not in ordered:
        ordered.append(EGO_OBJECT_ID)
    if not ordered:
        return None

    vehicle = first_of_kind("vehicle")
    if vehicle is None and EGO_OBJECT_ID in tracks:
        vehicle = EGO_OBJECT_ID
    pedestrian = first_of_kind("pedestrian")
    if vehicle is None or pedestrian is None or vehicle == pedestrian:
        pair = ordered[:2]
        if len(pair) < 2:
            return tracks[ordered[0]].frames()[-1]
        vehicle, pedestrian = pair

    a = {s.frame_index: s.point for s in tracks[vehicle].samples}
    b = {s.frame_index: s.point for s in tracks[pedestrian].samples}
    common = sorted(set(a) & set(b))
    if not common:
        return max(t.frames()[-1] for t in tracks.values())
    best = None
    best_d = None
    for f in common:
        d = (a[f].x - b[f].x) ** 2 + (a[f].y - b[f].y) ** 2
        if best_d is None or d < best_d:
            best, best_d = f, d
    return best


def compute_trajectories(
    project: Project,
    annotations: list[FrameAnnotation],
    sequence: FrameSequence,
) -> TraceResult:
    tracks, approx = working_tracks(project, annotations, sequence)
    measurements = ratio_measurements(project, annotations)

    model: RatioModel | None = None
    r_lat: float | None = None
    if tracks:
        if not measurements:
            raise TrajexError("no reference-width measurements; run validation first")
        model = fit_ratio_gradient(measurements, n_frames=max(len(sequence), 1))
        if project.real_road_width_m is None:
            raise TrajexError("real_road_width_m is not set; run validation first")
        r_lat = lateral_ratio(project.real_road_width_m, road_width_px(project))

    if project.hit is not None:
        hit_frame: int | None = project.hit.frame_index
        hit_inferred = False
        hit_object = project.hit.object_id
    else:
        hit_frame = infer_hit_frame(project, tracks)
        hit_inferred = hit_frame is not None
        hit_object = None

    order = [o.id for o in project.objects if o.id in tracks]
    if EGO_OBJECT_ID in tracks and EGO_OBJECT_ID not in order:
        order.append(EGO_OBJECT_ID)

    meta = {o.id: (o.kind, o.primary_direction) for o in project.objects}
    if EGO_OBJECT_ID in tracks and EGO_OBJECT_ID not in meta:
        meta[EGO_OBJECT_ID] = ("vehicle", "longitudinal")

    trajectories = []
    for oid in order:
        track = tracks[oid]
        scaling_track = track
        if project.flip_y:
            scaling_track = PixelTrack(
                oid,
                tuple(
                    TrackSample(s.frame_index, Point2(s.point.x, -s.point.y))
                    for s in track.samples
                ),
            )
        frames = track.frames()
        times = tuple((f - frames[0]) / project.fps for f in frames)
        xs = tuple(scale_lateral(track, r_lat))
        if len(track.samples) >= 2:
            d = longitudinal_displacement(scaling_track, model, measurements)
        else:
            d = 0.0
        ys = tuple(scale_longitudinal(scaling_track, model, d))
        traj = Trajectory(
            object_id=oid,
            frames=tuple(frames),
            times=times,
            x=xs,
            y=ys,
            approximate=approx.get(oid, False),
        )
        if len(traj) >= 2:
            speeds = tuple(estimate_velocity(traj, project.fps))
            headings = tuple(estimate_heading(traj))
        else:
            speeds = (0.0,)
            headings = (0.0,)
        traj = Trajectory(
            object_id=oid,
            frames=traj.frames,
            times=traj.times,
            x=traj.x,
            y=traj.y,
            speeds=speeds,
            headings=headings,
            approximate=traj.approximate,
        )
        if hit_frame is not None:
            traj = center_on_hit_point(traj, hit_frame)
        trajectories.append(traj)

    events = tuple(
        (a.frame_index, e.type, e.note)
        for a in sorted(annotations, key=lambda a: a.frame_index)
        for e in a.events
    )
    return TraceResult(
        project_id=project.id,
        mode=project.mode,
        fps=project.fps,
        hit_frame=hit_frame,
        hit_frame_inferred=hit_inferred,
        hit_object_id=hit_object,
        ratio_model=model,
        lateral_ratio_m_per_px=r_lat,
        trajectories=tuple(trajectories),
        object_meta=meta,
        events=events,
    )


def run_trace(
    project: Project,
    annotations: list[FrameAnnotation],
    sequence: FrameSequence,
):
    """Validate then compute; returns (report, result) with result None on errors."""
    report = validate_annotations(project, annotations, sequence)
    if report.has_errors:
        return report, None
    return report, compute_trajectories(project, annotations, sequence)


# ---------------------------------------------------------------------------
# serialization


def trace_document(result: TraceResult) -> dict:
    trajs = []
    for t in result.trajectories:
        kind, direction = result.object_meta.get(t.object_id, ("vehicle", "longitudinal"))
        trajs.append(
            {
                "object_id": t.object_id,
                "kind": kind,
                "primary_direction": direction,
                "approximate": t.approximate,
                "points": [
                    {
                        "frame_index": t.frames[i],
                        "time_s": t.times[i],
                        "x_m": t.x[i],
                        "y_m": t.y[i],
                        "speed_mps": t.speeds[i],
                        "heading_rad": t.headings[i],
                    }
                    for i in range(len(t))
                ],
            }
        )
    model = result.ratio_model
    return {
        "project_id": result.project_id,
        "mode": result.mode,
        "fps": result.fps,
        "hit_frame": result.hit_frame,
        "hit_frame_inferred": result.hit_frame_inferred,
        "hit_object_id": result.hit_object_id,
        "ratio_model": (
            None
            if model is None
            else {"r1": model.r1, "q": model.q, "n_frames": model.n_frames}
        ),
        "lateral_ratio_m_per_px": result.lateral_ratio_m_per_px,
        "events": [
            {"frame_index": f, "type": kind, "note": note}
            for f, kind, note in result.events
        ],
        "trajectories": trajs,
    }


def trace_json_bytes(result: TraceResult) -> bytes:
    return (json.dumps(trace_document(result), indent=2) + "\n").encode("utf-8")


CSV_HEADER = ["object_id", "frame_index", "time_s", "x_m", "y_m", "speed_mps", "heading_rad"]


def trace_document_to_csv(doc: dict) -> str:
    """CSV form of a trace document; reals at 6 decimal places."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for traj in doc.get("trajectories", []):
        for p in traj.get("points", []):
            writer.writerow(
                [
                    traj["object_id"],
                    p["frame_index"],
                    f"{p['time_s']:.6f}",
                    f"{p['x_m']:.6f}",
                    f"{p['y_m']:.6f}",
                    f"{p['speed_mps']:.6f}",
                    f"{p['heading_rad']:.6f}",
                ]
            )
    return out.getvalue()
