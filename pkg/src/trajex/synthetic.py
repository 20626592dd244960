"""Synthetic scene generators with exact ground truth.

Each generator writes a complete on-disk project (frames plus project.json
with programmatic annotations) and returns the world-coordinate truth, so the
full pipeline can be exercised end to end and its output compared against
known motion.  Three setups:

- fronto-parallel surveillance: uniform scale everywhere, constant reference
  width, exact recovery expected;
- oblique surveillance: a pinhole camera tilted 30-60 degrees from nadir
  views a planar road; the marked lane quad's corners are deliberately
  staggered along the road (as a human operator's would be), leaving a
  projective residual that the geometric-progression ratio model only
  approximates;
- recorder: a zooming/translating dash-cam-like sequence registered to the
  last frame through a tracked reference quad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Homography, Point2, map_point
from .project import (
    EventMarker,
    FrameAnnotation,
    HitSpec,
    Mark,
    ObjectSpec,
    Project,
    frame_file_name,
    save_project,
)
from .stabilize import ReferenceTrack
from .warp import Image, RectifySpec, rectification_from_lane_quad, rectify_image


@dataclass(frozen=True)
class ObjectTruth:
    """Ground-truth world positions (meters) for one object."""

    object_id: str
    frames: tuple[int, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]

    def displacement(self) -> float:
        return self.y[-1] - self.y[0]


@dataclass(frozen=True)
class SyntheticScene:
    root: Path
    project_path: Path
    truth: dict[str, ObjectTruth]
    hit_frame: int | None
    extras: dict


def linear_gradient_image(width: int, height: int, ax: float = 0.7, by: float = 0.9,
                          c: float = 12.0) -> Image:
    """Image whose intensity is linear in (x, y): exact under bilinear sampling."""
    xs = np.arange(width, dtype=float)[None, :]
    ys = np.arange(height, dtype=float)[:, None]
    vals = ax * xs + by * ys + c
    if vals.min() < 0 or vals.max() > 255:
        raise ValueError("gradient exceeds the 8-bit range; reduce slopes")
    return Image.from_array(np.floor(vals + 0.5).astype(np.uint8))


def noise_image(width: int, height: int, seed: int = 0, channels: int = 1) -> Image:
    rng = np.random.RandomState(seed)
    pix = rng.randint(0, 256, size=(height, width, channels), dtype=np.uint8)
    return Image.from_array(pix)


def _write_frames(frame_dir: Path, images: list[Image]) -> None:
    frame_dir.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images, start=1):
        img.save_png(frame_dir / frame_file_name(i))


def _corner_quad(width: int, height: int) -> tuple[Point2, Point2, Point2, Point2]:
    return (
        Point2(0.0, 0.0),
        Point2(float(width - 1), 0.0),
        Point2(float(width - 1), float(height - 1)),
        Point2(0.0, float(height - 1)),
    )


# ---------------------------------------------------------------------------
# fronto-parallel surveillance scene


def make_fronto_scene(
    root: str | Path,
    n_frames: int = 200,
    fps: float = 25.0,
    with_hit: bool = True,
    with_events: bool = False,
) -> SyntheticScene:
    """Top-down view: world = pixels * 0.25 m, constant reference width.

    A vehicle drives straight down the road at constant speed; a pedestrian
    crosses laterally so the two meet exactly at the hit frame.
    """
    root = Path(root)
    width, height = 160, 200
    r = 0.25  # meters per pixel, exact in binary
    ref_w_m = 2.0
    ref_w_px = 8.0  # ref_w_m / r
    x0, y0 = 80.0, 180.0  # image position of world origin
    v_mps = 5.0

    hit_frame = min(150, max(2, n_frames * 3 // 4)) if with_hit else None
    meet = hit_frame if hit_frame is not None else max(2, n_frames // 2)

    def world_vehicle(i: int) -> tuple[float, float]:
        return 0.0, v_mps * (i - 1) / fps

    y_meet = world_vehicle(meet)[1]
    ped_x_start = 10.0
    ped_v = ped_x_start * fps / (meet - 1)

    def world_ped(i: int) -> tuple[float, float]:
        return ped_x_start - ped_v * (i - 1) / fps, y_meet

    def to_px(w: tuple[float, float]) -> Point2:
        return Point2(x0 + w[0] / r, y0 - w[1] / r)

    annotations = []
    for i in range(1, n_frames + 1):
        marks = (
            Mark("car", to_px(world_vehicle(i))),
            Mark("walker", to_px(world_ped(i))),
        )
        events = ()
        if with_events and hit_frame is not None and i == hit_frame - 10:
            events = (EventMarker("horn", "driver warning"),)
        annotations.append(
            FrameAnnotation(
                frame_index=i, marks=marks, ref_width_px=ref_w_px, events=events
            )
        )

    quad = _corner_quad(width, height)
    project = Project(
        id="fronto",
        mode="surveillance",
        fps=fps,
        frame_dir="frames",
        real_reference_width_m=ref_w_m,
        real_road_width_m=(width - 1) * r,
        rectify_src_quad=quad,
        rectify_dst_rect=quad,
        objects=(
            ObjectSpec("car", "vehicle", "longitudinal"),
            ObjectSpec("walker", "pedestrian", "lateral"),
        ),
        hit=HitSpec(hit_frame, "car") if hit_frame is not None else None,
    )

    base = linear_gradient_image(width, height, 0.5, 0.6, 10.0)
    _write_frames(root / "frames", [base] * n_frames)
    project_path = root / "project.json"
    save_project(project, annotations, project_path)

    frames = tuple(range(1, n_frames + 1))
    truth = {
        "car": ObjectTruth(
            "car",
            frames,
            tuple(world_vehicle(i)[0] for i in frames),
            tuple(world_vehicle(i)[1] for i in frames),
        ),
        "walker": ObjectTruth(
            "walker",
            frames,
            tuple(world_ped(i)[0] for i in frames),
            tuple(world_ped(i)[1] for i in frames),
        ),
    }
    return SyntheticScene(
        root=root,
        project_path=project_path,
        truth=truth,
        hit_frame=hit_frame,
        extras={"meters_per_px": r, "meet_frame": meet},
    )


# ---------------------------------------------------------------------------
# oblique pinhole surveillance scene


@dataclass(frozen=True)
class PinholeCamera:
    """Camera above the road looking down-road, tilted from nadir.

    World frame: X lateral (right), Y longitudinal (down-road), Z up; the
    road is the plane Z = 0.  The camera sits at (0, 0, height_m) with its
    optical axis tilted by tilt_deg away from straight down, toward +Y.
    """

    focal_px: float
    cx: float
    cy: float
    height_m: float
    tilt_deg: float

    def project(self, x_m: float, y_m: float) -> Point2:
        a = math.radians(self.tilt_deg)
        sin_a, cos_a = math.sin(a), math.cos(a)
        # camera-frame coordinates of the ground point
        xc = x_m
        yc = -cos_a * y_m + sin_a * self.height_m
        zc = sin_a * y_m + cos_a * self.height_m
        if zc <= 0:
            raise ValueError("point behind the camera")
        return Point2(
            self.focal_px * xc / zc + self.cx, self.focal_px * yc / zc + self.cy
        )


def make_oblique_scene(
    root: str | Path,
    tilt_deg: float = 45.0,
    n_frames: int = 60,
    fps: float = 25.0,
    vehicle_x: float = 0.6,
    stagger_frac: float = 0.10,
) -> SyntheticScene:
    """Oblique view of a straight road, constant-velocity vehicle.

    The marked lane quad's corners sit at staggered down-road positions
    (each edge off by half of stagger_frac times the quad length in opposite
    directions), so rectifying it to a rectangle does not remove all
    perspective.  The destination rectangle uses the operator's best length
    estimate — the mean of the two staggered edges — so the working space is
    isotropic on average; what remains is exactly the residual the
    geometric-progression ratio model is supposed to absorb.
    """
    root = Path(root)
    width, height = 640, 480
    cam = PinholeCamera(
        focal_px=700.0, cx=320.0, cy=240.0, height_m=10.0, tilt_deg=tilt_deg
    )
    road_w_m = 7.0
    ref_w_m = 1.8

    # down-road positions visible at a given image row
    a = math.radians(tilt_deg)
    sin_a, cos_a = math.sin(a), math.cos(a)

    def y_at_row(v: float) -> float:
        return (
            cam.height_m
            * (cam.focal_px * sin_a - (v - cam.cy) * cos_a)
            / (cam.focal_px * cos_a + (v - cam.cy) * sin_a)
        )

    y_near = y_at_row(height - 1 - 30)
    y_far = y_at_row(30.0)
    span = y_far - y_near

    # lane quad: the near edge's corners are staggered in opposite directions
    # (so the operator's mean-length estimate is still the nominal length L),
    # the far edge is exact
    q_near = y_near + 0.06 * span
    q_far = y_near + 0.94 * span
    length = q_far - q_near
    st = stagger_frac * length / 2.0
    xl, xr = -road_w_m / 2, road_w_m / 2
    world_quad = (
        (xl, q_near + st),
        (xr, q_near - st),
        (xr, q_far),
        (xl, q_far),
    )
    src_quad = tuple(cam.project(x, y) for x, y in world_quad)
    px_per_m = 240.0 / road_w_m
    rect_h = round(px_per_m * length)
    dst_rect = (
        Point2(40.0, 40.0 + rect_h),
        Point2(280.0, 40.0 + rect_h),
        Point2(280.0, 40.0),
        Point2(40.0, 40.0),
    )

    h = rectification_from_lane_quad(src_quad, dst_rect)

    y_start = y_near + 0.18 * span
    y_end = y_near + 0.82 * span

    def world_vehicle(i: int) -> tuple[float, float]:
        t = (i - 1) / (n_frames - 1)
        return vehicle_x, y_start + t * (y_end - y_start)

    annotations = []
    for i in range(1, n_frames + 1):
        x, y = world_vehicle(i)
        mark = cam.project(x, y)
        ref_px = None
        if (i - 1) % 10 == 0 or i == n_frames:  # measured every 10th frame
            left = map_point(h, cam.project(x - ref_w_m / 2, y))
            right = map_point(h, cam.project(x + ref_w_m / 2, y))
            ref_px = math.hypot(right.x - left.x, right.y - left.y)
        annotations.append(
            FrameAnnotation(
                frame_index=i, marks=(Mark("car", mark),), ref_width_px=ref_px
            )
        )

    project = Project(
        id=f"oblique{int(round(tilt_deg))}",
        mode="surveillance",
        fps=fps,
        frame_dir="frames",
        real_reference_width_m=ref_w_m,
        real_road_width_m=road_w_m,
        rectify_src_quad=src_quad,
        rectify_dst_rect=dst_rect,
        objects=(ObjectSpec("car", "vehicle", "longitudinal"),),
    )

    base = linear_gradient_image(width, height, 0.15, 0.2, 8.0)
    _write_frames(root / "frames", [base] * n_frames)
    project_path = root / "project.json"
    save_project(project, annotations, project_path)

    frames = tuple(range(1, n_frames + 1))
    truth = {
        "car": ObjectTruth(
            "car",
            frames,
            tuple(world_vehicle(i)[0] for i in frames),
            tuple(world_vehicle(i)[1] for i in frames),
        )
    }
    return SyntheticScene(
        root=root,
        project_path=project_path,
        truth=truth,
        hit_frame=None,
        extras={"camera": cam, "homography": h, "world_quad": world_quad},
    )


# ---------------------------------------------------------------------------
# recorder (dash-cam-like) scene


def make_recorder_scene(
    root: str | Path,
    n_frames: int = 40,
    fps: float = 30.0,
    zoom_span: float = 0.3,
    shift_px: tuple[float, float] = (10.0, -8.0),
    stationary_point: tuple[float, float] = (150.0, 120.0),
) -> SyntheticScene:
    """Zooming/translating sequence registered to the last frame.

    Every frame f shows the target-frame scene under a similarity transform
    p -> s_f * p + t_f with s_N = 1 and t_N = 0, so the final frame is the
    target fixpoint exactly.  A marked stationary pole stays put in
    target-frame coordinates after stabilization.
    """
    root = Path(root)
    width, height = 320, 240
    target = n_frames
    r = 0.05  # meters per working pixel
    ref_w_m = 2.0
    ref_w_px = ref_w_m / r  # working-space reference width, constant

    def transform(f: int) -> tuple[float, float, float]:
        t = (target - f) / (target - 1)
        return 1.0 - zoom_span * t, shift_px[0] * t, shift_px[1] * t

    def to_frame(f: int, p: Point2) -> Point2:
        s, tx, ty = transform(f)
        return Point2(s * p.x + tx, s * p.y + ty)

    quad = (
        Point2(60.0, 50.0),
        Point2(260.0, 50.0),
        Point2(260.0, 190.0),
        Point2(60.0, 190.0),
    )
    per_frame = {f: tuple(to_frame(f, p) for p in quad) for f in range(1, n_frames + 1)}
    track = ReferenceTrack(target_frame=target, target_points=quad, per_frame_points=per_frame)

    pole = Point2(*stationary_point)

    def target_vehicle(f: int) -> Point2:
        return Point2(150.0, 200.0 - 2.0 * (f - 1))

    def target_ped(f: int) -> Point2:
        return Point2(100.0 + 1.5 * (f - 1), 120.0)

    annotations = []
    for f in range(1, n_frames + 1):
        marks = (
            Mark("car", to_frame(f, target_vehicle(f))),
            Mark("walker", to_frame(f, target_ped(f))),
            Mark("pole", to_frame(f, pole)),
        )
        ref = ref_w_px if f % 5 == 1 or f == n_frames else None
        annotations.append(FrameAnnotation(frame_index=f, marks=marks, ref_width_px=ref))

    project = Project(
        id="recorder",
        mode="recorder",
        fps=fps,
        frame_dir="frames",
        real_reference_width_m=ref_w_m,
        real_road_width_m=(quad[1].x - quad[0].x) * r,
        objects=(
            ObjectSpec("car", "vehicle", "longitudinal"),
            ObjectSpec("walker", "pedestrian", "lateral"),
            ObjectSpec("pole", "pedestrian", "lateral"),
        ),
        reference_track=track,
    )

    base = noise_image(width, height, seed=7)
    images = []
    for f in range(1, n_frames + 1):
        s, tx, ty = transform(f)
        h = Homography(((s, 0.0, tx), (0.0, s, ty), (0.0, 0.0, 1.0)))
        spec = RectifySpec(h=h, out_width=width, out_height=height, fill=0)
        images.append(rectify_image(base, spec))
    _write_frames(root / "frames", images)
    project_path = root / "project.json"
    save_project(project, annotations, project_path)

    return SyntheticScene(
        root=root,
        project_path=project_path,
        truth={},  # pixel-space truth (pole position, transforms) lives in extras
        hit_frame=None,
        extras={
            "target_frame": target,
            "target_points": quad,
            "pole_target": pole,
            "transforms": {f: transform(f) for f in range(1, n_frames + 1)},
            "meters_per_px": r,
        },
    )
