"""Dash-cam registration onto a fixed target frame.

Each frame of a moving-camera sequence carries the same four physical corners
of a rigid reference object; the homography taking those corners onto the
target frame's corners converts the whole frame to the target frame's
coordinate system.  The target frame registers to the exact identity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateCorrespondence, MissingRegistration
from .geometry import (
    Homography,
    Point2,
    QuadCorrespondence,
    homography_from_correspondences,
    is_degenerate_quad,
    map_point,
)
from .scaling import PixelTrack, TrackSample
from .warp import Image, RectifySpec, rectify_image


@dataclass(frozen=True)
class ReferenceTrack:
    """The same four physical corners marked in every frame.

    target_frame names the frame whose coordinate system the sequence is
    registered into (normally the last one, where objects appear largest).
    """

    target_frame: int
    target_points: tuple[Point2, Point2, Point2, Point2]
    per_frame_points: dict[int, tuple[Point2, Point2, Point2, Point2]]

    def __post_init__(self):
        if is_degenerate_quad(self.target_points):
            raise DegenerateCorrespondence("target reference quad is degenerate")
        if self.target_frame not in self.per_frame_points:
            raise ValueError(
                f"target frame {self.target_frame} has no reference points"
            )
        if tuple(self.per_frame_points[self.target_frame]) != tuple(self.target_points):
            raise ValueError(
                "reference points at the target frame must equal target_points"
            )
        for f, pts in self.per_frame_points.items():
            if len(pts) != 4:
                raise ValueError(f"frame {f}: expected 4 reference points")


def register_to_target_frame(track: ReferenceTrack) -> dict[int, Homography]:
    """Per-frame homography taking that frame's reference quad onto the target quad.

    Frames whose points already equal the target points (the target frame
    itself included) register to the exact identity.
    """
    registrations: dict[int, Homography] = {}
    for frame in sorted(track.per_frame_points):
        pts = tuple(track.per_frame_points[frame])
        if pts == tuple(track.target_points):
            registrations[frame] = Homography.identity()
            continue
        try:
            corr = QuadCorrespondence(pts, tuple(track.target_points))
            registrations[frame] = homography_from_correspondences(corr)
        except DegenerateCorrespondence as e:
            raise DegenerateCorrespondence(f"frame {frame}: {e}") from e
    return registrations


def stabilize_track(
    pixel_track: PixelTrack, registrations: dict[int, Homography]
) -> PixelTrack:
    """Map every sample through its frame's registration homography."""
    samples = []
    for s in pixel_track.samples:
        h = registrations.get(s.frame_index)
        if h is None:
            raise MissingRegistration(s.frame_index)
        samples.append(TrackSample(s.frame_index, map_point(h, s.point)))
    return PixelTrack(pixel_track.object_id, tuple(samples))


def stabilize_sequence(
    frames: list[tuple[int, Image]],
    registrations: dict[int, Homography],
    out_width: int,
    out_height: int,
    fill: int = 0,
    workers: int = 1,
) -> list[tuple[int, Image]]:
    """Warp each (frame_index, image) into the common target-frame canvas."""
    out = []
    for frame, img in frames:
        h = registrations.get(frame)
        if h is None:
            raise MissingRegistration(frame)
        spec = RectifySpec(h=h, out_width=out_width, out_height=out_height, fill=fill)
        out.append((frame, rectify_image(img, spec, workers=workers)))
    return out


def ego_track(
    registrations: dict[int, Homography],
    frame_width: int,
    frame_height: int,
    object_id: str = "ego",
) -> PixelTrack:
    """Approximate camera-vehicle path: the frame center mapped per frame.

    A homography cannot recover true camera position; this traces where the
    principal point lands in target-frame coordinates, which roughly follows
    the recorder vehicle's motion.  Callers should flag the result approximate.
    """
    center = Point2(frame_width / 2.0, frame_height / 2.0)
    samples = [
        TrackSample(frame, map_point(h, center))
        for frame, h in sorted(registrations.items())
    ]
    return PixelTrack(object_id, tuple(samples))
