"""Pixel-space tracks to real-world trajectories.

The longitudinal meters-per-pixel ratio is modeled as a geometric progression
r(i) = r1 * q**(i-1) over frame index i, anchored by reference-width
measurements (a known real-world width W seen as h(i) pixels in frame i).
Longitudinal displacement integrates per-segment pixel deltas times the local
ratio; the scaled positions distribute that displacement along the q-weighted
cumulative pixel path so the endpoint lands exactly on the integrated total.
Lateral scaling uses a single constant ratio (road width).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DuplicateFrameIndex,
    EmptyTrajectory,
    NonPositiveRatio,
    TooFewPoints,
)
from .geometry import Point2

STATIONARY_EPS = 1e-9


@dataclass(frozen=True)
class RatioMeasurement:
    """A reference width observed in one frame: W meters spanning h(i) pixels."""

    frame_index: int
    ref_width_px: float
    ref_width_m: float

    def __post_init__(self):
        if self.frame_index < 1:
            raise ValueError(f"frame_index must be >= 1, got {self.frame_index}")
        if not (self.ref_width_px > 0):
            raise NonPositiveRatio(f"ref_width_px must be > 0, got {self.ref_width_px}")
        if not (self.ref_width_m > 0):
            raise NonPositiveRatio(f"ref_width_m must be > 0, got {self.ref_width_m}")

    @property
    def ratio(self) -> float:
        return self.ref_width_m / self.ref_width_px


def frame_ratio(m: RatioMeasurement) -> float:
    """Meters per pixel at the measurement's frame."""
    return m.ref_width_m / m.ref_width_px


@dataclass(frozen=True)
class RatioModel:
    """Geometric progression of meters-per-pixel ratios: r(i) = r1 * q**(i-1)."""

    r1: float
    q: float
    n_frames: int

    def __post_init__(self):
        if not (self.r1 > 0):
            raise NonPositiveRatio(f"r1 must be > 0, got {self.r1}")
        if not (self.q > 0):
            raise NonPositiveRatio(f"q must be > 0, got {self.q}")
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")

    def ratio_at(self, frame_index: int) -> float:
        return self.r1 * self.q ** (frame_index - 1)


def fit_ratio_gradient(
    measurements: list[RatioMeasurement], n_frames: int
) -> RatioModel:
    """Fit (r1, q) from reference measurements.

    One measurement pins a constant model (q = 1).  Two reduce to the exact
    two-point gradient q = (r_j / r_i) ** (1 / (j - i)).  Three or more use
    least squares on ln r against (frame - 1); the slope/intercept are computed
    about the centroid, which is exact (up to rounding) on noise-free
    geometric data.
    """
    if not measurements:
        raise ValueError("need at least one ratio measurement")
    seen: set[int] = set()
    for m in measurements:
        if m.frame_index in seen:
            raise DuplicateFrameIndex(f"duplicate measurement for frame {m.frame_index}")
        seen.add(m.frame_index)
        if not (1 <= m.frame_index <= n_frames):
            raise ValueError(
                f"measurement frame {m.frame_index} outside [1, {n_frames}]"
            )

    ms = sorted(measurements, key=lambda m: m.frame_index)
    if len(ms) == 1:
        return RatioModel(r1=ms[0].ratio, q=1.0, n_frames=n_frames)
    if len(ms) == 2:
        (a, b) = ms
        q = (b.ratio / a.ratio) ** (1.0 / (b.frame_index - a.frame_index))
        r1 = a.ratio / q ** (a.frame_index - 1)
        return RatioModel(r1=r1, q=q, n_frames=n_frames)

    xs = np.array([m.frame_index - 1 for m in ms], dtype=float)
    ys = np.array([math.log(m.ratio) for m in ms])
    xbar = xs.mean()
    ybar = ys.mean()
    dx = xs - xbar
    slope = float(dx @ (ys - ybar)) / float(dx @ dx)
    intercept = ybar - slope * xbar
    return RatioModel(r1=math.exp(intercept), q=math.exp(slope), n_frames=n_frames)


@dataclass(frozen=True)
class TrackSample:
    frame_index: int
    point: Point2


@dataclass(frozen=True)
class PixelTrack:
    """Per-object feature points in working-space pixels, ordered by frame."""

    object_id: str
    samples: tuple[TrackSample, ...]

    def __post_init__(self):
        if not self.samples:
            raise ValueError("track needs at least one sample")
        frames = [s.frame_index for s in self.samples]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError("frame indices must be strictly increasing")

    @staticmethod
    def from_pairs(object_id: str, pairs) -> "PixelTrack":
        return PixelTrack(
            object_id, tuple(TrackSample(int(f), p) for f, p in pairs)
        )

    def frames(self) -> list[int]:
        return [s.frame_index for s in self.samples]

    def xs(self) -> np.ndarray:
        return np.array([s.point.x for s in self.samples])

    def ys(self) -> np.ndarray:
        return np.array([s.point.y for s in self.samples])


def _segment_ratios(
    track: PixelTrack, model: RatioModel, overrides: list[RatioMeasurement]
) -> np.ndarray:
    by_frame = {m.frame_index: m.ratio for m in overrides}
    return np.array(
        [
            by_frame.get(s.frame_index, model.ratio_at(s.frame_index))
            for s in track.samples[:-1]
        ]
    )


def longitudinal_displacement(
    track: PixelTrack,
    model: RatioModel,
    overrides: list[RatioMeasurement] | None = None,
) -> float:
    """Total real-world longitudinal displacement in meters.

    Each consecutive pixel delta is converted at the ratio of its starting
    frame — the measured W/h(i) when an override exists there, else the model
    ratio.
    """
    if len(track.samples) < 2:
        raise TooFewPoints("displacement needs at least 2 samples")
    dy = np.diff(track.ys())
    ratios = _segment_ratios(track, model, overrides or [])
    return float(dy @ ratios)


def scale_longitudinal(
    track: PixelTrack, model: RatioModel, d: float
) -> list[float]:
    """Per-sample longitudinal positions (meters), Y_1 = 0 and Y_N = d exactly.

    The q-weighted cumulative pixel displacement S_i shapes the path; the
    single factor d / S_N converts it to meters.  A stationary track
    (S_N = 0) maps to all zeros.
    """
    if not math.isfinite(d):
        raise ValueError("d must be finite")
    ys = track.ys()
    if len(ys) == 1:
        return [0.0]
    weights = np.array(
        [model.q ** (s.frame_index - 1) for s in track.samples[:-1]]
    )
    s = np.concatenate([[0.0], np.cumsum(np.diff(ys) * weights)])
    s_n = s[-1]
    if s_n == 0.0:
        return [0.0] * len(ys)
    return [float(d * (si / s_n)) for si in s]


def lateral_ratio(road_width_m: float, road_width_px: float) -> float:
    """Constant meters-per-pixel ratio across the road."""
    if not (road_width_m > 0 and road_width_px > 0):
        raise NonPositiveRatio(
            f"road widths must be > 0, got {road_width_m} m / {road_width_px} px"
        )
    return road_width_m / road_width_px


def scale_lateral(track: PixelTrack, r_lat: float) -> list[float]:
    """Per-sample lateral positions (meters) relative to the first sample."""
    if not (r_lat > 0):
        raise NonPositiveRatio(f"r_lat must be > 0, got {r_lat}")
    xs = track.xs()
    return [float(r_lat * (x - xs[0])) for x in xs]


@dataclass(frozen=True)
class Trajectory:
    """World-coordinate point series for one object.

    Parallel arrays over samples: frame index, time since the object's first
    sample, lateral X and longitudinal Y in meters, speed in m/s and heading
    in radians (0 = straight longitudinal, +pi/2 = pure lateral right).
    """

    object_id: str
    frames: tuple[int, ...]
    times: tuple[float, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]
    speeds: tuple[float, ...] = field(default=())
    headings: tuple[float, ...] = field(default=())
    approximate: bool = False

    def __post_init__(self):
        n = len(self.frames)
        if not (len(self.times) == len(self.x) == len(self.y) == n):
            raise ValueError("frames/times/x/y must have equal length")
        if self.speeds and len(self.speeds) != n:
            raise ValueError("speeds length mismatch")
        if self.headings and len(self.headings) != n:
            raise ValueError("headings length mismatch")

    def __len__(self) -> int:
        return len(self.frames)


def center_on_hit_point(traj: Trajectory, hit_frame: int) -> Trajectory:
    """Translate so the sample at (or nearest to) hit_frame is exactly (0, 0).

    Nearest is by frame distance, ties toward the earlier frame.  Speeds and
    headings are translation-invariant and carried through unchanged.
    """
    if len(traj) == 0:
        raise EmptyTrajectory(f"trajectory {traj.object_id!r} has no points")
    best = min(range(len(traj)), key=lambda i: (abs(traj.frames[i] - hit_frame), traj.frames[i]))
    ox, oy = traj.x[best], traj.y[best]
    return replace(
        traj,
        x=tuple(v - ox for v in traj.x),
        y=tuple(v - oy for v in traj.y),
    )


def estimate_velocity(
    traj: Trajectory,
    fps: float,
    scheme: str = "central",
    smooth_window: int | None = None,
) -> list[float]:
    """Per-sample speed in m/s from finite differences of (X, Y) over time.

    ``central`` uses the centered stencil on interior points and one-sided
    differences at the endpoints; ``forward`` uses forward differences with a
    backward difference at the last point (which makes speed * dt equal the
    segment length exactly).  Optional centered moving average of odd width
    smooths the speed series; the window shrinks symmetrically at the ends.
    """
    if not (fps > 0):
        raise ValueError(f"fps must be > 0, got {fps}")
    if len(traj) < 2:
        raise TooFewPoints("velocity needs at least 2 points")
    if scheme not in ("central", "forward"):
        raise ValueError(f"unknown scheme {scheme!r}")
    t = np.array(traj.times)
    p = np.column_stack([traj.x, traj.y])
    n = len(traj)
    v = np.zeros((n, 2))
    if scheme == "central":
        v[0] = (p[1] - p[0]) / (t[1] - t[0])
        v[-1] = (p[-1] - p[-2]) / (t[-1] - t[-2])
        for i in range(1, n - 1):
            v[i] = (p[i + 1] - p[i - 1]) / (t[i + 1] - t[i - 1])
    else:
        for i in range(n - 1):
            v[i] = (p[i + 1] - p[i]) / (t[i + 1] - t[i])
        v[-1] = (p[-1] - p[-2]) / (t[-1] - t[-2])
    speeds = np.hypot(v[:, 0], v[:, 1])
    if smooth_window is not None:
        if smooth_window < 1 or smooth_window % 2 == 0:
            raise ValueError(f"smooth_window must be odd and >= 1, got {smooth_window}")
        half = smooth_window // 2
        smoothed = np.empty(n)
        for i in range(n):
            k = min(half, i, n - 1 - i)
            smoothed[i] = speeds[i - k : i + k + 1].mean()
        speeds = smoothed
    return [float(s) for s in speeds]


def estimate_heading(traj: Trajectory) -> list[float]:
    """Per-sample heading from finite-difference displacement direction.

    atan2(dX, dY) of the central-difference displacement (one-sided at the
    ends).  Displacements under 1e-9 m carry the previous heading forward; a
    stationary start defaults to 0.
    """
    if len(traj) < 2:
        raise TooFewPoints("heading needs at least 2 points")
    n = len(traj)
    p = np.column_stack([traj.x, traj.y])
    headings: list[float] = []
    prev = 0.0
    for i in range(n):
        if i == 0:
            d = p[1] - p[0]
        elif i == n - 1:
            d = p[-1] - p[-2]
        else:
            d = p[i + 1] - p[i - 1]
        if math.hypot(d[0], d[1]) < STATIONARY_EPS:
            headings.append(prev)
        else:
            prev = math.atan2(d[0], d[1])
            headings.append(prev)
    return headings
