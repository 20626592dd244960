"""Image rectification by inverse mapping with bilinear resampling.

Every target pixel is pulled from its source position under the inverse
homography: positions within half a pixel outside the source bounds clamp to
the edge, anything farther (or on the horizon) takes the fill value.
Intensities are 8-bit, rounded half away from zero.  The per-pixel math is
independent of any row partitioning, so output is bit-identical for any
worker count.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image as PILImage

from .errors import IoError, WindingMismatch
from .geometry import (
    Homography,
    Point2,
    QuadCorrespondence,
    homography_from_correspondences,
    invert,
    map_points,
    quad_signed_area,
)

OUT_OF_BOUNDS = None
EDGE_CLAMP = 0.5


@dataclass(frozen=True)
class Image:
    """8-bit image, grayscale (1 channel) or RGB (3 channels)."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray  # shape (height, width, channels), uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if self.pixels.shape != (self.height, self.width, self.channels):
            raise ValueError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x{self.channels}"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {self.pixels.dtype}")

    @staticmethod
    def from_array(a: np.ndarray) -> "Image":
        a = np.asarray(a)
        if a.ndim == 2:
            a = a[:, :, None]
        a = np.ascontiguousarray(a.astype(np.uint8, copy=False))
        h, w, c = a.shape
        return Image(width=w, height=h, channels=c, pixels=a)

    @staticmethod
    def load(path: str | Path) -> "Image":
        """Read a PNG or JPEG file."""
        try:
            with PILImage.open(path) as im:
                if im.mode in ("L",):
                    arr = np.asarray(im)
                else:
                    arr = np.asarray(im.convert("RGB"))
        except FileNotFoundError as e:
            raise IoError(f"cannot read image {path}: {e}") from e
        except OSError as e:
            raise IoError(f"cannot decode image {path}: {e}") from e
        return Image.from_array(arr)

    def save_png(self, path: str | Path) -> None:
        try:
            arr = self.pixels[:, :, 0] if self.channels == 1 else self.pixels
            PILImage.fromarray(arr).save(path, format="PNG")
        except OSError as e:
            raise IoError(f"cannot write image {path}: {e}") from e

    def png_bytes(self) -> bytes:
        """PNG encoding of the image as in-memory bytes."""
        buf = io.BytesIO()
        arr = self.pixels[:, :, 0] if self.channels == 1 else self.pixels
        PILImage.fromarray(arr).save(buf, format="PNG")
        return buf.getvalue()


@dataclass(frozen=True)
class RectifySpec:
    """Target view: source-to-target homography, output canvas, fill value."""

    h: Homography
    out_width: int
    out_height: int
    fill: int = 0

    def __post_init__(self):
        if self.out_width < 1 or self.out_height < 1:
            raise ValueError("output dimensions must be >= 1")
        if not (0 <= self.fill <= 255):
            raise ValueError(f"fill must be in [0, 255], got {self.fill}")


def bilinear_sample(img: Image, x: float, y: float):
    """Bilinear interpolation of the four neighbors at (x, y).

    Returns a tuple of per-channel float values, or None when the position
    lies outside [0, width-1] x [0, height-1].
    """
    if not (0.0 <= x <= img.width - 1 and 0.0 <= y <= img.height - 1):
        return OUT_OF_BOUNDS
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    x1 = min(x0 + 1, img.width - 1)
    y1 = min(y0 + 1, img.height - 1)
    fx = x - x0
    fy = y - y0
    p = img.pixels.astype(np.float64)
    val = (
        (1 - fx) * (1 - fy) * p[y0, x0]
        + fx * (1 - fy) * p[y0, x1]
        + (1 - fx) * fy * p[y1, x0]
        + fx * fy * p[y1, x1]
    )
    return tuple(float(v) for v in val)


def _quantize(values: np.ndarray) -> np.ndarray:
    # round half away from zero; values are non-negative here
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def _render_rows(
    img: Image, inv: Homography, spec: RectifySpec, y_start: int, y_stop: int
) -> np.ndarray:
    h, w = img.height, img.width
    us, vs = np.meshgrid(
        np.arange(spec.out_width, dtype=float),
        np.arange(y_start, y_stop, dtype=float),
    )
    sx, sy, valid = map_points(inv, us, vs)
    # clamp the half-pixel border onto the edge, reject farther out
    in_range = (
        (sx >= -EDGE_CLAMP)
        & (sx <= w - 1 + EDGE_CLAMP)
        & (sy >= -EDGE_CLAMP)
        & (sy <= h - 1 + EDGE_CLAMP)
        & valid
    )
    sx = np.clip(sx, 0.0, w - 1.0)
    sy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[:, :, None]
    fy = (sy - y0)[:, :, None]
    p = img.pixels.astype(np.float64)
    val = (
        (1 - fx) * (1 - fy) * p[y0, x0]
        + fx * (1 - fy) * p[y0, x1]
        + (1 - fx) * fy * p[y1, x0]
        + fx * fy * p[y1, x1]
    )
    out = _quantize(val)
    out[~in_range] = spec.fill
    return out


def rectify_image(img: Image, spec: RectifySpec, workers: int = 1) -> Image:
    """Warp img into the target view of spec by inverse mapping.

    ``workers`` only partitions rows across threads; the result is
    bit-identical for any value.
    """
    inv = invert(spec.h)
    out = np.empty((spec.out_height, spec.out_width, img.channels), dtype=np.uint8)
    if workers <= 1:
        out[:] = _render_rows(img, inv, spec, 0, spec.out_height)
    else:
        chunk = max(1, -(-spec.out_height // workers))
        bounds = [
            (start, min(start + chunk, spec.out_height))
            for start in range(0, spec.out_height, chunk)
        ]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                lambda se: (se[0], se[1], _render_rows(img, inv, spec, se[0], se[1])),
                bounds,
            )
            for start, stop, block in results:
                out[start:stop] = block
    return Image(width=spec.out_width, height=spec.out_height, channels=img.channels, pixels=out)


def rectification_from_lane_quad(
    lane_quad: Sequence[Point2], target_rect: Sequence[Point2]
) -> Homography:
    """Homography taking the marked lane quad onto an axis-aligned rectangle.

    Rectified lane edges come out parallel to the image edges.  Source and
    target must share winding order (signed-area sign test).
    """
    corr = QuadCorrespondence(tuple(lane_quad), tuple(target_rect))
    src_area = quad_signed_area(lane_quad)
    dst_area = quad_signed_area(target_rect)
    if src_area * dst_area < 0:
        raise WindingMismatch(
            "lane quad and target rectangle have opposite orientation"
        )
    return homography_from_correspondences(corr)


def canvas_for_quad(quad: Sequence[Point2]) -> tuple[int, int]:
    """Smallest (width, height) whose pixel-center grid covers the quad."""
    xs = [p.x for p in quad]
    ys = [p.y for p in quad]
    return int(math.ceil(max(xs))) + 1, int(math.ceil(max(ys))) + 1
