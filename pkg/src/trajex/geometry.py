"""Planar affine and projective transforms.

Affine maps are stored as 2x3 matrices applied to augmented coordinates;
homographies as 3x3 matrices normalized so m33 = 1 (or, when m33 = 0, so the
largest-magnitude entry is 1).  Construction from point correspondences is an
exact solve — 4 points determine a homography, 3 an affine map — done by
Gaussian elimination with partial pivoting.

All tolerances below sit far under pixel quantization noise:
triangle-area degeneracy 1e-9 px^2, pivot/determinant 1e-12, horizon |Z| 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateCorrespondence,
    PointAtInfinity,
    SingularSystem,
    WindingMismatch,
)

AREA_EPS = 1e-9
PIVOT_EPS = 1e-12
HORIZON_EPS = 1e-9


@dataclass(frozen=True)
class Point2:
    """A 2D point in pixels or meters depending on context."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def triangle_area(a: Point2, b: Point2, c: Point2) -> float:
    """Unsigned area of the triangle spanned by three points."""
    return abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / 2.0


def _has_collinear_triple(pts: Sequence[Point2]) -> bool:
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if triangle_area(pts[i], pts[j], pts[k]) < AREA_EPS:
                    return True
    return False


def is_degenerate_quad(pts: Sequence[Point2]) -> bool:
    """True iff any three of the four points span a triangle of area < 1e-9 px^2."""
    if len(pts) != 4:
        raise ValueError(f"expected 4 points, got {len(pts)}")
    return _has_collinear_triple(pts)


def quad_signed_area(pts: Sequence[Point2]) -> float:
    """Shoelace signed area; sign encodes winding order."""
    total = 0.0
    for i in range(len(pts)):
        a, b = pts[i], pts[(i + 1) % len(pts)]
        total += a.x * b.y - b.x * a.y
    return total / 2.0


@dataclass(frozen=True)
class QuadCorrespondence:
    """Four source points paired with four target points, no collinear triples."""

    src: tuple[Point2, Point2, Point2, Point2]
    dst: tuple[Point2, Point2, Point2, Point2]

    def __post_init__(self):
        if is_degenerate_quad(self.src):
            raise DegenerateCorrespondence("collinear triple in src quad")
        if is_degenerate_quad(self.dst):
            raise DegenerateCorrespondence("collinear triple in dst quad")


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; raises on tiny pivots."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        pivot = a[pivot_row, col]
        if abs(pivot) < PIVOT_EPS:
            raise SingularSystem(f"pivot {pivot!r} below {PIVOT_EPS} at column {col}")
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            if factor != 0.0:
                a[row, col:] -= factor * a[col, col:]
                b[row] -= factor * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


@dataclass(frozen=True)
class AffineMap:
    """2x3 matrix mapping (x, y) -> (m11 x + m12 y + m13, m21 x + m22 y + m23)."""

    m: tuple[tuple[float, float, float], tuple[float, float, float]]

    def __post_init__(self):
        flat = [v for row in self.m for v in row]
        if len(self.m) != 2 or any(len(row) != 3 for row in self.m):
            raise ValueError("affine matrix must be 2x3")
        if not all(math.isfinite(v) for v in flat):
            raise ValueError("non-finite affine matrix entry")
        det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
        if det == 0.0:
            raise SingularSystem("affine linear part is singular")

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))

    def to_json(self) -> list[float]:
        """Row-major 6-element array."""
        return [v for row in self.m for v in row]

    @staticmethod
    def from_json(values: Sequence[float]) -> "AffineMap":
        if len(values) != 6:
            raise ValueError("affine JSON form must have 6 entries")
        v = [float(x) for x in values]
        return AffineMap(((v[0], v[1], v[2]), (v[3], v[4], v[5])))


def affine_from_correspondences(
    src: Sequence[Point2], dst: Sequence[Point2]
) -> AffineMap:
    """Exact affine map taking three source points to three target points."""
    if len(src) != 3 or len(dst) != 3:
        raise ValueError("affine construction needs exactly 3 correspondences")
    if triangle_area(src[0], src[1], src[2]) < AREA_EPS:
        raise DegenerateCorrespondence("src points collinear")
    a = np.array([[p.x, p.y, 1.0] for p in src])
    row1 = _solve(a, np.array([p.x for p in dst]))
    row2 = _solve(a, np.array([p.y for p in dst]))
    return AffineMap(
        (tuple(float(v) for v in row1), tuple(float(v) for v in row2))
    )


def apply_affine(a: AffineMap, p: Point2) -> Point2:
    (m11, m12, m13), (m21, m22, m23) = a.m
    return Point2(m11 * p.x + m12 * p.y + m13, m21 * p.x + m22 * p.y + m23)


def _normalized(m: np.ndarray) -> tuple[tuple[float, ...], ...]:
    if m[2, 2] != 0.0:
        m = m / m[2, 2]
    else:
        flat_idx = int(np.argmax(np.abs(m)))
        m = m / m.flat[flat_idx]
    return tuple(tuple(float(v) for v in row) for row in m)


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, stored normalized (m33 = 1 when nonzero)."""

    m: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if len(self.m) != 3 or any(len(row) != 3 for row in self.m):
            raise ValueError("homography matrix must be 3x3")
        flat = [v for row in self.m for v in row]
        if not all(math.isfinite(v) for v in flat):
            raise ValueError("non-finite homography entry")
        if abs(self.det()) < PIVOT_EPS:
            raise SingularSystem("homography determinant below 1e-12")

    @staticmethod
    def from_matrix(m: np.ndarray | Sequence[Sequence[float]]) -> "Homography":
        arr = np.array(m, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError(f"expected 3x3 matrix, got {arr.shape}")
        return Homography(_normalized(arr))

    @staticmethod
    def identity() -> "Homography":
        return Homography(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))

    def as_array(self) -> np.ndarray:
        return np.array(self.m, dtype=float)

    def det(self) -> float:
        ((a, b, c), (d, e, f), (g, h, i)) = self.m
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def is_identity(self) -> bool:
        return self.m == ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def is_affine(self) -> bool:
        return self.m[2][0] == 0.0 and self.m[2][1] == 0.0

    def to_json(self) -> list[float]:
        """Row-major 9-element array."""
        return [v for row in self.m for v in row]

    @staticmethod
    def from_json(values: Sequence[float]) -> "Homography":
        if len(values) != 9:
            raise ValueError("homography JSON form must have 9 entries")
        arr = np.array([float(v) for v in values]).reshape(3, 3)
        return Homography.from_matrix(arr)


def homography_from_correspondences(q: QuadCorrespondence) -> Homography:
    """Exact homography through four correspondences (m33 fixed at 1).

    Each pair contributes two rows of the 8x8 system in m11..m32:
        x' = (m11 x + m12 y + m13) / (m31 x + m32 y + 1)
        y' = (m21 x + m22 y + m23) / (m31 x + m32 y + 1)
    """
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for k in range(4):
        s, d = q.src[k], q.dst[k]
        a[2 * k] = [s.x, s.y, 1.0, 0.0, 0.0, 0.0, -d.x * s.x, -d.x * s.y]
        b[2 * k] = d.x
        a[2 * k + 1] = [0.0, 0.0, 0.0, s.x, s.y, 1.0, -d.y * s.x, -d.y * s.y]
        b[2 * k + 1] = d.y
    sol = _solve(a, b)
    m = np.array(
        [
            [sol[0], sol[1], sol[2]],
            [sol[3], sol[4], sol[5]],
            [sol[6], sol[7], 1.0],
        ]
    )
    return Homography.from_matrix(m)


def map_point(h: Homography, p: Point2) -> Point2:
    ((m11, m12, m13), (m21, m22, m23), (m31, m32, m33)) = h.m
    z = m31 * p.x + m32 * p.y + m33
    if abs(z) < HORIZON_EPS:
        raise PointAtInfinity(f"point ({p.x}, {p.y}) maps to the horizon (Z={z!r})")
    x = m11 * p.x + m12 * p.y + m13
    y = m21 * p.x + m22 * p.y + m23
    return Point2(x / z, y / z)


def map_points(h: Homography, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized map_point; returns (x', y', valid) with horizon points masked out."""
    ((m11, m12, m13), (m21, m22, m23), (m31, m32, m33)) = h.m
    z = m31 * xs + m32 * ys + m33
    valid = np.abs(z) >= HORIZON_EPS
    zsafe = np.where(valid, z, 1.0)
    x = (m11 * xs + m12 * ys + m13) / zsafe
    y = (m21 * xs + m22 * ys + m23) / zsafe
    return x, y, valid


def invert(h: Homography) -> Homography:
    """Inverse via the closed-form adjugate, renormalized."""
    d = h.det()
    if abs(d) < PIVOT_EPS:
        raise SingularSystem("determinant below 1e-12")
    ((a, b, c), (e, f, g), (i, j, k)) = h.m
    adj = np.array(
        [
            [f * k - g * j, c * j - b * k, b * g - c * f],
            [g * i - e * k, a * k - c * i, c * e - a * g],
            [e * j - f * i, b * i - a * j, a * f - b * e],
        ]
    )
    return Homography.from_matrix(adj)


def compose(h2: Homography, h1: Homography) -> Homography:
    """Map equivalent to applying h1 first, then h2."""
    return Homography.from_matrix(h2.as_array() @ h1.as_array())
