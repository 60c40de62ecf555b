"""Planar geometry of a pointing arm.

Image convention throughout: origin at the top-left pixel, x to the right,
y downward. Pixel ``(col, row)`` has its centre at integer coordinates.
Reported angles negate y so they read as ordinary counterclockwise angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dip.errors import DegeneratePose, DegenerateTriangle, EmptyInput, EmptyRegion

TWO_PI = 2.0 * math.pi
_POSE_EPS = 1e-9


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def rounded(self) -> tuple[int, int]:
        return int(round(self.x)), int(round(self.y))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box. Used closed: both bounds belong to the box."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted rect {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> Point2:
        return Point2((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, p: Point2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def dilate(self, d: float) -> "Rect":
        return Rect(self.x_min - d, self.y_min - d, self.x_max + d, self.y_max + d)


@dataclass(frozen=True)
class Triangle:
    apex: Point2
    base_top: Point2
    base_bottom: Point2

    @property
    def vertices(self) -> tuple[Point2, Point2, Point2]:
        return (self.apex, self.base_top, self.base_bottom)

    def signed_area(self) -> float:
        a, b, c = self.vertices
        return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))

    def edges(self) -> list[tuple[Point2, Point2]]:
        a, b, c = self.vertices
        return [(a, b), (b, c), (c, a)]


@dataclass(frozen=True)
class PointingRay:
    elbow: Point2
    wrist: Point2
    ext: Point2
    sf: float


def extend_pointing_segment(elbow: Point2, wrist: Point2, sf: float) -> Point2:
    """Push the elbow->wrist segment past the wrist by ``sf`` forearm lengths."""
    if sf < 0:
        raise ValueError("scale factor must be non-negative")
    if math.hypot(wrist.x - elbow.x, wrist.y - elbow.y) <= _POSE_EPS:
        raise DegeneratePose("elbow and wrist coincide")
    return Point2(wrist.x + sf * (wrist.x - elbow.x), wrist.y + sf * (wrist.y - elbow.y))


def pointing_ray(elbow: Point2, wrist: Point2, sf: float) -> PointingRay:
    return PointingRay(elbow, wrist, extend_pointing_segment(elbow, wrist, sf), sf)


def build_area_of_interest(wrist: Point2, ext: Point2, c: float, eps: float) -> Triangle:
    """Triangle from the offset wrist to ``ext`` shifted up and down by ``c``."""
    if c <= 0:
        raise ValueError("vertical constant must be positive")
    if eps < 0:
        raise ValueError("wrist offset must be non-negative")
    tri = Triangle(
        Point2(wrist.x - eps, wrist.y + eps),
        Point2(ext.x, ext.y - c),
        Point2(ext.x, ext.y + c),
    )
    if tri.signed_area() == 0.0:
        raise DegenerateTriangle(f"zero-area area of interest {tri}")
    return tri


def build_area_of_interest_perpendicular(
    wrist: Point2, ext: Point2, c: float, eps: float
) -> Triangle:
    """Variant whose base is offset along the normal of the pointing direction.

    Avoids the sliver triangles the vertical construction gives for
    near-vertical pointing. ``base_top`` is the vertex on the image-up side
    when pointing rightward.
    """
    if c <= 0:
        raise ValueError("base half-width must be positive")
    if eps < 0:
        raise ValueError("wrist offset must be non-negative")
    dx, dy = ext.x - wrist.x, ext.y - wrist.y
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise DegenerateTriangle("wrist and extension point coincide")
    nx, ny = dy / norm, -dx / norm
    tri = Triangle(
        Point2(wrist.x - eps, wrist.y + eps),
        Point2(ext.x + c * nx, ext.y + c * ny),
        Point2(ext.x - c * nx, ext.y - c * ny),
    )
    if tri.signed_area() == 0.0:
        raise DegenerateTriangle(f"zero-area area of interest {tri}")
    return tri


def _orient(ax, ay, bx, by, px, py):
    # works elementwise for floats and numpy arrays alike
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def point_in_triangle(p: Point2, t: Triangle) -> bool:
    """Boundary-inclusive containment test."""
    a, b, c = t.vertices
    d1 = _orient(a.x, a.y, b.x, b.y, p.x, p.y)
    d2 = _orient(b.x, b.y, c.x, c.y, p.x, p.y)
    d3 = _orient(c.x, c.y, a.x, a.y, p.x, p.y)
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


def triangle_mask(t: Triangle, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised :func:`point_in_triangle`; identical arithmetic, so identical answers."""
    a, b, c = t.vertices
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    d1 = _orient(a.x, a.y, b.x, b.y, xs, ys)
    d2 = _orient(b.x, b.y, c.x, c.y, xs, ys)
    d3 = _orient(c.x, c.y, a.x, a.y, xs, ys)
    has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(has_neg & has_pos)


def wrap_two_pi(a: float) -> float:
    """Map to [0, 2*pi); tiny negatives would otherwise round up to 2*pi."""
    r = a % TWO_PI
    return 0.0 if r >= TWO_PI else r


def pointing_angle(elbow: Point2, wrist: Point2) -> float:
    """Direction of elbow->wrist in [0, 2*pi), counterclockwise with y up."""
    dx = wrist.x - elbow.x
    dy = -(wrist.y - elbow.y)
    if math.hypot(dx, dy) <= _POSE_EPS:
        raise DegeneratePose("elbow and wrist coincide")
    return wrap_two_pi(math.atan2(dy, dx))


def angular_difference(a: float, b: float) -> float:
    """Smallest absolute circular distance between two angles, in [0, pi]."""
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def wrap_pi(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def circular_mean(angles: Sequence[float]) -> float:
    if len(angles) == 0:
        raise EmptyInput("no angles")
    s = math.fsum(math.sin(a) for a in angles)
    c = math.fsum(math.cos(a) for a in angles)
    return wrap_two_pi(math.atan2(s, c))


def unwrap_to_mean(angles: Sequence[float]) -> list[float]:
    """Place each angle on the branch nearest the circular mean."""
    m = circular_mean(angles)
    # shift by whole turns only, so angles already on the branch are untouched
    return [a - TWO_PI * round((a - m) / TWO_PI) for a in angles]


def branch_mean(angles: Sequence[float]) -> float:
    """Arithmetic mean of the angles unwrapped around their circular mean, in [0, 2pi).

    Agrees with the circular mean for tight clusters and returns a lone
    angle unchanged.
    """
    u = unwrap_to_mean(angles)
    return wrap_two_pi(math.fsum(u) / len(u))


def circular_variance(angles: Sequence[float]) -> float:
    """Sample variance (n - 1) of angles unwrapped around their circular mean.

    A single angle has variance 0.
    """
    if len(angles) == 0:
        raise EmptyInput("no angles")
    if len(angles) == 1:
        return 0.0
    u = unwrap_to_mean(angles)
    d = [a - u[0] for a in u]  # shift-invariant; identical angles give exactly 0
    n = len(d)
    s = math.fsum(d)
    return max(0.0, (math.fsum(x * x for x in d) - s * s / n) / (n - 1))


def segment_intersects_rect(p0: Point2, p1: Point2, r: Rect) -> bool:
    """Liang-Barsky clip of the closed segment against the closed box."""
    dx, dy = p1.x - p0.x, p1.y - p0.y
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, p0.x - r.x_min),
        (dx, r.x_max - p0.x),
        (-dy, p0.y - r.y_min),
        (dy, r.y_max - p0.y),
    ):
        if p == 0.0:
            if q < 0.0:
                return False
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    return t0 <= t1


def _clip_polygon(poly: list[tuple[float, float]], inside, intersect):
    out = []
    n = len(poly)
    for i in range(n):
        cur, nxt = poly[i], poly[(i + 1) % n]
        cin, nin = inside(cur), inside(nxt)
        if cin:
            out.append(cur)
            if not nin:
                out.append(intersect(cur, nxt))
        elif nin:
            out.append(intersect(cur, nxt))
    return out


def _axis_clipper(axis: int, bound: float, keep_below: bool):
    def inside(p):
        return p[axis] <= bound if keep_below else p[axis] >= bound

    def intersect(p, q):
        t = (bound - p[axis]) / (q[axis] - p[axis])
        pt = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
        pt[axis] = bound
        return (pt[0], pt[1])

    return inside, intersect


def clip_triangle_to_image(
    t: Triangle, width: int, height: int
) -> tuple[Rect, Callable[[Point2], bool]]:
    """Integer pixel box of the triangle's overlap with the frame.

    The triangle is clipped to the pixel footprint ``[-0.5, width-0.5] x
    [-0.5, height-0.5]`` and the box clamped to valid pixel indices, so it
    covers every pixel centre the predicate can accept, rounding included.
    Returns the box and a membership predicate; scans iterate the box and
    test each pixel.
    """
    if width <= 0 or height <= 0:
        raise ValueError("frame dimensions must be positive")
    poly = [(v.x, v.y) for v in t.vertices]
    for axis, bound, below in (
        (0, -0.5, False),
        (0, width - 0.5, True),
        (1, -0.5, False),
        (1, height - 0.5, True),
    ):
        poly = _clip_polygon(poly, *_axis_clipper(axis, bound, below))
        if not poly:
            raise EmptyRegion("area of interest lies outside the frame")
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    box = Rect(
        max(0, math.floor(min(xs))),
        max(0, math.floor(min(ys))),
        min(width - 1, math.ceil(max(xs))),
        min(height - 1, math.ceil(max(ys))),
    )
    return box, lambda p: point_in_triangle(p, t)


def pixel_mask(t: Triangle, box: Rect) -> np.ndarray:
    """Boolean membership of every pixel of an integer ``box`` (rows = y)."""
    xs = np.arange(int(box.x_min), int(box.x_max) + 1, dtype=np.float64)
    ys = np.arange(int(box.y_min), int(box.y_max) + 1, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    return triangle_mask(t, gx, gy)
