"""Pick the object of interest inside an area-of-interest triangle.

Two rules: the strongest corner keypoint in the triangle, or the largest
edge contour whose centroid falls in the triangle. Both work on a crop
around the triangle's clipped bounding box and give exactly the answer a
full-frame computation followed by filtering would.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from dip.geometry import Point2, Rect, Triangle, clip_triangle_to_image, point_in_triangle, triangle_mask
from dip.imaging.buffer import ImageBuffer
from dip.imaging.canny import canny_plane
from dip.imaging.contours import Contour, extract_contours
from dip.imaging.corners import keypoints_from_response, response_margin, response_plane
from dip.imaging.filters import as_gray


CONTOUR_SLACK = 8  # extra crop margin so nearby contours rarely force a full-frame pass


class Method(str, Enum):
    KEYPOINT = "keypoint"
    CONTOUR = "contour"
    CONTOUR_THEN_KEYPOINT = "contour_then_keypoint"


@dataclass(frozen=True)
class DetectorConfig:
    method: Method = Method.CONTOUR
    canny_low: float = 40.0
    canny_high: float = 100.0
    canny_sigma: float = 1.4
    min_area: int = 20
    harris_k: float = 0.04
    harris_sigma: float = 1.5
    keypoint_threshold: float = 5e-6
    nms_radius: int = 5
    seed_box: int = 40

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not 0 < self.canny_low < self.canny_high:
            raise ValueError("need 0 < canny_low < canny_high")
        if self.canny_sigma <= 0 or self.harris_sigma <= 0:
            raise ValueError("sigmas must be positive")
        if self.min_area < 1 or self.seed_box < 1 or self.nms_radius < 0:
            raise ValueError("min_area, seed_box must be >= 1 and nms_radius >= 0")
        if self.keypoint_threshold <= 0:
            raise ValueError("keypoint_threshold must be positive")


@dataclass(frozen=True)
class Detection:
    point: Point2
    bbox: Rect
    method: Method
    score: float


def _crop(box: Rect, margin: int, width: int, height: int) -> tuple[int, int, int, int]:
    return (
        max(0, int(box.x_min) - margin),
        max(0, int(box.y_min) - margin),
        min(width - 1, int(box.x_max) + margin),
        min(height - 1, int(box.y_max) + margin),
    )


def _crop_triangle_mask(aoi: Triangle, x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    gx, gy = np.meshgrid(
        np.arange(x0, x1 + 1, dtype=np.float64), np.arange(y0, y1 + 1, dtype=np.float64)
    )
    return triangle_mask(aoi, gx, gy)


def seed_box(p: Point2, side: int, width: int, height: int) -> Rect:
    """Square of the given side centred on ``p``, clamped to the frame."""
    half = side / 2.0
    return Rect(
        max(0.0, p.x - half),
        max(0.0, p.y - half),
        min(float(width - 1), p.x + half),
        min(float(height - 1), p.y + half),
    )


def locate_by_keypoint(gray: ImageBuffer, aoi: Triangle, cfg: DetectorConfig = DetectorConfig()) -> Detection | None:
    box, _ = clip_triangle_to_image(aoi, gray.width, gray.height)
    margin = response_margin(cfg.harris_sigma, cfg.nms_radius)
    x0, y0, x1, y1 = _crop(box, margin, gray.width, gray.height)
    plane = gray.data[y0 : y1 + 1, x0 : x1 + 1].astype(np.float64)
    resp = response_plane(plane, cfg.harris_k, cfg.harris_sigma)
    mask = _crop_triangle_mask(aoi, x0, y0, x1, y1)
    kps = keypoints_from_response(resp, cfg.keypoint_threshold, cfg.nms_radius, mask, offset=(x0, y0))
    if not kps:
        return None
    best = kps[0]
    p = best.location
    return Detection(p, seed_box(p, cfg.seed_box, gray.width, gray.height), Method.KEYPOINT, best.strength)


def _contours_exact(gray: ImageBuffer, box: Rect, cfg: DetectorConfig) -> list[Contour]:
    """Edge contours equal to the full-frame ones for every component near ``box``.

    Canny runs on a crop. Pixels closer than ``band`` to a crop side that is
    not a frame side may differ from the full-frame result, so a component
    reaching that band could be truncated; if any does, redo the full frame.
    """
    W, H = gray.width, gray.height
    band = int(math.ceil(3.0 * cfg.canny_sigma)) + 3
    x0, y0, x1, y1 = _crop(box, band + CONTOUR_SLACK, W, H)
    plane = gray.data[y0 : y1 + 1, x0 : x1 + 1].astype(np.float64)
    edges = canny_plane(plane, cfg.canny_low, cfg.canny_high, cfg.canny_sigma)
    h, w = edges.shape
    risky = np.zeros_like(edges)
    if x0 > 0:
        risky[:, :band] = True
    if y0 > 0:
        risky[:band, :] = True
    if x1 < W - 1:
        risky[:, w - band :] = True
    if y1 < H - 1:
        risky[h - band :, :] = True
    if (edges & risky).any():
        full = canny_plane(gray.data.astype(np.float64), cfg.canny_low, cfg.canny_high, cfg.canny_sigma)
        return extract_contours(full, cfg.min_area)
    return [c.offset(x0, y0) for c in extract_contours(edges, cfg.min_area)]


def locate_by_contour(gray: ImageBuffer, aoi: Triangle, cfg: DetectorConfig = DetectorConfig()) -> Detection | None:
    box, _ = clip_triangle_to_image(aoi, gray.width, gray.height)
    for c in _contours_exact(gray, box, cfg):
        if point_in_triangle(c.centroid, aoi):
            return Detection(c.centroid, c.bbox, Method.CONTOUR, float(c.area))
    return None


def locate_object(
    frame: ImageBuffer,
    aoi: Triangle,
    method: Method | str | None = None,
    cfg: DetectorConfig = DetectorConfig(),
) -> Detection | None:
    """Dispatch to a localisation rule; raises EmptyRegion if the AOI is off-frame."""
    method = Method(method) if method is not None else cfg.method
    gray = as_gray(frame)
    if method is Method.KEYPOINT:
        return locate_by_keypoint(gray, aoi, cfg)
    if method is Method.CONTOUR:
        return locate_by_contour(gray, aoi, cfg)
    return locate_by_contour(gray, aoi, cfg) or locate_by_keypoint(gray, aoi, cfg)
