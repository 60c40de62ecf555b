"""Harris corner response and strongest-first keypoint extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from dip.geometry import Point2
from dip.imaging.buffer import ImageBuffer
from dip.imaging.filters import blur_plane, sobel_planes


@dataclass(frozen=True)
class Keypoint:
    x: int
    y: int
    strength: float

    @property
    def location(self) -> Point2:
        return Point2(float(self.x), float(self.y))


def keypoint_order(kp: Keypoint):
    return (-kp.strength, kp.y, kp.x)


def response_margin(window_sigma: float, nms_radius: int) -> int:
    """Pixels of context a crop needs for exact interior responses and maxima."""
    return 1 + int(math.ceil(3.0 * window_sigma)) + int(nms_radius) + 1


def response_plane(plane: np.ndarray, k: float = 0.04, window_sigma: float = 1.5) -> np.ndarray:
    """det(M) - k*trace(M)^2 on a float plane of 8-bit intensities.

    Intensities are scaled to [0, 1] and Sobel output divided by 8, so the
    derivatives are per-pixel slopes.
    """
    gx, gy = sobel_planes(np.asarray(plane, dtype=np.float64) / 255.0)
    gx /= 8.0
    gy /= 8.0
    sxx = blur_plane(gx * gx, window_sigma)
    syy = blur_plane(gy * gy, window_sigma)
    sxy = blur_plane(gx * gy, window_sigma)
    trace = sxx + syy
    return sxx * syy - sxy * sxy - k * trace * trace


def corner_response(gray: ImageBuffer, k: float = 0.04, window_sigma: float = 1.5) -> np.ndarray:
    if gray.channels != 1:
        raise ValueError("corner_response needs a one-channel image")
    return response_plane(gray.data.astype(np.float64), k, window_sigma)


def local_maxima(response: np.ndarray, threshold: float, nms_radius: int) -> list[tuple[int, int]]:
    """(x, y) of pixels above threshold that beat every neighbour within the radius.

    "Beat" is the total order (strength desc, y asc, x asc), so plateaus
    yield exactly one survivor and the answer never depends on anything
    outside the neighbourhood.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    r = int(nms_radius)
    size = 2 * r + 1
    peak = ndimage.maximum_filter(response, size=size, mode="constant", cval=-np.inf)
    ys, xs = np.nonzero((response == peak) & (response > threshold))
    h, w = response.shape
    out = []
    for y, x in zip(ys.tolist(), xs.tolist()):
        v = response[y, x]
        y0, x0 = max(0, y - r), max(0, x - r)
        win = response[y0 : y + r + 1, x0 : x + r + 1]
        ties = np.argwhere(win == v)
        if len(ties) > 1:
            ty, tx = ties[0]  # argwhere is row-major, so this is the (y, x) minimum
            if (ty + y0, tx + x0) != (y, x):
                continue
        out.append((x, y))
    return out


Mask = np.ndarray | Callable[[Point2], bool] | None


def _mask_ok(mask: Mask, x: int, y: int) -> bool:
    if mask is None:
        return True
    if callable(mask):
        return bool(mask(Point2(float(x), float(y))))
    return bool(mask[y, x])


def keypoints_from_response(
    response: np.ndarray,
    threshold: float,
    nms_radius: int,
    mask: Mask = None,
    offset: tuple[int, int] = (0, 0),
) -> list[Keypoint]:
    ox, oy = offset
    kps = [
        Keypoint(x + ox, y + oy, float(response[y, x]))
        for x, y in local_maxima(response, threshold, nms_radius)
        if _mask_ok(mask, x, y)
    ]
    kps.sort(key=keypoint_order)
    return kps


def detect_keypoints(
    gray: ImageBuffer,
    threshold: float = 5e-6,
    nms_radius: int = 5,
    mask: Mask = None,
    k: float = 0.04,
    window_sigma: float = 1.5,
) -> list[Keypoint]:
    """Corner keypoints sorted strongest first, ties by (y, x).

    ``mask`` is a boolean array over the image or a predicate on pixel
    centres. Suppression runs on the unmasked response, so a masked result
    is exactly the unmasked one filtered to the mask.
    """
    resp = corner_response(gray, k, window_sigma)
    return keypoints_from_response(resp, threshold, nms_radius, mask)
