from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from dip.imaging.buffer import ImageBuffer
from dip.imaging.filters import blur_plane, sobel_planes

EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    data: np.ndarray  # bool, (height, width)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def count(self) -> int:
        return int(self.data.sum())


def _shift(a: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """out[y, x] = a[y + dy, x + dx], zero outside."""
    h, w = a.shape
    out = np.zeros_like(a)
    ys, yd = (slice(dy, h), slice(0, h - dy)) if dy >= 0 else (slice(0, h + dy), slice(-dy, h))
    xs, xd = (slice(dx, w), slice(0, w - dx)) if dx >= 0 else (slice(0, w + dx), slice(-dx, w))
    out[yd, xd] = a[ys, xs]
    return out


def non_max_suppression(mag: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Thin ridges along the gradient, quantised to 4 directions.

    A pixel must be strictly larger than its neighbour on the negative side
    and at least as large as the one on the positive side, so a two-pixel
    plateau straddling a step keeps exactly one pixel.
    """
    deg = np.degrees(direction) % 180.0
    out = np.zeros_like(mag)
    bins = [
        ((deg < 22.5) | (deg >= 157.5), (0, 1)),
        ((deg >= 22.5) & (deg < 67.5), (1, 1)),
        ((deg >= 67.5) & (deg < 112.5), (1, 0)),
        ((deg >= 112.5) & (deg < 157.5), (1, -1)),
    ]
    for sel, (dy, dx) in bins:
        nxt = _shift(mag, dy, dx)
        prv = _shift(mag, -dy, -dx)
        keep = sel & (mag > prv) & (mag >= nxt) & (mag > 0)
        out[keep] = mag[keep]
    return out


def hysteresis(nms: np.ndarray, low: float, high: float) -> np.ndarray:
    """Weak pixels survive only if 8-connected through weak pixels to a strong one."""
    weak = nms > low
    labels, n = ndimage.label(weak, structure=EIGHT)
    if n == 0:
        return np.zeros_like(weak)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[nms > high])] = True
    seeded[0] = False
    return seeded[labels]


def canny_plane(plane: np.ndarray, low: float, high: float, sigma: float) -> np.ndarray:
    if not 0 < low < high:
        raise ValueError("thresholds must satisfy 0 < low < high")
    smooth = blur_plane(plane, sigma)
    gx, gy = sobel_planes(smooth)
    nms = non_max_suppression(np.hypot(gx, gy), np.arctan2(gy, gx))
    return hysteresis(nms, low, high)


def canny(gray: ImageBuffer, low: float = 40.0, high: float = 100.0, sigma: float = 1.4) -> EdgeMap:
    """Canny edges; thresholds apply to raw Sobel magnitude of the blurred image."""
    if gray.channels != 1:
        raise ValueError("canny needs a one-channel image")
    return EdgeMap(canny_plane(gray.data.astype(np.float64), low, high, sigma))
