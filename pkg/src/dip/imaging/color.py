from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from dip.errors import EmptyWindow
from dip.geometry import Rect
from dip.imaging.buffer import ImageBuffer

MIN_SATURATION = 0.1
MIN_VALUE = 0.1
LUT_MIN_SAMPLES = 3 * 128 * 128  # below this the direct formula is cheaper than building a table


@dataclass(frozen=True, eq=False)
class HueHistogram:
    weights: np.ndarray  # (bins,), sums to 1 or all zero

    @property
    def bins(self) -> int:
        return len(self.weights)

    @property
    def empty(self) -> bool:
        return not bool(self.weights.any())


def hue_bins_direct(rgb: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel hue bin index and a chromatic mask.

    Pixels whose saturation or value is under 10% of range are not
    chromatic; their bin index is meaningless.
    """
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    with np.errstate(invalid="ignore", divide="ignore"):
        sat = np.where(mx > 0, delta / mx, 0.0)
        safe = np.where(delta > 0, delta, 1.0)
        hue = np.where(
            mx == r,
            ((g - b) / safe) % 6.0,
            np.where(mx == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
        )
    hue = hue * 60.0  # degrees in [0, 360)
    idx = np.floor(hue * bins / 360.0).astype(np.int64) % bins
    chromatic = (sat >= MIN_SATURATION) & (mx / 255.0 >= MIN_VALUE) & (delta > 0)
    return idx, chromatic


@lru_cache(maxsize=4)
def _hue_lut(bins: int) -> np.ndarray:
    """Bin index for every 24-bit colour, -1 where achromatic."""
    lut = np.empty(1 << 24, dtype=np.int8 if bins <= 127 else np.int32)
    gb = np.arange(1 << 16, dtype=np.uint32)
    rgb = np.empty((1 << 16, 3), dtype=np.uint8)
    rgb[:, 1] = gb >> 8
    rgb[:, 2] = gb & 255
    for r in range(256):  # one red plane at a time keeps memory small
        rgb[:, 0] = r
        idx, chroma = hue_bins_direct(rgb, bins)
        lut[r << 16 : (r + 1) << 16] = np.where(chroma, idx, -1)
    return lut


def hue_bins(rgb: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Table-driven :func:`hue_bins_direct` for large uint8 inputs."""
    if rgb.dtype != np.uint8 or rgb.size < LUT_MIN_SAMPLES:
        return hue_bins_direct(rgb, bins)
    code = (rgb[..., 0].astype(np.uint32) << 16) | (rgb[..., 1].astype(np.uint32) << 8) | rgb[..., 2]
    lut = _hue_lut(bins)[code]
    chroma = lut >= 0
    return np.where(chroma, lut, 0).astype(np.int64), chroma


def _window_slices(window: Rect, img: ImageBuffer):
    x0, y0 = int(window.x_min), int(window.y_min)
    x1, y1 = int(window.x_max), int(window.y_max)
    if x0 < 0 or y0 < 0 or x1 >= img.width or y1 >= img.height:
        raise ValueError(f"window {window} outside {img.width}x{img.height} image")
    return slice(y0, y1 + 1), slice(x0, x1 + 1)


def hue_histogram(rgb: ImageBuffer, window: Rect, bins: int = 16) -> HueHistogram:
    """Normalised hue histogram of the chromatic pixels in a closed pixel window.

    A window without chromatic pixels yields an all-zero histogram.
    """
    if rgb.channels != 3:
        raise ValueError("hue histogram needs an RGB image")
    ys, xs = _window_slices(window, rgb)
    if ys.start >= ys.stop or xs.start >= xs.stop:
        raise EmptyWindow("window has no pixels")
    idx, chroma = hue_bins(rgb.data[ys, xs], bins)
    counts = np.bincount(idx[chroma], minlength=bins).astype(np.float64)
    total = counts.sum()
    if total > 0:
        counts /= total
    return HueHistogram(counts)


def back_project(rgb: ImageBuffer | np.ndarray, hist: HueHistogram) -> np.ndarray:
    """Per-pixel histogram weight of the pixel's hue bin; 0 for achromatic pixels.

    Accepts a raw (h, w, 3) array so callers can project just a crop.
    """
    data = rgb.data if isinstance(rgb, ImageBuffer) else rgb
    if data.ndim != 3 or data.shape[2] != 3:
        raise ValueError("back projection needs an RGB image")
    idx, chroma = hue_bins(data, hist.bins)
    return np.where(chroma, hist.weights[idx], 0.0)
