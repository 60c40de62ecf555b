"""Grayscale conversion, separable Gaussian blur and Sobel gradients.

All convolutions replicate edge pixels and work on float64 planes. Every
output sample depends only on its neighbourhood and is accumulated in a
fixed order, so running on a crop with enough margin reproduces the
full-frame values bit for bit.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from dip.errors import AlreadyGray
from dip.imaging.buffer import ImageBuffer

LUMA = (0.299, 0.587, 0.114)


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    if img.channels == 1:
        raise AlreadyGray("image already has one channel")
    rgb = img.data.astype(np.float64)
    gray = LUMA[0] * rgb[..., 0] + LUMA[1] * rgb[..., 1] + LUMA[2] * rgb[..., 2]
    return ImageBuffer(np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8))


def as_gray(img: ImageBuffer) -> ImageBuffer:
    return img if img.channels == 1 else to_grayscale(img)


def gaussian_kernel(sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_axis(plane: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    r = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    padded = np.pad(plane, pad, mode="edge")
    n = plane.shape[axis]
    out = np.zeros(plane.shape, dtype=np.float64)
    for i, w in enumerate(kernel):
        if w == 0.0:
            continue
        sl = [slice(None), slice(None)]
        sl[axis] = slice(i, i + n)
        out += w * padded[tuple(sl)]
    return out


def separable(plane: np.ndarray, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    """Correlate with ``ky`` down the columns, then ``kx`` along the rows."""
    return _convolve_axis(_convolve_axis(np.asarray(plane, dtype=np.float64), ky, 0), kx, 1)


def blur_plane(plane: np.ndarray, sigma: float) -> np.ndarray:
    k = gaussian_kernel(sigma)
    return separable(plane, k, k)


def gaussian_blur(img: ImageBuffer, sigma: float) -> ImageBuffer:
    """Blur each channel; results are rounded back to 8 bits."""
    d = img.data.astype(np.float64)
    if img.channels == 1:
        out = blur_plane(d, sigma)
    else:
        out = np.stack([blur_plane(d[..., ch], sigma) for ch in range(3)], axis=-1)
    return ImageBuffer(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


class Gradients(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray


_SMOOTH = np.array([1.0, 2.0, 1.0])
_DIFF = np.array([-1.0, 0.0, 1.0])


def sobel_planes(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel derivatives; gx grows to the right, gy grows downward."""
    gx = separable(plane, _DIFF, _SMOOTH)
    gy = separable(plane, _SMOOTH, _DIFF)
    return gx, gy


def sobel_gradients(gray: ImageBuffer | np.ndarray) -> Gradients:
    if isinstance(gray, ImageBuffer):
        if gray.channels != 1:
            raise ValueError("sobel_gradients needs a one-channel image")
        plane = gray.data.astype(np.float64)
    else:
        plane = np.asarray(gray, dtype=np.float64)
    gx, gy = sobel_planes(plane)
    return Gradients(gx, gy, np.hypot(gx, gy), np.arctan2(gy, gx))
