"""Synthetic pointing scenes with planted objects and known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dip.evaluation import GroundTruth
from dip.geometry import Point2, Rect, Triangle, build_area_of_interest, extend_pointing_segment, point_in_triangle
from dip.imaging.buffer import ImageBuffer
from dip.pipeline import PoseLandmarks

WATER = (40, 80, 100)


@dataclass(frozen=True)
class PlantedScene:
    frame: ImageBuffer
    landmarks: PoseLandmarks
    truth: GroundTruth
    aoi: Triangle
    offset: float  # angular offset of the object from the pointing axis, radians
    half_angle: float


def water(width: int, height: int, rng: np.random.Generator, texture: float = 8.0) -> np.ndarray:
    """Smooth blue-green backdrop; too gentle to produce Canny edges at default thresholds."""
    coarse = rng.normal(0.0, 1.0, (height // 32 + 2, width // 32 + 2))
    ys = np.linspace(0, coarse.shape[0] - 1.001, height)
    xs = np.linspace(0, coarse.shape[1] - 1.001, width)
    y0, x0 = ys.astype(int), xs.astype(int)
    fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
    tex = (coarse[y0][:, x0] * (1 - fx) + coarse[y0][:, x0 + 1] * fx) * (1 - fy) + (
        coarse[y0 + 1][:, x0] * (1 - fx) + coarse[y0 + 1][:, x0 + 1] * fx
    ) * fy
    img = np.array(WATER, dtype=np.float64)[None, None, :] + texture * tex[..., None]
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def bright_color(rng: np.random.Generator) -> tuple[int, int, int]:
    """A saturated colour whose luma stands well clear of the water."""
    while True:
        c = tuple(int(v) for v in rng.integers(0, 256, 3))
        luma = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]
        if luma >= 160 and max(c) - min(c) >= 80:
            return c


def paint_box(data: np.ndarray, box: Rect, color) -> None:
    data[int(box.y_min) : int(box.y_max) + 1, int(box.x_min) : int(box.x_max) + 1] = color


def aoi_half_angle(aoi: Triangle) -> float:
    """Smaller of the two apex angles between the triangle's axis and its sides."""
    a = aoi.apex
    mid = Point2((aoi.base_top.x + aoi.base_bottom.x) / 2, (aoi.base_top.y + aoi.base_bottom.y) / 2)
    axis = math.atan2(mid.y - a.y, mid.x - a.x)
    out = []
    for v in (aoi.base_top, aoi.base_bottom):
        d = math.atan2(v.y - a.y, v.x - a.x) - axis
        out.append(abs(math.atan2(math.sin(d), math.cos(d))))
    return min(out)


def planted_scene(
    rng: np.random.Generator,
    frame_id: int = 0,
    width: int = 640,
    height: int = 480,
    sf: float = 10.0,
    c: float = 100.0,
    eps: float = 5.0,
    max_tilt_deg: float = 50.0,
) -> PlantedScene:
    """Pointing arm plus one bright square planted inside the angular span of its AOI.

    The object sits between 35% and 90% of the way to the base, offset from
    the pointing axis by up to the AOI half-angle.
    """
    while True:
        tilt = math.radians(rng.uniform(-max_tilt_deg, max_tilt_deg))
        theta = tilt if rng.random() < 0.5 else math.pi - tilt  # y-up angle
        length = rng.uniform(20.0, 32.0)
        wrist = Point2(rng.uniform(40, width - 40), rng.uniform(60, height - 60))
        elbow = Point2(wrist.x - length * math.cos(theta), wrist.y + length * math.sin(theta))
        ext = extend_pointing_segment(elbow, wrist, sf)
        aoi = build_area_of_interest(wrist, ext, c, eps)
        half = aoi_half_angle(aoi)
        offset = rng.uniform(-half, half)
        a = aoi.apex
        mid = Point2(ext.x, ext.y)
        axis = math.atan2(mid.y - a.y, mid.x - a.x)
        dist = math.hypot(mid.x - a.x, mid.y - a.y) * rng.uniform(0.35, 0.9)
        cx = a.x + dist * math.cos(axis + offset)
        cy = a.y + dist * math.sin(axis + offset)
        side = int(rng.integers(24, 41))
        box = Rect(round(cx - side / 2), round(cy - side / 2), round(cx - side / 2) + side - 1, round(cy - side / 2) + side - 1)
        if box.x_min < 2 or box.y_min < 2 or box.x_max > width - 3 or box.y_max > height - 3:
            continue
        # the base is vertical, so a tilted offset ray can leave the triangle early
        if not point_in_triangle(box.center, aoi):
            continue
        data = water(width, height, rng)
        paint_box(data, box, bright_color(rng))
        lm = PoseLandmarks(elbow, wrist, float(rng.uniform(0.7, 1.0)), float(rng.uniform(0.7, 1.0)), "right", frame_id)
        return PlantedScene(ImageBuffer(data), lm, GroundTruth(frame_id, box, True), aoi, offset, half)


def corpus(n: int, seed: int = 0, **kw) -> list[PlantedScene]:
    rng = np.random.default_rng(seed)
    return [planted_scene(rng, frame_id=i, **kw) for i in range(n)]


def checker_junction(plane: np.ndarray, x: int, y: int, half: int, lo: int, hi: int) -> None:
    """Paint a 2x2 checker of ``half``-pixel squares meeting at pixel corner (x, y)."""
    h, w = plane.shape
    y0, y1, x0, x1 = max(0, y - half), min(h, y + half), max(0, x - half), min(w, x + half)
    plane[y0:y, x0:x] = hi
    plane[y:y1, x:x1] = hi
    plane[y0:y, x:x1] = lo
    plane[y:y1, x0:x] = lo


def session_stream(
    n: int = 20, pose_from: int = 4, object_from: int = 7, seed: int = 0, drift: int = 0
) -> tuple[list[tuple[int, ImageBuffer, PoseLandmarks | None]], PlantedScene]:
    """Frames 0..n-1 of one pointing episode.

    The pose is visible from ``pose_from`` on and the object from
    ``object_from`` on; the object moves ``drift`` pixels right per frame.
    Each frame gets its own water texture.
    """
    rng = np.random.default_rng(seed)
    scene = planted_scene(rng, max_tilt_deg=30.0)
    box = scene.truth.object_box
    color = tuple(int(v) for v in scene.frame.data[int(box.center.y), int(box.center.x)])
    out = []
    for fid in range(n):
        data = water(scene.frame.width, scene.frame.height, rng)
        if fid >= object_from:
            dx = drift * (fid - object_from)
            moved = Rect(box.x_min + dx, box.y_min, box.x_max + dx, box.y_max)
            if moved.x_max < scene.frame.width:
                paint_box(data, moved, color)
        lm = None
        if fid >= pose_from:
            lm = PoseLandmarks(scene.landmarks.elbow, scene.landmarks.wrist, 0.9, 0.9, "right", fid)
        out.append((fid, ImageBuffer(data), lm))
    return out, scene


def write_stream(directory, stream, landmarks_path) -> None:
    """Frames as ``frame_NNNNNN.ppm`` plus a landmark file."""
    from pathlib import Path

    from dip.imaging.netpbm import save_image
    from dip.pipeline import frame_filename, write_landmarks

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for fid, img, _ in stream:
        save_image(img, d / frame_filename(fid, img.channels))
    write_landmarks(landmarks_path, [(fid, lm) for fid, _, lm in stream])
