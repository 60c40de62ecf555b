"""Hue-histogram CAMShift tracker and the PID approach controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dip.errors import EmptyWindow, TargetLost
from dip.geometry import Rect
from dip.imaging.buffer import ImageBuffer
from dip.imaging.color import HueHistogram, back_project, hue_histogram


@dataclass(frozen=True)
class TrackerConfig:
    bins: int = 16
    lost_threshold: float = 0.05
    max_iter: int = 10
    min_window: int = 8

    def __post_init__(self):
        if self.bins < 1 or self.max_iter < 1 or self.min_window < 2:
            raise ValueError("bins, max_iter must be >= 1 and min_window >= 2")
        if not 0 <= self.lost_threshold <= 1:
            raise ValueError("lost_threshold must lie in [0, 1]")


@dataclass
class TrackerState:
    histogram: HueHistogram
    window: Rect  # closed integer pixel bounds
    last_density: float = 0.0
    iterations: int = 0


def _clamp_window(x0: int, y0: int, w: int, h: int, width: int, height: int) -> Rect:
    """Integer window of w x h pixels, shifted (not shrunk) to fit the frame."""
    w = min(w, width)
    h = min(h, height)
    x0 = min(max(x0, 0), width - w)
    y0 = min(max(y0, 0), height - h)
    return Rect(x0, y0, x0 + w - 1, y0 + h - 1)


def _pixels(r: Rect) -> tuple[int, int, int, int]:
    return int(r.x_min), int(r.y_min), int(r.x_max), int(r.y_max)


class _LazyProb:
    """Back-projection computed on a crop first, widened to the frame on demand.

    Projection is per pixel, so every value equals the full-frame one.
    """

    def __init__(self, frame: ImageBuffer, hist: HueHistogram, around: Rect):
        self.frame, self.hist = frame, hist
        H, W = frame.height, frame.width
        x0, y0, x1, y1 = _pixels(around)
        mx, my = x1 - x0 + 1, y1 - y0 + 1
        self._set(max(0, x0 - mx), max(0, y0 - my), min(W - 1, x1 + mx), min(H - 1, y1 + my))

    def _set(self, x0, y0, x1, y1):
        self.ox, self.oy, self.ex, self.ey = x0, y0, x1, y1
        self.plane = back_project(self.frame.data[y0 : y1 + 1, x0 : x1 + 1], self.hist)

    def roi(self, x0: int, y0: int, w: int, h: int) -> np.ndarray:
        if x0 < self.ox or y0 < self.oy or x0 + w - 1 > self.ex or y0 + h - 1 > self.ey:
            self._set(0, 0, self.frame.width - 1, self.frame.height - 1)
        return self.plane[y0 - self.oy : y0 - self.oy + h, x0 - self.ox : x0 - self.ox + w]


def _moments(prob: _LazyProb, x0: int, y0: int, w: int, h: int) -> tuple[float, float, float]:
    roi = prob.roi(x0, y0, w, h)
    m00 = float(roi.sum())
    if m00 <= 0.0:
        return 0.0, x0 + (w - 1) / 2.0, y0 + (h - 1) / 2.0
    cx = float((roi.sum(axis=0) * np.arange(x0, x0 + w)).sum()) / m00
    cy = float((roi.sum(axis=1) * np.arange(y0, y0 + h)).sum()) / m00
    return m00, cx, cy


def init_tracker(frame: ImageBuffer, bbox: Rect, bins: int = 16) -> TrackerState:
    """Seed the appearance model from ``bbox`` (rounded outward to whole pixels)."""
    win = Rect(
        max(0, math.floor(bbox.x_min)),
        max(0, math.floor(bbox.y_min)),
        min(frame.width - 1, math.ceil(bbox.x_max)),
        min(frame.height - 1, math.ceil(bbox.y_max)),
    )
    hist = hue_histogram(frame, win, bins)
    if hist.empty:
        raise EmptyWindow(f"no chromatic pixels in {win}")
    x0, y0, x1, y1 = _pixels(win)
    density = float(back_project(frame, hist)[y0 : y1 + 1, x0 : x1 + 1].mean())
    return TrackerState(hist, win, density)


def track(state: TrackerState, frame: ImageBuffer, cfg: TrackerConfig = TrackerConfig()) -> Rect:
    """One CAMShift update: mean shift to the back-projection mode, then resize.

    Mutates ``state`` and returns the new window. Raises TargetLost when
    the mean back-projection inside the final window is below threshold.
    """
    prob = _LazyProb(frame, state.histogram, state.window)
    H, W = frame.height, frame.width
    x0, y0, x1, y1 = _pixels(state.window)
    w, h = x1 - x0 + 1, y1 - y0 + 1
    it = 0
    for it in range(1, cfg.max_iter + 1):
        m00, cx, cy = _moments(prob, x0, y0, w, h)
        if m00 <= 0.0:
            break
        moved = _clamp_window(int(round(cx - (w - 1) / 2.0)), int(round(cy - (h - 1) / 2.0)), w, h, W, H)
        dx, dy = moved.x_min - x0, moved.y_min - y0
        x0, y0 = int(moved.x_min), int(moved.y_min)
        if dx == 0 and dy == 0:
            break
    state.iterations = it

    m00, cx, cy = _moments(prob, x0, y0, w, h)
    if m00 > 0.0:
        # size rule expects M00 on the 0..255 probability scale
        s = 2.0 * math.sqrt(255.0 * m00 / 256.0)
        side = int(round(min(max(s, cfg.min_window), min(W, H))))
        win = _clamp_window(
            int(round(cx - (side - 1) / 2.0)), int(round(cy - (side - 1) / 2.0)), side, side, W, H
        )
    else:
        win = Rect(x0, y0, x0 + w - 1, y0 + h - 1)

    wx0, wy0, wx1, wy1 = _pixels(win)
    density = float(prob.roi(wx0, wy0, wx1 - wx0 + 1, wy1 - wy0 + 1).mean())
    state.window = win
    state.last_density = density
    if density < cfg.lost_threshold:
        raise TargetLost(f"back-projection density {density:.4f} below {cfg.lost_threshold}")
    return win


@dataclass
class PidState:
    kp: float
    ki: float
    kd: float
    output_limit: float = 1.0
    integral: float = 0.0
    prev_error: float | None = None

    def reset(self):
        self.integral = 0.0
        self.prev_error = None


def pid_step(state: PidState, error: float, dt: float) -> float:
    """Discrete PID with rectangular integration and a clamped integrator.

    The derivative term is zero on the first call after a reset.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    state.integral += error * dt
    if state.ki > 0:
        cap = state.output_limit / state.ki
        state.integral = min(max(state.integral, -cap), cap)
    deriv = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    state.prev_error = error
    out = state.kp * error + state.ki * state.integral + state.kd * deriv
    return min(max(out, -state.output_limit), state.output_limit)


@dataclass(frozen=True)
class ApproachCommand:
    yaw: float
    pitch: float
    surge: float


@dataclass
class ApproachPids:
    yaw: PidState
    pitch: PidState
    surge: PidState

    @classmethod
    def from_gains(cls, yaw=(0.6, 0.05, 0.1), pitch=(0.0, 0.0, 0.0), surge=(0.6, 0.05, 0.1), limit=1.0):
        return cls(PidState(*yaw, limit), PidState(*pitch, limit), PidState(*surge, limit))


def approach_errors(bbox: Rect, frame_w: int, frame_h: int, target_ratio: float) -> tuple[float, float, float]:
    """(yaw, pitch, surge) errors: normalised centre offsets and size-ratio shortfall."""
    c = bbox.center
    yaw_e = (c.x - frame_w / 2.0) / (frame_w / 2.0)
    pitch_e = (c.y - frame_h / 2.0) / (frame_h / 2.0)
    surge_e = target_ratio - bbox.area / float(frame_w * frame_h)
    return yaw_e, pitch_e, surge_e


def approach_command(
    bbox: Rect, frame_w: int, frame_h: int, target_ratio: float, pids: ApproachPids, dt: float
) -> ApproachCommand:
    if not 0 < target_ratio < 1:
        raise ValueError("target_ratio must lie in (0, 1)")
    yaw_e, pitch_e, surge_e = approach_errors(bbox, frame_w, frame_h, target_ratio)
    return ApproachCommand(
        pid_step(pids.yaw, yaw_e, dt),
        pid_step(pids.pitch, pitch_e, dt),
        pid_step(pids.surge, surge_e, dt),
    )
