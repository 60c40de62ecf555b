"""Per-frame pointing pipeline and the multi-frame confirmation loop.

Per frame: gate the pose, extend the forearm, build the triangle, look for
an object inside it. Across frames: keep trying until a frame yields a
detection, freeze it, then hand the object to the tracker.
"""

from __future__ import annotations

import dataclasses
import math
import os
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from dip.detection import Detection, DetectorConfig, Method, locate_object
from dip.errors import DegeneratePose, DegenerateTriangle, EmptyRegion, EmptyWindow, ParseError, TargetLost
from dip.geometry import (
    Point2,
    PointingRay,
    Rect,
    Triangle,
    build_area_of_interest,
    build_area_of_interest_perpendicular,
    pointing_ray,
)
from dip.imaging.buffer import ImageBuffer
from dip.tracking import TrackerConfig, TrackerState, init_tracker, track


class Gate(str, Enum):
    NO_POSE = "no_pose"
    LOW_CONFIDENCE = "low_confidence"
    NOT_POINTING = "not_pointing"
    OK = "ok"


class Phase(str, Enum):
    AWAITING_POSE = "awaiting_pose"
    DETECTING = "detecting"
    CONFIRMED = "confirmed"
    TRACKING = "tracking"


@dataclass(frozen=True)
class PoseLandmarks:
    elbow: Point2
    wrist: Point2
    elbow_conf: float = 1.0
    wrist_conf: float = 1.0
    arm: str = "right"
    frame_id: int = 0

    def __post_init__(self):
        if not (0.0 <= self.elbow_conf <= 1.0 and 0.0 <= self.wrist_conf <= 1.0):
            raise ValueError("landmark confidences must lie in [0, 1]")
        if self.arm not in ("right", "left"):
            raise ValueError(f"arm must be 'right' or 'left', got {self.arm!r}")


@dataclass(frozen=True)
class DipConfig:
    sf: float = 10.0
    c: float = 100.0
    eps: float = 5.0
    min_conf: float = 0.5
    min_forearm: float = 15.0
    perpendicular_mode: bool = False
    confirm_frames: int = 1
    tracking: bool = True
    restart_on_lost: bool = False  # start a fresh session when the tracker loses the object
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)

    def __post_init__(self):
        if self.sf <= 0 or self.c <= 0 or self.eps < 0 or self.min_forearm <= 0:
            raise ValueError("need sf > 0, c > 0, eps >= 0, min_forearm > 0")
        if not 0.0 <= self.min_conf <= 1.0:
            raise ValueError("min_conf must lie in [0, 1]")
        if self.confirm_frames < 1:
            raise ValueError("confirm_frames must be >= 1")


@dataclass(frozen=True)
class FrameResult:
    frame_id: int
    gate: Gate
    ray: PointingRay | None = None
    aoi: Triangle | None = None
    detection: Detection | None = None
    elapsed: float = 0.0  # milliseconds

    def __post_init__(self):
        if self.detection is not None and self.aoi is None:
            raise ValueError("detection without area of interest")
        if self.aoi is not None and self.ray is None:
            raise ValueError("area of interest without pointing ray")
        if self.ray is not None and self.gate is not Gate.OK:
            raise ValueError("pointing ray on a gated frame")


def is_pointing_pose(lm: PoseLandmarks | None, cfg: DipConfig = DipConfig()) -> Gate:
    """Cheap stand-in for a learned pointing-diver detector."""
    if lm is None:
        return Gate.NO_POSE
    if min(lm.elbow_conf, lm.wrist_conf) < cfg.min_conf:
        return Gate.LOW_CONFIDENCE
    if math.hypot(lm.wrist.x - lm.elbow.x, lm.wrist.y - lm.elbow.y) < cfg.min_forearm:
        return Gate.NOT_POINTING
    return Gate.OK


def run_frame(frame: ImageBuffer, lm: PoseLandmarks | None, cfg: DipConfig = DipConfig(), frame_id: int | None = None) -> FrameResult:
    t0 = time.perf_counter()
    fid = frame_id if frame_id is not None else (lm.frame_id if lm is not None else 0)

    def done(gate, ray=None, aoi=None, det=None):
        return FrameResult(fid, gate, ray, aoi, det, (time.perf_counter() - t0) * 1000.0)

    gate = is_pointing_pose(lm, cfg)
    if gate is not Gate.OK:
        return done(gate)
    try:
        ray = pointing_ray(lm.elbow, lm.wrist, cfg.sf)
    except DegeneratePose:
        return done(Gate.NOT_POINTING)
    build = build_area_of_interest_perpendicular if cfg.perpendicular_mode else build_area_of_interest
    try:
        aoi = build(ray.wrist, ray.ext, cfg.c, cfg.eps)
    except DegenerateTriangle:
        return done(Gate.OK, ray)
    try:
        det = locate_object(frame, aoi, cfg.detector.method, cfg.detector)
    except EmptyRegion:
        det = None
    return done(Gate.OK, ray, aoi, det)


@dataclass(frozen=True)
class SessionState:
    phase: Phase
    confirmed_detection: Detection | None = None
    frames_processed: int = 0
    confirmed_frame: int | None = None
    track_window: Rect | None = None
    tracker_lost: bool = False

    def __post_init__(self):
        has = self.confirmed_detection is not None
        if has != (self.phase in (Phase.CONFIRMED, Phase.TRACKING)):
            raise ValueError(f"phase {self.phase.value} inconsistent with confirmation")


@dataclass
class SessionRun:
    trace: list[SessionState]
    results: list[FrameResult]

    @property
    def final(self) -> SessionState:
        return self.trace[-1] if self.trace else SessionState(Phase.AWAITING_POSE)

    @property
    def confirmed(self) -> bool:
        return self.final.confirmed_detection is not None

    def mean_elapsed(self) -> float:
        return float(np.mean([r.elapsed for r in self.results])) if self.results else 0.0


def tracker_seed(det: Detection) -> Rect:
    """Window that seeds the tracker's colour model.

    A contour runs along the object's boundary and may sit a pixel outside
    it, so its box is inset by one pixel to keep background out of the
    histogram.
    """
    b = det.bbox
    if det.method is Method.CONTOUR and b.width > 2 and b.height > 2:
        return Rect(b.x_min + 1, b.y_min + 1, b.x_max - 1, b.y_max - 1)
    return b


def run_session(
    stream: Iterable[tuple[int, ImageBuffer, PoseLandmarks | None]],
    cfg: DipConfig = DipConfig(),
) -> SessionRun:
    """Fold frames through the confirm-then-track state machine.

    Every frame still gets a FrameResult, but once an object is confirmed
    later detections are ignored and, when tracking is enabled and the
    frame is RGB, the tracker follows the frozen object instead. With
    ``restart_on_lost`` a lost track drops the confirmation and detection
    resumes on the next frame.
    """
    state = SessionState(Phase.AWAITING_POSE)
    tracker: TrackerState | None = None
    streak = 0
    trace, results = [], []
    for fid, frame, lm in stream:
        r = run_frame(frame, lm, cfg, frame_id=fid)
        results.append(r)
        n = state.frames_processed + 1
        if state.confirmed_detection is None:
            if r.detection is not None:
                streak += 1
            else:
                streak = 0
            if streak >= cfg.confirm_frames:
                state = SessionState(Phase.CONFIRMED, r.detection, n, fid)
                if cfg.tracking and frame.channels == 3:
                    try:
                        tracker = init_tracker(frame, tracker_seed(r.detection), cfg.tracker.bins)
                    except EmptyWindow:
                        tracker = None
                    else:
                        state = dataclasses.replace(state, track_window=tracker.window)
            else:
                phase = Phase.DETECTING if r.gate is Gate.OK else Phase.AWAITING_POSE
                state = SessionState(phase, None, n)
        elif tracker is not None and not state.tracker_lost and frame.channels == 3:
            try:
                win = track(tracker, frame, cfg.tracker)
            except TargetLost:
                if cfg.restart_on_lost:
                    tracker, streak = None, 0
                    phase = Phase.DETECTING if r.gate is Gate.OK else Phase.AWAITING_POSE
                    state = SessionState(phase, None, n)
                else:
                    state = dataclasses.replace(state, phase=Phase.TRACKING, frames_processed=n, track_window=None, tracker_lost=True)
            else:
                state = dataclasses.replace(state, phase=Phase.TRACKING, frames_processed=n, track_window=win)
        else:
            state = dataclasses.replace(state, frames_processed=n, track_window=None if state.tracker_lost else state.track_window)
        trace.append(state)
    return SessionRun(trace, results)


# --- rendering ---------------------------------------------------------------

COLORS = {
    "aoi": (255, 255, 255),
    "ray": (255, 0, 255),
    "forearm": (0, 255, 0),
    "marker": (255, 0, 0),
    "bbox": (255, 255, 0),
}
MARKER_ARM = 6


def line_pixels(p0: tuple[int, int], p1: tuple[int, int]) -> Iterator[tuple[int, int]]:
    """Bresenham rasterisation, endpoints included."""
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _draw_line(data: np.ndarray, a: Point2, b: Point2, color) -> None:
    h, w = data.shape[:2]
    # keep Bresenham tractable for far off-frame endpoints
    lim = 4 * max(w, h)
    pa = (int(round(min(max(a.x, -lim), lim))), int(round(min(max(a.y, -lim), lim))))
    pb = (int(round(min(max(b.x, -lim), lim))), int(round(min(max(b.y, -lim), lim))))
    for x, y in line_pixels(pa, pb):
        if 0 <= x < w and 0 <= y < h:
            data[y, x] = color


def annotate(frame: ImageBuffer, r: FrameResult) -> ImageBuffer:
    """Return a drawn-on copy; a frame with nothing to draw comes back unchanged."""
    if r.ray is None:
        return frame.copy()
    data = frame.data.copy() if frame.channels == 3 else np.repeat(frame.data[..., None], 3, axis=2)
    if r.aoi is not None:
        for a, b in r.aoi.edges():
            _draw_line(data, a, b, COLORS["aoi"])
    _draw_line(data, r.ray.wrist, r.ray.ext, COLORS["ray"])
    _draw_line(data, r.ray.elbow, r.ray.wrist, COLORS["forearm"])
    if r.detection is not None:
        bb = r.detection.bbox
        corners = [Point2(bb.x_min, bb.y_min), Point2(bb.x_max, bb.y_min), Point2(bb.x_max, bb.y_max), Point2(bb.x_min, bb.y_max)]
        for i in range(4):
            _draw_line(data, corners[i], corners[(i + 1) % 4], COLORS["bbox"])
        cx, cy = r.detection.point.rounded()
        _draw_line(data, Point2(cx - MARKER_ARM, cy), Point2(cx + MARKER_ARM, cy), COLORS["marker"])
        _draw_line(data, Point2(cx, cy - MARKER_ARM), Point2(cx, cy + MARKER_ARM), COLORS["marker"])
    return ImageBuffer(data)


# --- landmark stream and frame directories -----------------------------------

FRAME_RE = re.compile(r"^frame_(\d{6})\.(ppm|pgm)$")


def parse_landmark_line(line: str, lineno: int = 0) -> tuple[int, PoseLandmarks | None]:
    """``frame_id arm ex ey econf wx wy wconf`` or ``frame_id -``."""
    parts = line.split()
    try:
        fid = int(parts[0])
    except (IndexError, ValueError):
        raise ParseError(f"bad frame id in {line!r}", lineno) from None
    if len(parts) == 2 and parts[1] == "-":
        return fid, None
    if len(parts) != 8:
        raise ParseError(f"expected 8 fields, got {len(parts)}", lineno)
    try:
        ex, ey, ec, wx, wy, wc = (float(v) for v in parts[2:])
        lm = PoseLandmarks(Point2(ex, ey), Point2(wx, wy), ec, wc, parts[1], fid)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    return fid, lm


def read_landmarks(path: str | os.PathLike) -> list[tuple[int, PoseLandmarks | None]]:
    out = []
    prev = -1
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "-":
                # bare dash: next frame in sequence has no pose
                prev += 1
                out.append((prev, None))
                continue
            fid, lm = parse_landmark_line(line, i)
            if fid <= prev:
                raise ParseError(f"frame ids must increase (got {fid} after {prev})", i)
            prev = fid
            out.append((fid, lm))
    return out


def format_landmarks(fid: int, lm: PoseLandmarks | None) -> str:
    if lm is None:
        return f"{fid} -"
    return (
        f"{fid} {lm.arm} {lm.elbow.x:g} {lm.elbow.y:g} {lm.elbow_conf:g} "
        f"{lm.wrist.x:g} {lm.wrist.y:g} {lm.wrist_conf:g}"
    )


def write_landmarks(path: str | os.PathLike, records: Iterable[tuple[int, PoseLandmarks | None]]) -> None:
    with open(path, "w") as fh:
        for fid, lm in records:
            fh.write(format_landmarks(fid, lm) + "\n")


def frame_filename(fid: int, channels: int) -> str:
    return f"frame_{fid:06d}.{'pgm' if channels == 1 else 'ppm'}"


def list_frames(directory: str | os.PathLike) -> dict[int, Path]:
    found = {}
    for p in sorted(Path(directory).iterdir()):
        m = FRAME_RE.match(p.name)
        if m:
            found[int(m.group(1))] = p
    return found
