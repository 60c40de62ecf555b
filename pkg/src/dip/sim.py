"""Desk-scale closed-loop approach simulator.

A planar unicycle robot carries a pinhole camera. Each step renders the
scene, updates the hue tracker, turns the tracked window into yaw/pitch/surge
commands and integrates the kinematics. Heading is measured clockwise from
world +y, so a positive yaw command turns right, matching a target on the
right half of the image.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path

import numpy as np

from dip.errors import ConfigError, EmptyWindow, TargetLost
from dip.geometry import Rect
from dip.imaging.buffer import ImageBuffer
from dip.kvfile import parse_kv_file
from dip.tracking import (
    ApproachPids,
    PidState,
    TrackerConfig,
    approach_command,
    init_tracker,
    track,
)


@dataclass(frozen=True)
class ControlConfig:
    kp: float = 0.6
    ki: float = 0.05
    kd: float = 0.1
    surge_kp: float = 0.6
    surge_ki: float = 0.01
    surge_kd: float = 0.1
    pitch_kp: float = 0.0
    pitch_ki: float = 0.0
    pitch_kd: float = 0.0
    output_limit: float = 1.0
    target_ratio: float = 0.15
    dt: float = 0.1
    omega_max: float = 1.0
    v_max: float = 2.0
    converge_tol: float = 0.1
    converge_steps: int = 10
    max_steps: int = 500

    def __post_init__(self):
        if not 0 < self.target_ratio < 1:
            raise ValueError("target_ratio must lie in (0, 1)")
        if self.dt <= 0 or self.output_limit <= 0 or self.omega_max <= 0 or self.v_max <= 0:
            raise ValueError("dt, output_limit, omega_max, v_max must be positive")
        if min(self.kp, self.ki, self.kd, self.surge_kp, self.surge_ki, self.surge_kd,
               self.pitch_kp, self.pitch_ki, self.pitch_kd) < 0:
            raise ValueError("PID gains must be non-negative")
        if self.converge_steps < 1 or self.max_steps < 1 or self.converge_tol <= 0:
            raise ValueError("converge_steps, max_steps, converge_tol must be positive")

    def pids(self) -> ApproachPids:
        lim = self.output_limit
        return ApproachPids(
            PidState(self.kp, self.ki, self.kd, lim),
            PidState(self.pitch_kp, self.pitch_ki, self.pitch_kd, lim),
            PidState(self.surge_kp, self.surge_ki, self.surge_kd, lim),
        )


@dataclass(frozen=True)
class SimScene:
    object_x: float = 0.0
    object_y: float = 4.0
    object_z: float = 0.0
    object_size: float = 0.3
    object_color: tuple[int, int, int] = (210, 40, 40)
    robot_x: float = 0.0
    robot_y: float = 0.0
    robot_heading: float = 0.0  # degrees, clockwise from +y
    width: int = 640
    height: int = 480
    fov_deg: float = 80.0
    water_color: tuple[int, int, int] = (40, 80, 100)
    texture: float = 12.0
    seed: int = 0
    drift: float = 0.0  # std of per-step lateral disturbance, metres
    teleport_step: int = -1
    teleport_x: float = 0.0
    teleport_y: float = -50.0

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise ValueError("frame must be at least 16x16")
        if not 1.0 < self.fov_deg < 179.0:
            raise ValueError("fov_deg must lie in (1, 179)")
        if self.object_size <= 0:
            raise ValueError("object_size must be positive")
        for c in (*self.object_color, *self.water_color):
            if not 0 <= c <= 255:
                raise ValueError("colours are 8-bit")

    @property
    def focal(self) -> float:
        return (self.width / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)


def _parse_color(v: str) -> tuple[int, int, int]:
    parts = [int(p) for p in v.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"colour needs three components: {v!r}")
    return tuple(parts)  # type: ignore[return-value]


def scene_from_mapping(values: dict[str, str]) -> SimScene:
    kinds = {f.name: f.type for f in fields(SimScene)}
    kwargs = {}
    for key, raw in values.items():
        if key not in kinds:
            raise ConfigError(f"unknown scene key {key!r}")
        t = kinds[key]
        try:
            if t.startswith("tuple"):
                kwargs[key] = _parse_color(raw)
            elif t == "int":
                kwargs[key] = int(raw)
            else:
                kwargs[key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for scene key {key!r}: {exc}") from None
    try:
        return SimScene(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_scene(path: str | os.PathLike) -> SimScene:
    return scene_from_mapping(parse_kv_file(path))


def bundled_scene_path(name: str) -> Path:
    """Path of a scene shipped with the package; ``ahead`` and ``ahead.scene`` both work."""
    if not name.endswith(".scene"):
        name += ".scene"
    return Path(__file__).parent / "data" / name


@dataclass
class RobotPose:
    x: float
    y: float
    heading: float  # radians, clockwise from +y

    @property
    def forward(self) -> tuple[float, float]:
        return math.sin(self.heading), math.cos(self.heading)

    @property
    def right(self) -> tuple[float, float]:
        return math.cos(self.heading), -math.sin(self.heading)


def project_object(scene: SimScene, pose: RobotPose, obj: tuple[float, float]) -> Rect | None:
    """Pixel-inclusive box of the object's image, or None when not visible."""
    rx, ry = obj[0] - pose.x, obj[1] - pose.y
    fx, fy = pose.forward
    sx, sy = pose.right
    depth = rx * fx + ry * fy
    if depth <= 0.05:
        return None
    lateral = rx * sx + ry * sy
    f = scene.focal
    u = scene.width / 2.0 + f * lateral / depth
    v = scene.height / 2.0 - f * scene.object_z / depth
    half = f * scene.object_size / depth / 2.0
    x0, x1 = int(round(u - half)), int(round(u + half)) - 1
    y0, y1 = int(round(v - half)), int(round(v + half)) - 1
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, scene.width - 1), min(y1, scene.height - 1)
    if x0 > x1 or y0 > y1:
        return None
    return Rect(x0, y0, x1, y1)


def water_background(scene: SimScene) -> np.ndarray:
    """Static blue-green backdrop with seeded low-frequency brightness texture."""
    rng = np.random.default_rng(scene.seed)
    h, w = scene.height, scene.width
    coarse = rng.normal(0.0, 1.0, (h // 16 + 2, w // 16 + 2))
    yy = np.linspace(0, coarse.shape[0] - 1.001, h)
    xx = np.linspace(0, coarse.shape[1] - 1.001, w)
    y0, x0 = yy.astype(int), xx.astype(int)
    fy, fx = (yy - y0)[:, None], (xx - x0)[None, :]
    c00 = coarse[y0][:, x0]
    c01 = coarse[y0][:, x0 + 1]
    c10 = coarse[y0 + 1][:, x0]
    c11 = coarse[y0 + 1][:, x0 + 1]
    tex = (c00 * (1 - fx) + c01 * fx) * (1 - fy) + (c10 * (1 - fx) + c11 * fx) * fy
    fine = rng.normal(0.0, 0.25, (h, w))
    shade = scene.texture * (tex + fine)
    img = np.array(scene.water_color, dtype=np.float64)[None, None, :] + shade[..., None]
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def render(scene: SimScene, pose: RobotPose, obj: tuple[float, float], background: np.ndarray | None = None) -> tuple[ImageBuffer, Rect | None]:
    data = (water_background(scene) if background is None else background).copy()
    box = project_object(scene, pose, obj)
    if box is not None:
        data[int(box.y_min) : int(box.y_max) + 1, int(box.x_min) : int(box.x_max) + 1] = scene.object_color
    return ImageBuffer(data), box


class Outcome(str, Enum):
    CONVERGED = "converged"
    LOST = "lost"
    TIMEOUT = "timeout"


TRAJECTORY_FIELDS = ["step", "x", "y", "heading", "bbox_x", "bbox_y", "bbox_w", "bbox_h", "yaw", "pitch", "surge", "ratio"]


@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    x: float
    y: float
    heading: float
    bbox_x: float
    bbox_y: float
    bbox_w: float
    bbox_h: float
    yaw: float
    pitch: float
    surge: float
    ratio: float


@dataclass
class SimResult:
    outcome: Outcome
    trajectory: list[TrajectoryRow] = field(default_factory=list)
    frames: list[ImageBuffer] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.trajectory)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_FIELDS)
        for r in self.trajectory:
            w.writerow([r.step] + [repr(float(getattr(r, k))) for k in TRAJECTORY_FIELDS[1:]])
        return buf.getvalue()


def simulate_approach(
    scene: SimScene,
    cfg: ControlConfig = ControlConfig(),
    max_steps: int | None = None,
    tracker_cfg: TrackerConfig = TrackerConfig(),
    keep_frames: bool = False,
) -> SimResult:
    """Close the loop render -> track -> PID -> unicycle until converged, lost or timeout.

    The tracker is seeded with the projected object box in the first frame,
    standing in for the detection a pointing diver would trigger.
    """
    max_steps = cfg.max_steps if max_steps is None else max_steps
    rng = np.random.default_rng(scene.seed + 1)
    pose = RobotPose(scene.robot_x, scene.robot_y, math.radians(scene.robot_heading))
    obj = (scene.object_x, scene.object_y)
    background = water_background(scene)
    W, H = scene.width, scene.height
    pids = cfg.pids()
    result = SimResult(Outcome.TIMEOUT)

    frame, box = render(scene, pose, obj, background)
    if box is None:
        result.outcome = Outcome.LOST
        return result
    try:
        tracker = init_tracker(frame, box, tracker_cfg.bins)
    except EmptyWindow:
        result.outcome = Outcome.LOST
        return result

    streak = 0
    for step in range(max_steps):
        if step == scene.teleport_step:
            obj = (scene.teleport_x, scene.teleport_y)
        if step > 0:
            frame, _ = render(scene, pose, obj, background)
            try:
                window = track(tracker, frame, tracker_cfg)
            except TargetLost:
                result.outcome = Outcome.LOST
                return result
        else:
            window = tracker.window
        if keep_frames:
            result.frames.append(frame)
        cmd = approach_command(window, W, H, cfg.target_ratio, pids, cfg.dt)
        ratio = window.area / float(W * H)
        result.trajectory.append(
            TrajectoryRow(step, pose.x, pose.y, pose.heading, window.x_min, window.y_min,
                          window.width, window.height, cmd.yaw, cmd.pitch, cmd.surge, ratio)
        )
        if abs(ratio - cfg.target_ratio) <= cfg.converge_tol * cfg.target_ratio:
            streak += 1
            if streak >= cfg.converge_steps:
                result.outcome = Outcome.CONVERGED
                return result
        else:
            streak = 0
        pose.heading += cmd.yaw * cfg.dt * cfg.omega_max
        fx, fy = pose.forward
        dist = cmd.surge * cfg.dt * cfg.v_max
        pose.x += dist * fx
        pose.y += dist * fy
        if scene.drift > 0:
            sx, sy = pose.right
            d = rng.normal(0.0, scene.drift)
            pose.x += d * sx
            pose.y += d * sy
    return result


def write_trajectory(result: SimResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(result.to_csv())
