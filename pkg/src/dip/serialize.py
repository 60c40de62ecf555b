"""JSON-ready dictionaries for pipeline results, and the way back."""

from __future__ import annotations

from typing import Any

from dip.detection import Detection, Method
from dip.geometry import Point2, PointingRay, Rect, Triangle
from dip.pipeline import FrameResult, Gate, Phase, SessionRun, SessionState


def point_to(p: Point2) -> list[float]:
    return [p.x, p.y]


def point_from(v) -> Point2:
    return Point2(float(v[0]), float(v[1]))


def rect_to(r: Rect) -> list[float]:
    return [r.x_min, r.y_min, r.x_max, r.y_max]


def rect_from(v) -> Rect:
    return Rect(*(float(x) for x in v))


def detection_to(d: Detection | None) -> dict | None:
    if d is None:
        return None
    return {"point": point_to(d.point), "bbox": rect_to(d.bbox), "method": d.method.value, "score": d.score}


def detection_from(v: dict | None) -> Detection | None:
    if v is None:
        return None
    return Detection(point_from(v["point"]), rect_from(v["bbox"]), Method(v["method"]), float(v["score"]))


def frame_result_to(r: FrameResult) -> dict[str, Any]:
    return {
        "frame_id": r.frame_id,
        "gate": r.gate.value,
        "ray": None if r.ray is None else {
            "elbow": point_to(r.ray.elbow),
            "wrist": point_to(r.ray.wrist),
            "ext": point_to(r.ray.ext),
            "sf": r.ray.sf,
        },
        "aoi": None if r.aoi is None else [point_to(v) for v in r.aoi.vertices],
        "detection": detection_to(r.detection),
        "elapsed_ms": r.elapsed,
    }


def frame_result_from(v: dict[str, Any]) -> FrameResult:
    ray = v.get("ray")
    aoi = v.get("aoi")
    return FrameResult(
        int(v["frame_id"]),
        Gate(v["gate"]),
        None if ray is None else PointingRay(
            point_from(ray["elbow"]), point_from(ray["wrist"]), point_from(ray["ext"]), float(ray["sf"])
        ),
        None if aoi is None else Triangle(*(point_from(p) for p in aoi)),
        detection_from(v.get("detection")),
        float(v.get("elapsed_ms", 0.0)),
    )


def session_state_to(s: SessionState) -> dict[str, Any]:
    return {
        "phase": s.phase.value,
        "confirmed_detection": detection_to(s.confirmed_detection),
        "frames_processed": s.frames_processed,
        "confirmed_frame": s.confirmed_frame,
        "track_window": None if s.track_window is None else rect_to(s.track_window),
        "tracker_lost": s.tracker_lost,
    }


def session_state_from(v: dict[str, Any]) -> SessionState:
    tw = v.get("track_window")
    return SessionState(
        Phase(v["phase"]),
        detection_from(v.get("confirmed_detection")),
        int(v["frames_processed"]),
        v.get("confirmed_frame"),
        None if tw is None else rect_from(tw),
        bool(v.get("tracker_lost", False)),
    )


def session_to(run: SessionRun) -> dict[str, Any]:
    final = run.final
    return {
        "outcome": "confirmed" if run.confirmed else "unconfirmed",
        "confirmed_frame": final.confirmed_frame,
        "final_state": session_state_to(final),
        "mean_elapsed_ms": run.mean_elapsed(),
        "frames": [
            {"result": frame_result_to(r), "state": session_state_to(s)}
            for r, s in zip(run.results, run.trace)
        ],
    }


def results_from_report(report: dict[str, Any]) -> list[FrameResult]:
    """Frame results from a run report, or from a bare list of results."""
    if isinstance(report, list):
        return [frame_result_from(v) for v in report]
    if "frames" in report:
        return [frame_result_from(f["result"]) for f in report["frames"]]
    if "frame_id" in report:
        return [frame_result_from(report)]
    raise ValueError("no frame results found in report")
