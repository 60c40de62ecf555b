"""Angle agreement with human annotators, and containment / hit / detection rates.

Annotation CSV: ``image_id,annotator_id,angle`` with angles in radians in
[0, 2*pi). Rows whose annotator_id is ``dip`` carry the algorithm's own
angle for that image; images without such a row have no DIP angle.

Ground-truth CSV: ``frame_id,x_min,y_min,x_max,y_max,pose_correct``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

from dip.errors import EmptyInput, JoinMismatch, ParseError
from dip.geometry import (
    TWO_PI,
    Point2,
    Rect,
    Triangle,
    angular_difference,
    branch_mean,
    circular_variance,
    point_in_triangle,
    segment_intersects_rect,
)
from dip.pipeline import FrameResult

DIP_ANNOTATOR = "dip"
ANNOTATION_HEADER = ["image_id", "annotator_id", "angle"]
TRUTH_HEADER = ["frame_id", "x_min", "y_min", "x_max", "y_max", "pose_correct"]


@dataclass(frozen=True)
class Annotation:
    image_id: str
    annotator_id: str
    angle: float


@dataclass(frozen=True)
class AnnotationSet:
    image_id: str
    angles: tuple[float, ...]
    dip_angle: float | None = None


@dataclass(frozen=True)
class AngleRow:
    image_id: str
    n: int
    mean: float
    dip: float | None
    difference: float | None
    variance: float


@dataclass(frozen=True)
class GroundTruth:
    frame_id: int
    object_box: Rect
    pose_correct: bool


@dataclass(frozen=True)
class EvalReport:
    n_frames: int
    n_pose_correct: int
    n_contained: int
    n_intersecting: int
    n_vector_hit: int
    n_detected: int
    pose_rate: float
    containment_rate: float
    intersection_rate: float
    vector_hit_rate: float
    detection_rate: float

    @classmethod
    def from_counts(cls, n_frames, n_pose_correct, n_contained, n_vector_hit, n_detected, n_intersecting=None):
        """Rates follow the conditioning chain frames > correct pose > contained > detected."""
        if n_intersecting is None:
            n_intersecting = n_contained
        if not n_frames >= n_pose_correct >= n_contained >= n_detected >= 0:
            raise ValueError("counts violate the conditioning chain")
        if not (0 <= n_vector_hit <= n_pose_correct and n_contained <= n_intersecting <= n_pose_correct):
            raise ValueError("hit/intersection counts out of range")

        def ratio(a, b):
            return a / b if b else 0.0

        return cls(
            n_frames, n_pose_correct, n_contained, n_intersecting, n_vector_hit, n_detected,
            ratio(n_pose_correct, n_frames),
            ratio(n_contained, n_pose_correct),
            ratio(n_intersecting, n_pose_correct),
            ratio(n_vector_hit, n_pose_correct),
            ratio(n_detected, n_contained),
        )

    def to_dict(self) -> dict:
        return asdict(self)


# --- loading ---------------------------------------------------------------


def _rows(path: str | os.PathLike, header: list[str]):
    """Yield (line number, fields) after checking the header; '#' lines are comments."""
    seen_header = False
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            row = [c.strip() for c in next(csv.reader([line]))]
            if not seen_header:
                if row != header:
                    raise ParseError(f"expected header {','.join(header)}", lineno)
                seen_header = True
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
            yield lineno, row
    if not seen_header:
        raise ParseError("empty file", 1)


def load_annotations(path: str | os.PathLike) -> list[Annotation]:
    out = []
    for lineno, (image_id, annotator, angle) in _rows(path, ANNOTATION_HEADER):
        try:
            a = float(angle)
        except ValueError:
            raise ParseError(f"angle {angle!r} is not a number", lineno) from None
        if not (math.isfinite(a) and 0.0 <= a < TWO_PI):
            raise ParseError(f"angle {a} outside [0, 2pi)", lineno)
        if not image_id or not annotator:
            raise ParseError("empty image or annotator id", lineno)
        out.append(Annotation(image_id, annotator, a))
    return out


def _parse_bool(v: str, lineno: int) -> bool:
    lv = v.lower()
    if lv in ("1", "true", "yes"):
        return True
    if lv in ("0", "false", "no"):
        return False
    raise ParseError(f"pose_correct {v!r} is not a boolean", lineno)


def load_ground_truth(path: str | os.PathLike, width: int = 640, height: int = 480) -> list[GroundTruth]:
    out = []
    seen = set()
    for lineno, row in _rows(path, TRUTH_HEADER):
        try:
            fid = int(row[0])
            x0, y0, x1, y1 = (float(v) for v in row[1:5])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        pose = _parse_bool(row[5], lineno)
        if fid in seen:
            raise ParseError(f"duplicate frame_id {fid}", lineno)
        seen.add(fid)
        if not (0 <= x0 <= x1 <= width - 1 and 0 <= y0 <= y1 <= height - 1):
            raise ParseError(f"object box outside {width}x{height} frame", lineno)
        out.append(GroundTruth(fid, Rect(x0, y0, x1, y1), pose))
    return out


def group_annotations(records: Iterable[Annotation]) -> list[AnnotationSet]:
    """Group by image in first-seen order; ``dip`` rows become the DIP angle."""
    angles: dict[str, list[float]] = {}
    dip: dict[str, float] = {}
    for r in records:
        if r.annotator_id == DIP_ANNOTATOR:
            dip[r.image_id] = r.angle
            angles.setdefault(r.image_id, [])
        else:
            angles.setdefault(r.image_id, []).append(r.angle)
    return [AnnotationSet(img, tuple(a), dip.get(img)) for img, a in angles.items()]


# --- metrics -----------------------------------------------------------------


def angle_report(sets: Sequence[AnnotationSet] | Iterable[Annotation]) -> list[AngleRow]:
    sets = list(sets)
    if sets and isinstance(sets[0], Annotation):
        sets = group_annotations(sets)
    if not sets:
        raise EmptyInput("no annotations")
    rows = []
    for s in sets:
        if not s.angles:
            raise EmptyInput(f"image {s.image_id} has no human annotations")
        mean = branch_mean(s.angles)
        diff = None if s.dip_angle is None else angular_difference(mean, s.dip_angle)
        rows.append(AngleRow(s.image_id, len(s.angles), mean, s.dip_angle, diff, circular_variance(s.angles)))
    return rows


def box_intersects_triangle(box: Rect, t: Triangle) -> bool:
    corners = [Point2(box.x_min, box.y_min), Point2(box.x_max, box.y_min),
               Point2(box.x_max, box.y_max), Point2(box.x_min, box.y_max)]
    if any(point_in_triangle(c, t) for c in corners):
        return True
    if any(box.contains(v) for v in t.vertices):
        return True
    return any(segment_intersects_rect(a, b, box) for a, b in t.edges())


def containment_stats(
    results: Sequence[FrameResult], truth: Sequence[GroundTruth], tolerance: float = 10.0
) -> EvalReport:
    """Pose-conditioned containment, vector-hit and detection counts.

    Containment means the object box centre lies in the triangle; the
    looser box/triangle overlap is reported alongside. Detection counts
    only frames that are contained and whose detected point falls in the
    box dilated by ``tolerance`` pixels.
    """
    by_id = {r.frame_id: r for r in results}
    truth_ids = {g.frame_id for g in truth}
    missing = sorted(truth_ids - by_id.keys())
    extra = sorted(by_id.keys() - truth_ids)
    if missing or extra:
        raise JoinMismatch(f"frame ids without results {missing[:5]}, without truth {extra[:5]}")
    n_pose = n_cont = n_inter = n_hit = n_det = 0
    for g in truth:
        if not g.pose_correct:
            continue
        n_pose += 1
        r = by_id[g.frame_id]
        if r.aoi is None:
            continue
        contained = point_in_triangle(g.object_box.center, r.aoi)
        n_cont += contained
        n_inter += contained or box_intersects_triangle(g.object_box, r.aoi)
        n_hit += segment_intersects_rect(r.ray.wrist, r.ray.ext, g.object_box)
        if contained and r.detection is not None and g.object_box.dilate(tolerance).contains(r.detection.point):
            n_det += 1
    return EvalReport.from_counts(len(truth), n_pose, n_cont, n_hit, n_det, n_inter)


# --- output ------------------------------------------------------------------


def angle_table_json(rows: Sequence[AngleRow]) -> dict:
    return {"images": [asdict(r) for r in rows]}


def _fmt(v: float | None) -> str:
    return "---" if v is None else f"{v:.3f}"


def angle_table_text(rows: Sequence[AngleRow]) -> str:
    lines = [f"{'image':<10} {'mean':>8} {'dip':>8} {'diff':>8} {'variance':>9}"]
    for r in rows:
        lines.append(f"{r.image_id:<10} {_fmt(r.mean):>8} {_fmt(r.dip):>8} {_fmt(r.difference):>8} {r.variance:>9.4f}")
    return "\n".join(lines)


def report_text(rep: EvalReport) -> str:
    return "\n".join([
        f"frames               {rep.n_frames}",
        f"correct pose         {rep.n_pose_correct:>5}  ({rep.pose_rate:.2%} of frames)",
        f"object in AOI        {rep.n_contained:>5}  ({rep.containment_rate:.2%} of correct pose)",
        f"object touches AOI   {rep.n_intersecting:>5}  ({rep.intersection_rate:.2%} of correct pose)",
        f"ray hits object      {rep.n_vector_hit:>5}  ({rep.vector_hit_rate:.2%} of correct pose)",
        f"object detected      {rep.n_detected:>5}  ({rep.detection_rate:.2%} of contained)",
    ])


def write_json(obj, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
