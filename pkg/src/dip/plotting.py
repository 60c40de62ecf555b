"""Report figures rendered straight to image files (no display needed)."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from dip.evaluation import AngleRow, EvalReport  # noqa: E402
from dip.sim import SimResult  # noqa: E402


def _save(fig, path: str | os.PathLike) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_angles(rows: Sequence[AngleRow], path: str | os.PathLike) -> None:
    """Annotator mean vs algorithm angle per image, with the variance as error bars."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    xs = range(len(rows))
    ax.errorbar(xs, [r.mean for r in rows], yerr=[r.variance ** 0.5 for r in rows],
                fmt="o", capsize=3, label="annotator mean")
    dip = [(i, r.dip) for i, r in enumerate(rows) if r.dip is not None]
    if dip:
        ax.plot([i for i, _ in dip], [a for _, a in dip], "rx", markersize=8, label="DIP")
    ax.set_xticks(list(xs), [r.image_id for r in rows], rotation=30)
    ax.set_ylabel("angle (rad)")
    ax.legend()
    _save(fig, path)


def plot_rates(rep: EvalReport, path: str | os.PathLike) -> None:
    """Counts along the evaluation funnel."""
    labels = ["frames", "correct pose", "ray hits", "in AOI", "detected"]
    counts = [rep.n_frames, rep.n_pose_correct, rep.n_vector_hit, rep.n_contained, rep.n_detected]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bars = ax.bar(labels, counts, color=["#888", "#4a7", "#c64", "#47c", "#a4c"])
    for b, n in zip(bars, counts):
        ax.annotate(str(n), (b.get_x() + b.get_width() / 2, b.get_height()), ha="center", va="bottom")
    ax.set_ylabel("frames")
    _save(fig, path)


def plot_trajectory(result: SimResult, target_ratio: float, path: str | os.PathLike,
                    object_xy: tuple[float, float] | None = None) -> None:
    """Top-down path and the size ratio over time."""
    tr = result.trajectory
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
    a1.plot([r.x for r in tr], [r.y for r in tr], "-", lw=1.5)
    if tr:
        a1.plot(tr[0].x, tr[0].y, "go", label="start")
    if object_xy is not None:
        a1.plot(*object_xy, "rs", label="object")
    a1.set_aspect("equal", adjustable="datalim")
    a1.set_xlabel("x (m)")
    a1.set_ylabel("y (m)")
    a1.legend()
    a2.plot([r.step for r in tr], [r.ratio for r in tr], lw=1.5)
    a2.axhline(target_ratio, color="k", ls="--", lw=1)
    a2.set_xlabel("step")
    a2.set_ylabel("bbox / image area")
    a2.set_title(result.outcome.value)
    _save(fig, path)
