"""``dip`` command line: detect, run, eval, simulate.

Exit codes are shared by every command: 0 when something was detected or
the simulation converged, 1 for a clean run that found nothing, 2 for any
input or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from dip.config import CliConfig, load_config
from dip.errors import DipError, JoinMismatch
from dip.evaluation import (
    angle_report,
    angle_table_json,
    angle_table_text,
    containment_stats,
    load_annotations,
    load_ground_truth,
    report_text,
    write_json,
)
from dip.imaging.buffer import ImageBuffer
from dip.imaging.netpbm import load_image, save_image
from dip.pipeline import annotate, frame_filename, line_pixels, list_frames, read_landmarks, run_frame, run_session
from dip.serialize import frame_result_to, results_from_report, session_to
from dip.sim import Outcome, bundled_scene_path, load_scene, simulate_approach, write_trajectory

EXIT_OK, EXIT_NONE, EXIT_INPUT = 0, 1, 2
BUNDLED_DATA = Path(__file__).parent / "data"
ANGLE_FIXTURE = BUNDLED_DATA / "angle_study_annotations.csv"


class InputError(Exception):
    """Bad command-line input discovered after argument parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _config_args(p: argparse.ArgumentParser, pipeline: bool = True) -> None:
    p.add_argument("--config", help="key = value config file (default: $DIP_CONFIG)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key; repeatable")
    if pipeline:
        p.add_argument("--method", choices=["keypoint", "contour", "contour_then_keypoint"])
        p.add_argument("--sf", type=float, help="pointing scale factor")
        p.add_argument("--c", type=float, help="AOI half-height in pixels")
        p.add_argument("--eps", type=float, help="wrist vertex offset in pixels")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise InputError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    for key in ("method", "sf", "c", "eps", "max_steps", "restart_on_lost"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = str(v)
    return out


def _config(args: argparse.Namespace) -> CliConfig:
    return load_config(args.config, _overrides(args))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dip", description="Locate what a diver points at.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="one frame plus its landmarks")
    p.add_argument("--frame", required=True, help="PPM/PGM frame")
    p.add_argument("--landmarks", required=True, help="landmark file; the first record is used")
    p.add_argument("--out", help="write the annotated frame here (PPM)")
    p.add_argument("--json", action="store_true", help="print the full result as JSON")
    _config_args(p)

    p = sub.add_parser("run", help="a frame directory through the session state machine")
    p.add_argument("--frames", required=True, help="directory of frame_NNNNNN.ppm/pgm")
    p.add_argument("--landmarks", required=True)
    p.add_argument("--report", required=True, help="JSON report path")
    p.add_argument("--annotate", help="directory for annotated frames")
    p.add_argument("--restart-on-lost", dest="restart_on_lost", action="store_const", const=True,
                   help="re-detect after the tracker loses the object")
    _config_args(p)

    p = sub.add_parser("eval", help="containment/detection rates, or `eval angles` for the angle table")
    p.add_argument("mode", nargs="?", choices=["rates", "angles"], default="rates")
    p.add_argument("--results", help="JSON report from `dip run` (rates)")
    p.add_argument("--truth", help="ground-truth CSV (rates)")
    p.add_argument("--annotations", help="annotation CSV (angles; default: bundled fixture)")
    p.add_argument("--tolerance", type=float, default=10.0, help="detection box dilation, pixels")
    p.add_argument("--out", required=True, help="JSON output path")
    p.add_argument("--figure", help="figure path (default: next to --out as .png)")
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("simulate", help="closed-loop approach on a simulated scene")
    p.add_argument("--scene", required=True, help="scene file, or a bundled name such as ahead")
    p.add_argument("--log", required=True, help="trajectory CSV path")
    p.add_argument("--render", help="directory for rendered frames")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--figure", help="figure path (default: next to --log as .png)")
    p.add_argument("--no-figure", action="store_true")
    _config_args(p, pipeline=False)
    return parser


# --- commands ----------------------------------------------------------------


def cmd_detect(args) -> int:
    cfg = _config(args)
    frame = load_image(args.frame)
    records = read_landmarks(args.landmarks)
    if not records:
        raise InputError(f"{args.landmarks}: no landmark records")
    fid, lm = records[0]
    result = run_frame(frame, lm, cfg.dip, frame_id=fid)
    if args.out:
        save_image(annotate(frame, result), args.out)
    if args.json:
        print(json.dumps(frame_result_to(result), indent=2))
    else:
        det = result.detection
        where = "none" if det is None else f"{det.point.x:.1f},{det.point.y:.1f}"
        print(f"frame={fid}\tgate={result.gate.value}\tdetection={where}\telapsed_ms={result.elapsed:.2f}")
    return EXIT_OK if result.detection is not None else EXIT_NONE


def cmd_run(args) -> int:
    cfg = _config(args)
    records = read_landmarks(args.landmarks)
    frames = list_frames(args.frames)
    lm_ids = [fid for fid, _ in records]
    if set(lm_ids) != set(frames):
        only_f = sorted(set(frames) - set(lm_ids))[:5]
        only_l = sorted(set(lm_ids) - set(frames))[:5]
        raise InputError(f"frames and landmarks disagree: frames only {only_f}, landmarks only {only_l}")
    if not records:
        raise InputError("empty stream")
    annotate_dir = Path(args.annotate) if args.annotate else None
    if annotate_dir:
        annotate_dir.mkdir(parents=True, exist_ok=True)

    loaded: dict[int, ImageBuffer] = {}

    def stream():
        for fid, lm in records:
            img = load_image(frames[fid])
            if annotate_dir:
                loaded[fid] = img
            yield fid, img, lm

    run = run_session(stream(), cfg.dip)
    if annotate_dir:
        for r in run.results:
            out = annotate(loaded.pop(r.frame_id), r)
            save_image(out, annotate_dir / frame_filename(r.frame_id, out.channels))
    report = session_to(run)
    report["config"] = cfg.flat()
    write_json(report, args.report)
    final = run.final
    print(f"outcome\t{report['outcome']}")
    print(f"confirmed_frame\t{'-' if final.confirmed_frame is None else final.confirmed_frame}")
    print(f"frames\t{final.frames_processed}")
    print(f"mean_elapsed_ms\t{run.mean_elapsed():.2f}")
    return EXIT_OK if run.confirmed else EXIT_NONE


def _figure_path(args, anchor: str) -> Path | None:
    if args.no_figure:
        return None
    return Path(args.figure) if args.figure else Path(anchor).with_suffix(".png")


def cmd_eval(args) -> int:
    if args.mode == "angles":
        rows = angle_report(load_annotations(args.annotations or ANGLE_FIXTURE))
        write_json(angle_table_json(rows), args.out)
        print(angle_table_text(rows))
        fig = _figure_path(args, args.out)
        if fig:
            from dip.plotting import plot_angles

            plot_angles(rows, fig)
        return EXIT_OK
    if not args.results or not args.truth:
        raise InputError("eval needs --results and --truth (or use `dip eval angles`)")
    with open(args.results) as fh:
        try:
            results = results_from_report(json.load(fh))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise InputError(f"{args.results}: not a results report ({exc})") from None
    truth = load_ground_truth(args.truth)
    rep = containment_stats(results, truth, args.tolerance)
    write_json(rep.to_dict(), args.out)
    print(report_text(rep))
    fig = _figure_path(args, args.out)
    if fig:
        from dip.plotting import plot_rates

        plot_rates(rep, fig)
    return EXIT_OK


def _resolve_scene(name: str) -> Path:
    p = Path(name)
    if p.is_file():
        return p
    bundled = bundled_scene_path(p.name)
    if bundled.is_file():
        return bundled
    raise InputError(f"no scene file or bundled scene named {name!r}")


def _draw_window(img: ImageBuffer, r, color=(255, 255, 0)) -> ImageBuffer:
    data = img.data.copy()
    h, w = data.shape[:2]
    x0, y0, x1, y1 = int(r.bbox_x), int(r.bbox_y), int(r.bbox_x + r.bbox_w), int(r.bbox_y + r.bbox_h)
    for a, b in (((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)), ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))):
        for x, y in line_pixels(a, b):
            if 0 <= x < w and 0 <= y < h:
                data[y, x] = color
    return ImageBuffer(data)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    scene = load_scene(_resolve_scene(args.scene))
    result = simulate_approach(scene, cfg.control, tracker_cfg=cfg.tracker, keep_frames=bool(args.render))
    write_trajectory(result, args.log)
    if args.render:
        out = Path(args.render)
        out.mkdir(parents=True, exist_ok=True)
        for row, img in zip(result.trajectory, result.frames):
            save_image(_draw_window(img, row), out / frame_filename(row.step, 3))
    fig = _figure_path(args, args.log)
    if fig:
        from dip.plotting import plot_trajectory

        plot_trajectory(result, cfg.control.target_ratio, fig, (scene.object_x, scene.object_y))
    last = result.trajectory[-1].ratio if result.trajectory else float("nan")
    print(f"outcome\t{result.outcome.value}")
    print(f"steps\t{result.steps}")
    print(f"final_ratio\t{last:.4f}")
    return EXIT_OK if result.outcome is Outcome.CONVERGED else EXIT_NONE


COMMANDS = {"detect": cmd_detect, "run": cmd_run, "eval": cmd_eval, "simulate": cmd_simulate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DipError, InputError, OSError, ValueError) as exc:
        kind = "join mismatch" if isinstance(exc, JoinMismatch) else "error"
        print(f"dip {args.command}: {kind}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
