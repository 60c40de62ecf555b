import json

import numpy as np
import pytest

from dip.cli import main
from dip.imaging import ImageBuffer, load_image, save_image
from dip.pipeline import format_landmarks, read_landmarks, run_frame, run_session
from dip.serialize import (
    frame_result_from,
    frame_result_to,
    results_from_report,
    session_state_from,
    session_state_to,
    session_to,
)
from dip.synthetic import corpus, session_stream, water, write_stream

# --- detect -------------------------------------------------------------------------


@pytest.fixture
def planted(tmp_path):
    (s,) = corpus(1, seed=40)
    frame = tmp_path / "f.ppm"
    save_image(s.frame, frame)
    lm = tmp_path / "lm.txt"
    lm.write_text(format_landmarks(0, s.landmarks) + "\n")
    return s, frame, lm


def test_detect_json_exit0(planted, tmp_path, capsys):
    s, frame, lm = planted
    out = tmp_path / "ann.ppm"
    assert main(["detect", "--frame", str(frame), "--landmarks", str(lm), "--json", "--out", str(out)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["gate"] == "ok" and doc["detection"] is not None
    # round trip reproduces the in-memory result
    (_, parsed), = read_landmarks(lm)  # the file keeps 3 decimals
    r = run_frame(s.frame, parsed)
    back = frame_result_from(doc)
    assert (back.ray, back.aoi, back.detection) == (r.ray, r.aoi, r.detection)
    assert load_image(out).width == 640


def test_detect_no_pose_exit1(planted, tmp_path, capsys):
    _, frame, _ = planted
    lm = tmp_path / "none.txt"
    lm.write_text("0 -\n")
    assert main(["detect", "--frame", str(frame), "--landmarks", str(lm)]) == 1
    assert "gate=no_pose" in capsys.readouterr().out


def test_detect_missing_file_exit2(tmp_path, capsys):
    assert main(["detect", "--frame", str(tmp_path / "nope.ppm"), "--landmarks", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err


def test_detect_malformed_frame_exit2(planted, tmp_path):
    _, _, lm = planted
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P6\n10 10\n255\n\x00\x01")
    assert main(["detect", "--frame", str(bad), "--landmarks", str(lm)]) == 2


def test_bad_flag_exit2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["detect", "--frame"])
    assert e.value.code == 2


# --- run ----------------------------------------------------------------------------


def make_stream(tmp_path, **kw):
    stream, _ = session_stream(**kw)
    d = tmp_path / "frames"
    lm = tmp_path / "lm.txt"
    write_stream(d, stream, lm)
    return stream, d, lm


def test_run_confirms_at_seven(tmp_path, capsys):
    _, d, lm = make_stream(tmp_path, n=20, pose_from=4, object_from=7, seed=41)
    rep = tmp_path / "r.json"
    ann = tmp_path / "ann"
    code = main(["run", "--frames", str(d), "--landmarks", str(lm), "--report", str(rep), "--annotate", str(ann)])
    assert code == 0
    doc = json.loads(rep.read_text())
    assert doc["outcome"] == "confirmed" and doc["confirmed_frame"] == 7
    assert len(doc["frames"]) == 20 and doc["config"]["sf"] == 10.0
    assert len(list(ann.iterdir())) == 20
    out = capsys.readouterr().out
    assert "confirmed_frame\t7" in out and "mean_elapsed_ms" in out


def test_run_report_round_trip(tmp_path):
    _, d, lm = make_stream(tmp_path, n=10, pose_from=0, object_from=3, seed=42)
    rep = tmp_path / "r.json"
    main(["run", "--frames", str(d), "--landmarks", str(lm), "--report", str(rep)])
    doc = json.loads(rep.read_text())
    recs = read_landmarks(lm)
    run = run_session((fid, load_image(d / f"frame_{fid:06d}.ppm"), l) for fid, l in recs)
    mem = session_to(run)
    for a, b in zip(doc["frames"], mem["frames"]):
        a["result"]["elapsed_ms"] = b["result"]["elapsed_ms"] = 0
    assert doc["frames"] == mem["frames"]
    assert [session_state_from(f["state"]) for f in doc["frames"]] == run.trace
    assert [r.detection for r in results_from_report(doc)] == [r.detection for r in run.results]


def test_run_all_empty_exit1(tmp_path):
    _, d, lm = make_stream(tmp_path, n=6, pose_from=0, object_from=100, seed=43)
    rep = tmp_path / "r.json"
    assert main(["run", "--frames", str(d), "--landmarks", str(lm), "--report", str(rep)]) == 1
    assert json.loads(rep.read_text())["outcome"] == "unconfirmed"


def test_run_mismatched_stream_exit2(tmp_path):
    _, d, lm = make_stream(tmp_path, n=4, pose_from=0, object_from=1, seed=44)
    (d / "frame_000003.ppm").unlink()
    assert main(["run", "--frames", str(d), "--landmarks", str(lm), "--report", str(tmp_path / "r.json")]) == 2


def test_run_flag_overrides_config_file(tmp_path):
    _, d, lm = make_stream(tmp_path, n=3, pose_from=0, object_from=1, seed=45)
    cfg = tmp_path / "c.conf"
    cfg.write_text("sf = 4\nc = 60\n")
    rep = tmp_path / "r.json"
    main(["run", "--frames", str(d), "--landmarks", str(lm), "--report", str(rep), "--config", str(cfg), "--sf", "6"])
    conf = json.loads(rep.read_text())["config"]
    assert (conf["sf"], conf["c"], conf["eps"]) == (6.0, 60.0, 5.0)


# --- eval ---------------------------------------------------------------------------


def test_eval_angles_fixture(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["eval", "angles", "--out", str(out)]) == 0
    rows = {r["image_id"]: r for r in json.loads(out.read_text())["images"]}
    assert abs(rows["image1"]["difference"] - 0.147) <= 5e-4
    assert rows["image2"]["difference"] is None
    assert out.with_suffix(".png").stat().st_size > 0
    assert "---" in capsys.readouterr().out


def write_truth(path, scenes, ids):
    lines = ["frame_id,x_min,y_min,x_max,y_max,pose_correct"]
    for i, s in zip(ids, scenes):
        b = s.truth.object_box
        lines.append(f"{i},{b.x_min},{b.y_min},{b.x_max},{b.y_max},1")
    path.write_text("\n".join(lines) + "\n")


def test_eval_rates_perfect_set(tmp_path):
    scenes = corpus(20, seed=46)
    results = [frame_result_to(run_frame(s.frame, s.landmarks, frame_id=i)) for i, s in enumerate(scenes)]
    res = tmp_path / "res.json"
    res.write_text(json.dumps(results))
    truth = tmp_path / "t.csv"
    write_truth(truth, scenes, range(20))
    out = tmp_path / "rep.json"
    fig = tmp_path / "fig.png"
    assert main(["eval", "--results", str(res), "--truth", str(truth), "--out", str(out), "--figure", str(fig)]) == 0
    rep = json.loads(out.read_text())
    assert rep["pose_rate"] == rep["containment_rate"] == rep["detection_rate"] == 1.0
    assert fig.stat().st_size > 0


def test_eval_disjoint_ids_exit2(tmp_path, capsys):
    scenes = corpus(3, seed=47)
    res = tmp_path / "res.json"
    res.write_text(json.dumps([frame_result_to(run_frame(s.frame, s.landmarks, frame_id=i)) for i, s in enumerate(scenes)]))
    truth = tmp_path / "t.csv"
    write_truth(truth, scenes, [10, 11, 12])
    assert main(["eval", "--results", str(res), "--truth", str(truth), "--out", str(tmp_path / "o.json"), "--no-figure"]) == 2
    assert "join mismatch" in capsys.readouterr().err


def test_eval_rates_needs_inputs(tmp_path):
    assert main(["eval", "--out", str(tmp_path / "o.json")]) == 2


# --- simulate -----------------------------------------------------------------------


def test_simulate_ahead_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--scene", "ahead", "--log", str(a)]) == 0
    assert "outcome\tconverged" in capsys.readouterr().out
    assert main(["simulate", "--scene", "ahead.scene", "--log", str(b), "--no-figure"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".png").stat().st_size > 0


def test_simulate_render(tmp_path):
    d = tmp_path / "frames"
    code = main(["simulate", "--scene", "ahead", "--log", str(tmp_path / "t.csv"), "--render", str(d),
                 "--max-steps", "4", "--no-figure"])
    assert code == 1  # timeout within 4 steps
    assert len(list(d.iterdir())) == 4


def test_simulate_behind_not_converged(tmp_path):
    sc = tmp_path / "behind.scene"
    sc.write_text("object_x = 0\nobject_y = -4\n")
    assert main(["simulate", "--scene", str(sc), "--log", str(tmp_path / "t.csv"), "--no-figure"]) == 1


def test_simulate_invalid_scene_exit2(tmp_path):
    sc = tmp_path / "bad.scene"
    sc.write_text("object_size = -1\n")
    assert main(["simulate", "--scene", str(sc), "--log", str(tmp_path / "t.csv")]) == 2
    assert main(["simulate", "--scene", "nowhere", "--log", str(tmp_path / "t.csv")]) == 2


def test_unknown_config_key_exit2(tmp_path):
    assert main(["simulate", "--scene", "ahead", "--log", str(tmp_path / "t.csv"), "--set", "warp=9"]) == 2


# --- serialization ------------------------------------------------------------------


def test_frame_result_json_round_trip_exact():
    for s in corpus(10, seed=48):
        r = run_frame(s.frame, s.landmarks, frame_id=3)
        assert frame_result_from(json.loads(json.dumps(frame_result_to(r)))) == r
    blank = ImageBuffer(water(64, 48, np.random.default_rng(0)))
    r = run_frame(blank, None)
    assert frame_result_from(json.loads(json.dumps(frame_result_to(r)))) == r


def test_session_state_round_trip():
    stream, _ = session_stream(10, pose_from=2, object_from=4, seed=49)
    for s in run_session(stream).trace:
        assert session_state_from(json.loads(json.dumps(session_state_to(s)))) == s
