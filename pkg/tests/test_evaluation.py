import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dip.errors import EmptyInput, JoinMismatch, ParseError
from dip.evaluation import (
    Annotation,
    AnnotationSet,
    EvalReport,
    GroundTruth,
    angle_report,
    angle_table_text,
    box_intersects_triangle,
    containment_stats,
    load_annotations,
    load_ground_truth,
    report_text,
)
from dip.geometry import Point2, Rect, Triangle, angular_difference
from dip.pipeline import run_frame
from dip.synthetic import corpus

FIXTURE = resources.files("dip") / "data" / "angle_study_annotations.csv"


def write(tmp_path, text, name="f.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- loading ------------------------------------------------------------------------


def test_load_three_rows(tmp_path):
    p = write(tmp_path, "image_id,annotator_id,angle\na,1,0.5\na,2,0.6\nb,1,6.0\n")
    recs = load_annotations(p)
    assert recs == [Annotation("a", "1", 0.5), Annotation("a", "2", 0.6), Annotation("b", "1", 6.0)]


def test_angle_out_of_range(tmp_path):
    p = write(tmp_path, "image_id,annotator_id,angle\na,1,0.5\na,2,7.0\n")
    with pytest.raises(ParseError) as e:
        load_annotations(p)
    assert "line 3" in str(e.value)


def test_angle_not_numeric_and_bad_header(tmp_path):
    with pytest.raises(ParseError):
        load_annotations(write(tmp_path, "image_id,annotator_id,angle\na,1,north\n"))
    with pytest.raises(ParseError):
        load_annotations(write(tmp_path, "image,annotator,angle\na,1,0.1\n"))
    with pytest.raises(ParseError):
        load_annotations(write(tmp_path, ""))


def test_ground_truth_parsing(tmp_path):
    p = write(tmp_path, "frame_id,x_min,y_min,x_max,y_max,pose_correct\n0,1,2,30,40,true\n1,5,5,6,6,0\n")
    assert load_ground_truth(p) == [GroundTruth(0, Rect(1, 2, 30, 40), True), GroundTruth(1, Rect(5, 5, 6, 6), False)]


def test_ground_truth_errors(tmp_path):
    head = "frame_id,x_min,y_min,x_max,y_max,pose_correct\n"
    with pytest.raises(ParseError) as e:
        load_ground_truth(write(tmp_path, head + "0,1,2,30,40,maybe\n"))
    assert "line 2" in str(e.value)
    with pytest.raises(ParseError):
        load_ground_truth(write(tmp_path, head + "0,1,2,700,40,1\n"))
    with pytest.raises(ParseError):
        load_ground_truth(write(tmp_path, head + "0,1,2,3,4,1\n0,1,2,3,4,1\n"))


# --- angle report -------------------------------------------------------------------


def fixture_rows():
    return {r.image_id: r for r in angle_report(load_annotations(FIXTURE))}


def test_fixture_image1_and_image8():
    rows = fixture_rows()
    assert abs(rows["image1"].mean - 3.059) <= 5e-4 and abs(rows["image1"].difference - 0.147) <= 5e-4
    assert abs(rows["image8"].difference - 0.002) <= 5e-4
    assert abs(rows["image1"].variance - 0.008) <= 5e-4


def test_fixture_absent_entries():
    rows = fixture_rows()
    for img in ("image2", "image5", "image7"):
        assert rows[img].dip is None and rows[img].difference is None
    assert "---" in angle_table_text(list(rows.values()))


def test_fixture_means_and_variances_match_table():
    table = {  # mean, variance
        "image1": (3.059, 0.008), "image2": (3.198, 0.003), "image3": (2.849, 0.017), "image4": (1.097, 0.069),
        "image5": (0.357, 0.024), "image6": (2.717, 0.004), "image7": (1.249, 0.028), "image8": (0.286, 0.008),
    }
    rows = fixture_rows()
    for img, (m, v) in table.items():
        assert abs(rows[img].mean - m) <= 5e-4 and abs(rows[img].variance - v) <= 5e-4
        assert rows[img].n == 9


def test_wraparound_mean():
    rows = angle_report([AnnotationSet("w", (6.2, 0.1), 0.0)])
    assert rows[0].mean == pytest.approx((6.2 + 0.1 + 2 * math.pi) / 2 - 2 * math.pi, abs=1e-12)
    assert rows[0].difference == pytest.approx(abs(rows[0].mean), abs=1e-12)


def test_empty_inputs():
    with pytest.raises(EmptyInput):
        angle_report([])
    with pytest.raises(EmptyInput):
        angle_report([Annotation("a", "dip", 1.0)])


@given(st.floats(0, 2 * math.pi, exclude_max=True), st.floats(0, 2 * math.pi, exclude_max=True))
def test_difference_symmetric(a, b):
    assert angular_difference(a, b) == angular_difference(b, a)
    (r,) = angle_report([AnnotationSet("x", (a,), a)])
    assert r.difference == 0.0


# --- rates --------------------------------------------------------------------------


def test_published_count_fixtures():
    rep = EvalReport.from_counts(650, 349, 345, 74, 345 - 13)
    assert round(rep.containment_rate, 4) == 0.9885
    assert round(rep.vector_hit_rate, 3) == 0.212
    assert rep.detection_rate == pytest.approx(332 / 345)
    assert rep.pose_rate == pytest.approx(349 / 650)


def test_chain_violation():
    with pytest.raises(ValueError):
        EvalReport.from_counts(10, 11, 5, 1, 1)
    with pytest.raises(ValueError):
        EvalReport.from_counts(10, 8, 5, 1, 6)
    with pytest.raises(ValueError):
        EvalReport.from_counts(10, 8, 5, 9, 1)


@given(st.integers(0, 50), st.data())
def test_rates_bounded_and_chain(n, data):
    p = data.draw(st.integers(0, n))
    c = data.draw(st.integers(0, p))
    d = data.draw(st.integers(0, c))
    h = data.draw(st.integers(0, p))
    rep = EvalReport.from_counts(n, p, c, h, d)
    for r in (rep.pose_rate, rep.containment_rate, rep.vector_hit_rate, rep.detection_rate, rep.intersection_rate):
        assert 0 <= r <= 1


def truth_for(scenes, pose_correct=True):
    return [GroundTruth(i, s.truth.object_box, pose_correct) for i, s in enumerate(scenes)]


def test_synthetic_perfect_set():
    # every planted object lies inside its AOI on a clean background
    scenes = corpus(100, seed=30)
    results = [run_frame(s.frame, s.landmarks, frame_id=i) for i, s in enumerate(scenes)]
    rep = containment_stats(results, truth_for(scenes))
    assert rep.containment_rate == 1.0 and rep.intersection_rate == 1.0
    assert rep.detection_rate == 1.0 and rep.pose_rate == 1.0
    assert rep.containment_rate >= rep.vector_hit_rate
    assert "object in AOI" in report_text(rep)


def test_pose_incorrect_frames_excluded():
    scenes = corpus(5, seed=31)
    results = [run_frame(s.frame, s.landmarks, frame_id=i) for i, s in enumerate(scenes)]
    rep = containment_stats(results, truth_for(scenes, False))
    assert rep.n_pose_correct == 0 and rep.containment_rate == 0.0


def test_join_mismatch():
    scenes = corpus(3, seed=32)
    results = [run_frame(s.frame, s.landmarks, frame_id=i + 10) for i, s in enumerate(scenes)]
    with pytest.raises(JoinMismatch):
        containment_stats(results, truth_for(scenes))


def test_box_triangle_intersection_cases():
    t = Triangle(Point2(0, 0), Point2(100, 0), Point2(0, 100))
    assert box_intersects_triangle(Rect(10, 10, 20, 20), t)  # inside
    assert box_intersects_triangle(Rect(-50, -50, 200, 200), t)  # contains triangle
    assert box_intersects_triangle(Rect(45, -10, 55, 10), t)  # crosses an edge
    assert not box_intersects_triangle(Rect(80, 80, 90, 90), t)


def test_box_triangle_intersection_sampling_oracle():
    rng = np.random.default_rng(33)
    from dip.geometry import point_in_triangle

    for _ in range(300):
        v = rng.uniform(0, 60, 6)
        t = Triangle(Point2(v[0], v[1]), Point2(v[2], v[3]), Point2(v[4], v[5]))
        x0, y0 = rng.uniform(0, 55, 2)
        b = Rect(x0, y0, x0 + rng.uniform(0.5, 10), y0 + rng.uniform(0.5, 10))
        xs = np.linspace(b.x_min, b.x_max, 25)
        ys = np.linspace(b.y_min, b.y_max, 25)
        if any(point_in_triangle(Point2(x, y), t) for x in xs for y in ys):
            assert box_intersects_triangle(b, t)


def test_containment_dominates_vector_hit_on_corpus():
    scenes = corpus(60, seed=34)
    results = [run_frame(s.frame, s.landmarks, frame_id=i) for i, s in enumerate(scenes)]
    rep = containment_stats(results, truth_for(scenes))
    assert rep.containment_rate >= rep.vector_hit_rate
    assert rep.containment_rate == 1.0
