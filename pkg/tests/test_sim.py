import dataclasses
import math

import numpy as np
import pytest

from dip.errors import ConfigError
from dip.sim import (
    ControlConfig,
    Outcome,
    RobotPose,
    SimScene,
    bundled_scene_path,
    load_scene,
    project_object,
    render,
    simulate_approach,
    write_trajectory,
)


def bundled(name):
    return load_scene(bundled_scene_path(name))


def distances(scene, result):
    return [math.hypot(scene.object_x - r.x, scene.object_y - r.y) for r in result.trajectory]


def test_ahead_converges_monotone():
    sc = bundled("ahead")
    res = simulate_approach(sc)
    assert res.outcome is Outcome.CONVERGED and res.steps <= 500
    d = distances(sc, res)
    # after a 5-step transient the range never grows
    assert all(b <= a + 1e-9 for a, b in zip(d[5:], d[6:]))
    assert d[-1] < d[0]
    assert abs(res.trajectory[-1].ratio - 0.15) <= 0.015


def test_offset30_converges_after_yaw_zero_crossing():
    sc = bundled("offset30")
    res = simulate_approach(sc)
    assert res.outcome is Outcome.CONVERGED
    yerr = [(r.bbox_x + r.bbox_w / 2 - sc.width / 2) / (sc.width / 2) for r in res.trajectory]
    assert yerr[0] > 0.5  # starts well to the right
    cross = next(i for i, e in enumerate(yerr) if e <= 0)
    first_conv = next(i for i, r in enumerate(res.trajectory) if abs(r.ratio - 0.15) <= 0.015)
    assert cross < first_conv
    # the robot turned right (clockwise heading grows) toward the object
    assert res.trajectory[cross].heading > 0


def test_teleport_is_lost():
    sc = dataclasses.replace(bundled("ahead"), teleport_step=20)
    res = simulate_approach(sc)
    assert res.outcome is Outcome.LOST and res.steps == 20


@pytest.mark.parametrize("xy", [(0.0, -4.0), (4.0, -0.5), (-3.0, -3.0)])
def test_object_behind_is_not_converged(xy):
    sc = dataclasses.replace(bundled("ahead"), object_x=xy[0], object_y=xy[1])
    assert simulate_approach(sc, max_steps=100).outcome in (Outcome.LOST, Outcome.TIMEOUT)


def test_timeout_when_budget_short():
    assert simulate_approach(bundled("ahead"), max_steps=5).outcome is Outcome.TIMEOUT


def test_deterministic_csv(tmp_path):
    sc = dataclasses.replace(bundled("offset30"), drift=0.01)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trajectory(simulate_approach(sc), a)
    write_trajectory(simulate_approach(sc), b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "step,x,y,heading,bbox_x,bbox_y,bbox_w,bbox_h,yaw,pitch,surge,ratio"


def test_render_matches_projection():
    sc = SimScene()
    rng = np.random.default_rng(0)
    for _ in range(50):
        pose = RobotPose(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
        obj = (rng.uniform(-1.5, 1.5), rng.uniform(2, 6))
        img, box = render(sc, pose, obj)
        if box is None:
            continue
        ys, xs = np.nonzero(np.all(img.data == sc.object_color, axis=2))
        assert (xs.min(), ys.min(), xs.max(), ys.max()) == (box.x_min, box.y_min, box.x_max, box.y_max)
        # analytic pinhole image of the object's centre
        rx, ry = obj[0] - pose.x, obj[1] - pose.y
        depth = rx * math.sin(pose.heading) + ry * math.cos(pose.heading)
        lateral = rx * math.cos(pose.heading) - ry * math.sin(pose.heading)
        u = 320 + sc.focal * lateral / depth
        half = sc.focal * sc.object_size / depth / 2
        if box.x_min > 0 and box.x_max < sc.width - 1:
            assert abs((box.x_min + box.x_max + 1) / 2 - u) <= 1
            assert abs((box.x_max - box.x_min + 1) - 2 * half) <= 1


def test_projection_behind_is_none():
    assert project_object(SimScene(), RobotPose(0, 0, 0), (0, -2)) is None


def test_focal_from_fov():
    sc = SimScene(fov_deg=90)
    assert sc.focal == pytest.approx(320.0)


def test_scene_errors(tmp_path):
    p = tmp_path / "bad.scene"
    p.write_text("object_x = 1\nwarp = 3\n")
    with pytest.raises(ConfigError):
        load_scene(p)
    p.write_text("fov_deg = 300\n")
    with pytest.raises(ConfigError):
        load_scene(p)
    p.write_text("object_color = 1 2\n")
    with pytest.raises(ConfigError):
        load_scene(p)


def test_bundled_name_forms():
    assert bundled_scene_path("ahead") == bundled_scene_path("ahead.scene")
    assert bundled("offset30").object_x == 2.0


def test_control_config_validation():
    with pytest.raises(ValueError):
        ControlConfig(target_ratio=1.2)
    with pytest.raises(ValueError):
        ControlConfig(kp=-1)
