import pytest

from dip.config import KEYS, build_config, load_config
from dip.detection import Method
from dip.errors import ConfigError
from dip.kvfile import parse_kv_text


def test_defaults():
    cfg = build_config()
    assert (cfg.dip.sf, cfg.dip.c, cfg.dip.eps) == (10.0, 100.0, 5.0)
    assert cfg.detector.method is Method.CONTOUR
    assert cfg.control.target_ratio == 0.15 and cfg.tracker.bins == 16


def test_three_layer_precedence(tmp_path, monkeypatch):
    f = tmp_path / "c.conf"
    f.write_text("sf = 4\nc = 60\n# comment\nkp = 0.3\n")
    monkeypatch.delenv("DIP_CONFIG", raising=False)
    cfg = load_config(f, {"sf": "6"})
    assert cfg.dip.sf == 6.0  # flag beats file
    assert cfg.dip.c == 60.0  # file beats default
    assert cfg.dip.eps == 5.0  # default
    assert cfg.control.kp == 0.3


def test_env_var_default_path(tmp_path, monkeypatch):
    f = tmp_path / "env.conf"
    f.write_text("eps = 2\nmethod = keypoint\n")
    monkeypatch.setenv("DIP_CONFIG", str(f))
    cfg = load_config()
    assert cfg.dip.eps == 2.0 and cfg.detector.method is Method.KEYPOINT
    # an explicit path wins over the environment
    g = tmp_path / "g.conf"
    g.write_text("eps = 3\n")
    assert load_config(g).dip.eps == 3.0


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        build_config({"sff": 1})


@pytest.mark.parametrize(
    "layer",
    [{"sf": "zero"}, {"sf": "0"}, {"canny_low": "200"}, {"bins": "2.5"}, {"tracking": "perhaps"},
     {"method": "sift"}, {"target_ratio": "2"}, {"kp": "-1"}],
)
def test_invalid_values_rejected(layer):
    with pytest.raises(ConfigError):
        build_config(layer)


def test_flat_round_trip():
    cfg = build_config({"sf": 7, "restart_on_lost": "true", "max_steps": "300"})
    flat = cfg.flat()
    assert set(flat) == set(KEYS)
    assert build_config(flat) == cfg


def test_kv_parse_errors():
    with pytest.raises(ConfigError):
        parse_kv_text("sf 10\n")
    with pytest.raises(ConfigError):
        parse_kv_text("a = 1\na = 2\n")
    assert parse_kv_text("a = 1 # trailing\n\n# c\nb=x y\n") == {"a": "1", "b": "x y"}
