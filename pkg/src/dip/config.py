"""Plain-text ``key = value`` configuration with layered overrides.

Precedence is flag > file > default. Keys are flat; each maps onto one
field of one of the typed config dataclasses. Unknown keys and invalid
values are rejected before any work starts.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

from dip.detection import DetectorConfig, Method
from dip.errors import ConfigError
from dip.kvfile import parse_bool, parse_kv_file
from dip.pipeline import DipConfig
from dip.sim import ControlConfig
from dip.tracking import TrackerConfig

ENV_VAR = "DIP_CONFIG"


def coerce(value: Any, kind: type) -> Any:
    if not isinstance(value, str):
        return kind(value)
    if kind is bool:
        return parse_bool(value)
    if kind is int:
        f = float(value)
        if f != int(f):
            raise ValueError(f"not an integer: {value!r}")
        return int(f)
    return kind(value)


# section name -> dataclass; flat keys must be unique across sections
_SECTIONS = {
    "dip": DipConfig,
    "detector": DetectorConfig,
    "tracker": TrackerConfig,
    "control": ControlConfig,
}
_NESTED = {"detector", "tracker"}
_TYPES = {"float": float, "int": int, "bool": bool, "Method": Method, "str": str}


def _field_type(f: dataclasses.Field) -> type:
    t = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    return _TYPES.get(t, str)


def _key_table() -> dict[str, tuple[str, type]]:
    table = {}
    for section, cls in _SECTIONS.items():
        for f in dataclasses.fields(cls):
            if section == "dip" and f.name in _NESTED:
                continue
            if f.name in table:
                raise RuntimeError(f"config key {f.name!r} defined twice")
            table[f.name] = (section, _field_type(f))
    return table


KEYS = _key_table()


@dataclass(frozen=True)
class CliConfig:
    dip: DipConfig = field(default_factory=DipConfig)
    control: ControlConfig = field(default_factory=ControlConfig)

    @property
    def detector(self) -> DetectorConfig:
        return self.dip.detector

    @property
    def tracker(self) -> TrackerConfig:
        return self.dip.tracker

    def flat(self) -> dict[str, Any]:
        out = {}
        for key, (section, _) in KEYS.items():
            obj = {"dip": self.dip, "detector": self.detector, "tracker": self.tracker, "control": self.control}[section]
            v = getattr(obj, key)
            out[key] = v.value if isinstance(v, Method) else v
        return out


def build_config(*layers: Mapping[str, Any]) -> CliConfig:
    """Merge layers left to right (later wins) over the defaults and validate."""
    values: dict[str, dict[str, Any]] = {s: {} for s in _SECTIONS}
    for layer in layers:
        for key, raw in layer.items():
            if key not in KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            section, kind = KEYS[key]
            try:
                values[section][key] = coerce(raw, kind)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from None
    try:
        detector = DetectorConfig(**values["detector"])
        tracker = TrackerConfig(**values["tracker"])
        dip = DipConfig(detector=detector, tracker=tracker, **values["dip"])
        control = ControlConfig(**values["control"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return CliConfig(dip, control)


def load_config(path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None) -> CliConfig:
    """Defaults, then the file (``path`` or $DIP_CONFIG), then overrides."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    file_layer = parse_kv_file(path) if path else {}
    return build_config(file_layer, overrides or {})
