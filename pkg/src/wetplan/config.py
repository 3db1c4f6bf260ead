"""Flat ``key = value [unit]`` configuration files.

One setting per line; ``#`` starts a comment.  Dimensioned values may carry
a unit suffix (``10 uW``, ``2.4 GHz``, ``120 s``) and are stored in SI.
Without a suffix the SI unit is assumed.  Device positions are given
inline as ``devices = x1 y1; x2 y2; ...`` (metres) or generated from
``num_devices`` and ``seed``.

Example::

    num_devices = 64
    num_beacons = 15
    seed = 7
    e_th = 0.25 J
    p_sleep = 10 uW
"""
from __future__ import annotations

import dataclasses
import re
from pathlib import Path

import numpy as np

from .core import ActivationParams, EhParams, RadioParams, Scenario, default_scenario


class ConfigError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


_UNITS = {
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6, "µW": 1e-6, "μW": 1e-6, "kW": 1e3},
    "energy": {"J": 1.0, "mJ": 1e-3, "uJ": 1e-6, "µJ": 1e-6, "μJ": 1e-6},
    "time": {"s": 1.0, "ms": 1e-3, "min": 60.0, "h": 3600.0},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "km": 1e3},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
}

# key -> (dimension or None, target)
SCENARIO_KEYS = {
    "area_width": ("length", "scenario"),
    "area_height": ("length", "scenario"),
    "slot_duration": ("time", "scenario"),
    "e_max": ("energy", "scenario"),
    "e_th": ("energy", "scenario"),
    "p_max": ("power", "scenario"),
    "p_sleep": ("power", "scenario"),
    "p_active": ("power", "scenario"),
    "frequency": ("frequency", "radio"),
    "combined_gain": (None, "radio"),
    "pathloss_exponent": (None, "radio"),
    "d_min": ("length", "radio"),
    "eh_saturation": ("power", "eh"),
    "eh_c0": (None, "eh"),
    "eh_c1": (None, "eh"),
    "beta_a": (None, "activation"),
    "beta_b": (None, "activation"),
}
INT_KEYS = {"num_devices", "num_beacons", "seed"}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_VALUE_RE = re.compile(rf"^({_NUMBER})\s*([^\s\d].*)?$")


def read_pairs(path) -> list[tuple[str, str, int]]:
    """``(key, raw_value, line_number)`` triples; raises ConfigError on malformed lines."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config not found", path)
    pairs = []
    seen = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", path, lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", path, lineno)
        seen[key] = lineno
        pairs.append((key, value, lineno))
    return pairs


def parse_quantity(text: str, dimension: str | None) -> float:
    m = _VALUE_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse number from {text!r}")
    value, unit = float(m.group(1)), (m.group(2) or "").strip()
    if not unit:
        return value
    if dimension is None:
        raise ValueError(f"unexpected unit {unit!r} on a dimensionless value")
    table = _UNITS[dimension]
    if unit not in table:
        raise ValueError(f"unit {unit!r} is not a {dimension} unit (expected one of {', '.join(table)})")
    return value * table[unit]


def parse_devices(text: str) -> np.ndarray:
    rows = [r.strip() for r in text.split(";") if r.strip()]
    pts = []
    for r in rows:
        parts = r.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"device entry {r!r} must be 'x y'")
        pts.append([float(parts[0]), float(parts[1])])
    return np.array(pts, dtype=float)


def scenario_from_pairs(pairs, path=None, strict: bool = True) -> Scenario:
    """Build a Scenario from parsed pairs.  Unknown keys raise unless ``strict`` is False."""
    fields = {"scenario": {}, "radio": {}, "eh": {}, "activation": {}}
    ints = {}
    devices = None
    renames = {"eh_saturation": "saturation", "eh_c0": "c0", "eh_c1": "c1"}
    for key, value, lineno in pairs:
        try:
            if key in INT_KEYS:
                v = float(value)
                if v != int(v):
                    raise ValueError(f"{key} must be an integer, got {value!r}")
                ints[key] = int(v)
            elif key in SCENARIO_KEYS:
                dim, target = SCENARIO_KEYS[key]
                fields[target][renames.get(key, key)] = parse_quantity(value, dim)
            elif key == "devices":
                devices = parse_devices(value)
            elif strict:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(str(exc), path, lineno) from None

    line_of = {k: n for k, _, n in pairs}
    try:
        radio = RadioParams(**fields["radio"])
        eh = EhParams(**fields["eh"])
        activation = ActivationParams(**fields["activation"])
        common = dict(fields["scenario"], radio=radio, eh=eh, activation=activation)
        if devices is not None:
            if "num_devices" in ints and ints["num_devices"] != len(devices):
                raise ConfigError(
                    f"num_devices = {ints['num_devices']} but {len(devices)} positions given",
                    path, line_of["num_devices"],
                )
            base = Scenario(
                area_width=common.pop("area_width", 30.0),
                area_height=common.pop("area_height", 15.0),
                devices=devices,
                num_beacons=ints.get("num_beacons", min(15, len(devices))),
                **common,
            )
        else:
            base = default_scenario(
                ints.get("num_devices", 64), ints.get("num_beacons", 15), ints.get("seed", 0), **common
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid scenario: {exc}", path) from None
    return base


def load_scenario(path) -> Scenario:
    return scenario_from_pairs(read_pairs(path), path)


def scenario_to_text(scenario: Scenario, include_devices: bool = True) -> str:
    lines = [
        f"area_width = {scenario.area_width!r} m",
        f"area_height = {scenario.area_height!r} m",
        f"num_beacons = {scenario.num_beacons}",
        f"slot_duration = {scenario.slot_duration!r} s",
        f"e_max = {scenario.e_max!r} J",
        f"e_th = {scenario.e_th!r} J",
        f"p_max = {scenario.p_max!r} W",
        f"p_sleep = {scenario.p_sleep!r} W",
        f"p_active = {scenario.p_active!r} W",
        f"frequency = {scenario.radio.frequency!r} Hz",
        f"combined_gain = {scenario.radio.combined_gain!r}",
        f"pathloss_exponent = {scenario.radio.pathloss_exponent!r}",
        f"d_min = {scenario.radio.d_min!r} m",
        f"eh_saturation = {scenario.eh.saturation!r} W",
        f"eh_c0 = {scenario.eh.c0!r}",
        f"eh_c1 = {scenario.eh.c1!r}",
        f"beta_a = {scenario.activation.beta_a!r}",
        f"beta_b = {scenario.activation.beta_b!r}",
    ]
    if include_devices:
        lines.append("devices = " + "; ".join(f"{x!r} {y!r}" for x, y in scenario.devices.tolist()))
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(scenario_to_text(scenario), encoding="utf-8")


def scenario_fields(scenario: Scenario) -> dict:
    """JSON-friendly dict of every scenario parameter (devices as a list)."""
    out = {}
    for f in dataclasses.fields(scenario):
        v = getattr(scenario, f.name)
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif dataclasses.is_dataclass(v):
            v = dataclasses.asdict(v)
        out[f.name] = v
    return out
