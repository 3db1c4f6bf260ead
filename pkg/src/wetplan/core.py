"""Scenario data model shared by every other module.

All stored quantities are SI base units (W, J, s, m, Hz).  The only place
where milliwatts appear is inside :mod:`wetplan.eh_channel`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s, rounded so that 2.4 GHz gives a 0.125 m wavelength


@dataclass(frozen=True)
class RadioParams:
    frequency: float = 2.4e9
    combined_gain: float = 24.0
    pathloss_exponent: float = 2.7
    d_min: float = 0.25

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if not self.combined_gain > 0:
            raise ValueError(f"combined_gain must be positive, got {self.combined_gain}")
        if not self.pathloss_exponent >= 2:
            raise ValueError(f"pathloss_exponent must be >= 2, got {self.pathloss_exponent}")
        if not self.d_min > 0:
            raise ValueError(f"d_min must be positive, got {self.d_min}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


@dataclass(frozen=True)
class EhParams:
    """Sigmoid harvester constants.  ``saturation`` is in watts."""

    saturation: float = 10.73e-3
    c0: float = 5.365
    c1: float = 0.2308

    def __post_init__(self):
        for name in ("saturation", "c0", "c1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class ActivationParams:
    beta_a: float = 0.5
    beta_b: float = 0.5

    def __post_init__(self):
        if not (self.beta_a > 0 and self.beta_b > 0):
            raise ValueError(f"Beta shapes must be positive, got ({self.beta_a}, {self.beta_b})")


@dataclass
class DeviceState:
    """Mutable per-device state; owned by the simulation loop."""

    battery: float
    activation: float = 0.0

    def validate(self, e_max: float) -> None:
        if not 0.0 <= self.battery <= e_max:
            raise ValueError(f"battery {self.battery} outside [0, {e_max}]")
        if not 0.0 <= self.activation <= 1.0:
            raise ValueError(f"activation {self.activation} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class Scenario:
    area_width: float
    area_height: float
    devices: np.ndarray
    num_beacons: int
    slot_duration: float = 120.0
    e_max: float = 1.0
    e_th: float = 0.25
    p_max: float = 4.0
    p_sleep: float = 10e-6
    p_active: float = 1e-3
    radio: RadioParams = field(default_factory=RadioParams)
    eh: EhParams = field(default_factory=EhParams)
    activation: ActivationParams = field(default_factory=ActivationParams)

    def __post_init__(self):
        devices = np.array(self.devices, dtype=float).reshape(-1, 2)
        devices.setflags(write=False)
        object.__setattr__(self, "devices", devices)
        object.__setattr__(self, "num_beacons", int(self.num_beacons))
        self.validate()

    @property
    def num_devices(self) -> int:
        return self.devices.shape[0]

    def validate(self) -> None:
        if not (self.area_width > 0 and self.area_height > 0):
            raise ValueError("area dimensions must be positive")
        if self.num_devices == 0:
            raise ValueError("scenario needs at least one device")
        if not np.all(np.isfinite(self.devices)):
            raise ValueError("device positions must be finite")
        x, y = self.devices[:, 0], self.devices[:, 1]
        if np.any(x < 0) or np.any(x > self.area_width) or np.any(y < 0) or np.any(y > self.area_height):
            raise ValueError("device positions must lie inside the area")
        if not 0 < self.e_th <= self.e_max:
            raise ValueError(f"need 0 < e_th <= e_max, got e_th={self.e_th}, e_max={self.e_max}")
        if not self.slot_duration > 0:
            raise ValueError("slot_duration must be positive")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not self.p_active >= self.p_sleep >= 0:
            raise ValueError("need p_active >= p_sleep >= 0")
        if not 1 <= self.num_beacons <= self.num_devices:
            raise ValueError(
                f"num_beacons must be in [1, {self.num_devices}], got {self.num_beacons}"
            )

    def with_devices(self, devices) -> Scenario:
        return replace(self, devices=np.asarray(devices, dtype=float))

    def with_updates(self, **changes) -> Scenario:
        return replace(self, **changes)


def uniform_positions(n: int, width: float, height: float, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(n, 2)) * np.array([width, height])


def default_scenario(num_devices: int = 64, num_beacons: int = 15, seed: int = 0, **overrides) -> Scenario:
    """Build a scenario with the default parameter table and uniform random devices.

    ``overrides`` are passed straight to :class:`Scenario` (e.g. ``e_th=0.35``).
    """
    if num_devices < 1:
        raise ValueError(f"num_devices must be positive, got {num_devices}")
    if not 1 <= num_beacons <= num_devices:
        raise ValueError(f"num_beacons must be in [1, num_devices={num_devices}], got {num_beacons}")
    width = overrides.pop("area_width", 30.0)
    height = overrides.pop("area_height", 15.0)
    rng = np.random.default_rng(seed)
    devices = uniform_positions(num_devices, width, height, rng)
    return Scenario(
        area_width=width,
        area_height=height,
        devices=devices,
        num_beacons=num_beacons,
        **overrides,
    )


def initial_states(batteries, activations=None) -> list[DeviceState]:
    batteries = np.asarray(batteries, dtype=float)
    if activations is None:
        activations = np.zeros_like(batteries)
    return [DeviceState(float(b), float(a)) for b, a in zip(batteries, activations)]


def batteries_of(states) -> np.ndarray:
    """Battery vector from a list of DeviceState or an array of levels."""
    if isinstance(states, np.ndarray):
        return states.astype(float)
    return np.array([s.battery if isinstance(s, DeviceState) else float(s) for s in states])
