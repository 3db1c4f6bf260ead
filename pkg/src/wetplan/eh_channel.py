"""Path loss, incident-power aggregation and the sigmoid harvester.

The harvester constants were fitted on milliwatt data, so
:func:`harvest_rate` and :func:`harvest_rate_inverse` take and return watts
but evaluate the curve in milliwatts.  That conversion lives here only.
"""
from __future__ import annotations

import math

import numpy as np

from .core import EhParams, RadioParams

EPS_SAT = 1e-3
_MW = 1e3


class SaturationError(ValueError):
    """Requested harvest rate is at (or too close to) the saturation level."""


def path_gain(distance, radio: RadioParams):
    """Log-distance path gain ``G (lambda / 4 pi)^2 d^-n`` with the ``d_min`` floor.

    Accepts scalars or arrays.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be nonnegative")
    d = np.maximum(d, radio.d_min)
    k = radio.combined_gain * (radio.wavelength / (4 * math.pi)) ** 2
    g = k * d ** (-radio.pathloss_exponent)
    return float(g) if np.ndim(g) == 0 else g


def gain_matrix(devices, beacons, radio: RadioParams) -> np.ndarray:
    """Full ``(num_devices, num_beacons)`` matrix of path gains."""
    devices = np.asarray(devices, dtype=float).reshape(-1, 2)
    beacons = np.asarray(beacons, dtype=float).reshape(-1, 2)
    d = np.linalg.norm(devices[:, None, :] - beacons[None, :, :], axis=2)
    return np.atleast_2d(path_gain(d, radio))


def scenario_gains(scenario, deployment) -> np.ndarray:
    if len(deployment.beacon_positions) != scenario.num_beacons:
        raise ValueError(
            f"deployment has {len(deployment.beacon_positions)} beacons, scenario expects {scenario.num_beacons}"
        )
    return gain_matrix(scenario.devices, deployment.beacon_positions, scenario.radio)


def harvest_rate(incident_power, eh: EhParams):
    """Harvested DC power (W) for an incident RF power (W)."""
    x = np.asarray(incident_power, dtype=float) * _MW
    if np.any(x < 0):
        raise ValueError("incident power must be nonnegative")
    w = eh.saturation * _MW
    # -expm1(-c1 x) is 1 - e^{-c1 x} without cancellation near zero
    y = w * -np.expm1(-eh.c1 * x) / (1.0 + np.exp(-eh.c1 * (x - eh.c0)))
    y = y / _MW
    return float(y) if np.ndim(y) == 0 else y


def harvest_rate_derivative(incident_power, eh: EhParams):
    """d(harvest_rate)/d(incident_power), dimensionless (W per W)."""
    x = np.asarray(incident_power, dtype=float) * _MW
    w = eh.saturation * _MW
    u = np.exp(-eh.c1 * x)
    k = math.exp(eh.c0 * eh.c1)
    # G = w (1 - u) / (1 + k u), dG/dx = w c1 u (1 + k) / (1 + k u)^2
    g = w * eh.c1 * u * (1 + k) / (1 + k * u) ** 2
    return float(g) if np.ndim(g) == 0 else g


def harvest_rate_inverse(target_rate, eh: EhParams, eps_sat: float = EPS_SAT):
    """Incident power (W) needed to harvest ``target_rate`` (W).

    Raises :class:`SaturationError` when the target is within ``eps_sat``
    (relative) of the saturation level.
    """
    y = np.asarray(target_rate, dtype=float)
    if np.any(y < 0):
        raise ValueError("target rate must be nonnegative")
    if np.any(y >= eh.saturation * (1 - eps_sat)):
        raise SaturationError(
            f"target rate {np.max(y):.6g} W is beyond {1 - eps_sat:.4%} of saturation {eh.saturation:.6g} W"
        )
    y = y * _MW
    w = eh.saturation * _MW
    x = -np.log((w - y) / (y * math.exp(eh.c0 * eh.c1) + w)) / eh.c1
    x = x / _MW
    return float(x) if np.ndim(x) == 0 else x


def incident_power(powers, gains) -> np.ndarray:
    """Per-device incident power from per-beacon powers and a gain matrix (or one row)."""
    return np.asarray(gains, dtype=float) @ np.asarray(powers, dtype=float)


def harvested_energy(powers, device_row, slot_duration: float, eh: EhParams):
    """Energy (J) harvested over one slot.

    ``device_row`` may be a single gain row (scalar result) or a full gain
    matrix (one value per device).
    """
    powers = np.asarray(powers, dtype=float)
    if np.any(powers < 0):
        raise ValueError("powers must be nonnegative")
    rows = np.asarray(device_row, dtype=float)
    if rows.shape[-1] != powers.shape[0]:
        raise ValueError(f"gain row length {rows.shape[-1]} != number of powers {powers.shape[0]}")
    return slot_duration * harvest_rate(np.maximum(rows @ powers, 0.0), eh)
