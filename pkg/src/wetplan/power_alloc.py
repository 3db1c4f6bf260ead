"""Per-slot transmit-power allocation.

Two allocators share one result type:

* :func:`allocate_lp` solves the joint LP ``min sum(p)`` subject to every
  device reaching the energy target, ``0 <= p <= p_max``.  When no feasible
  power vector exists it minimises the total incident-power shortfall
  instead and then, among those minimisers, the sum power.
* :func:`allocate_approx` treats each cluster as isolated: its beacon serves
  the most demanding member alone, clamped to ``p_max``.

Shortfalls are always evaluated with the full gain matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import batteries_of
from .eh_channel import EPS_SAT, harvest_rate_inverse, harvested_energy
from .lp_solver import LpProblem, solve_lp

LP = "lp"
APPROX = "approx"
ALLOCATORS = (LP, APPROX)

TOL_ENERGY = 1e-9


@dataclass(eq=False)
class AllocationResult:
    powers: np.ndarray
    mode: str
    feasible: bool
    shortfall: np.ndarray
    sum_power: float
    saturated: np.ndarray
    lp_status: str = ""

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "feasible": bool(self.feasible),
            "sum_power_W": float(self.sum_power),
            "powers_W": [float(p) for p in self.powers],
            "shortfall_J": [float(s) for s in self.shortfall],
            "saturated": [int(j) for j in np.flatnonzero(self.saturated)],
        }


def demand_rates(batteries, e_th: float, slot_duration: float) -> np.ndarray:
    return np.maximum(e_th - np.asarray(batteries, dtype=float), 0.0) / slot_duration


def required_incident_powers(batteries, e_th: float, slot_duration: float, eh, eps_sat: float = EPS_SAT):
    """Vectorised incident-power demand.

    Returns ``(powers, saturated)``; demands at or beyond the saturation
    margin are clamped to the margin and flagged.
    """
    rate = demand_rates(batteries, e_th, slot_duration)
    cap = eh.saturation * (1 - eps_sat)
    saturated = rate >= cap
    # nextafter keeps the clamped value strictly inside the invertible range
    rate = np.where(saturated, np.nextafter(cap, 0.0), rate)
    return np.atleast_1d(harvest_rate_inverse(rate, eh, eps_sat=eps_sat)), saturated


def required_incident_power(device, e_th: float, slot_duration: float, eh, eps_sat: float = EPS_SAT) -> float:
    """Incident power (W) one device needs to end the slot at ``e_th``; 0 if already there."""
    battery = device.battery if hasattr(device, "battery") else float(device)
    powers, _ = required_incident_powers([battery], e_th, slot_duration, eh, eps_sat)
    return float(powers[0])


def is_saturated_demand(device, e_th: float, slot_duration: float, eh, eps_sat: float = EPS_SAT) -> bool:
    battery = device.battery if hasattr(device, "battery") else float(device)
    return bool(demand_rates([battery], e_th, slot_duration)[0] >= eh.saturation * (1 - eps_sat))


def projected_shortfall(powers, gains, batteries, scenario) -> np.ndarray:
    """Deficit to ``e_th`` after one slot, ignoring consumption."""
    harvest = harvested_energy(powers, gains, scenario.slot_duration, scenario.eh)
    return np.maximum(scenario.e_th - (batteries + harvest), 0.0)


def _result(powers, mode, gains, batteries, scenario, saturated, lp_status="") -> AllocationResult:
    powers = np.clip(np.asarray(powers, dtype=float), 0.0, scenario.p_max)
    short = projected_shortfall(powers, gains, batteries, scenario)
    return AllocationResult(
        powers=powers,
        mode=mode,
        feasible=bool(np.all(short <= TOL_ENERGY)),
        shortfall=short,
        sum_power=float(powers.sum()),
        saturated=saturated,
        lp_status=lp_status,
    )


def _check_dims(scenario, gains, batteries):
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (scenario.num_devices, scenario.num_beacons):
        raise ValueError(
            f"gain matrix shape {gains.shape} != ({scenario.num_devices}, {scenario.num_beacons})"
        )
    if batteries.shape != (scenario.num_devices,):
        raise ValueError(f"got {batteries.shape[0]} battery states for {scenario.num_devices} devices")
    return gains


def allocate_lp(scenario, gains, states, exact_fallback: bool = False) -> AllocationResult:
    """Joint minimum-sum-power allocation.

    With all gains strictly positive, an infeasible instance has the unique
    shortfall-minimiser ``p = p_max`` everywhere; this is used directly
    unless ``exact_fallback`` asks for the LP route.
    """
    batteries = batteries_of(states)
    gains = _check_dims(scenario, gains, batteries)
    demand, saturated = required_incident_powers(batteries, scenario.e_th, scenario.slot_duration, scenario.eh)
    nb = scenario.num_beacons
    active = demand > 0
    if not np.any(active):
        return _result(np.zeros(nb), LP, gains, batteries, scenario, saturated, "optimal")

    A = gains[active]
    d = demand[active]
    upper = np.full(nb, scenario.p_max)
    # nonnegative gains: p = p_max maximises every row, so it decides feasibility
    if np.all(A @ upper >= d * (1 - 1e-12)):
        # rows scaled to unit demand; same feasible set, better conditioning
        sol = solve_lp(LpProblem(np.ones(nb), A / d[:, None], np.ones(len(d)), upper))
        if sol.optimal:
            return _result(sol.x, LP, gains, batteries, scenario, saturated, sol.status)

    if not exact_fallback and np.all((A[A @ upper < d] > 0).any(axis=0)):
        powers = upper
    else:
        powers = shortfall_fallback(A, d, upper)
    return _result(powers, LP, gains, batteries, scenario, saturated, "infeasible")


def shortfall_fallback(A, demand, upper) -> np.ndarray:
    """Lexicographic LP: minimise total shortfall, then sum power.

    Variables are ``[p, s]`` with ``A p + s >= demand``, ``0 <= s <= demand``.
    """
    m, nb = A.shape
    scale = demand.max()
    Ad, dd = A / scale, demand / scale
    big_a = np.hstack([Ad, np.eye(m)])
    ub = np.concatenate([upper, dd])
    c1 = np.concatenate([np.zeros(nb), np.ones(m)])
    first = solve_lp(LpProblem(c1, big_a, dd, ub))
    best = first.objective
    # keep the shortfall at its optimum (with a little slack) and minimise power
    cap_row = np.concatenate([np.zeros(nb), -np.ones(m)])
    second = solve_lp(
        LpProblem(
            np.concatenate([np.ones(nb), np.zeros(m)]),
            np.vstack([big_a, cap_row]),
            np.append(dd, -(best + 1e-9 * (1 + best))),
            ub,
        )
    )
    x = second.x if second.optimal else first.x
    return x[:nb]


def allocate_approx(scenario, gains, deployment, states) -> AllocationResult:
    """Per-cluster closed form: the worst member's inverted demand, clamped to ``p_max``."""
    batteries = batteries_of(states)
    gains = _check_dims(scenario, gains, batteries)
    demand, saturated = required_incident_powers(batteries, scenario.e_th, scenario.slot_duration, scenario.eh)
    assignment = np.asarray(deployment.assignment)
    if assignment.shape != (scenario.num_devices,):
        raise ValueError("deployment assignment must cover every device")
    own = gains[np.arange(len(assignment)), assignment]
    need = demand / own
    powers = np.zeros(scenario.num_beacons)
    np.maximum.at(powers, assignment, need)
    return _result(np.minimum(powers, scenario.p_max), APPROX, gains, batteries, scenario, saturated)


def allocate(kind: str, scenario, gains, deployment, states) -> AllocationResult:
    if kind == LP:
        return allocate_lp(scenario, gains, states)
    if kind == APPROX:
        return allocate_approx(scenario, gains, deployment, states)
    raise ValueError(f"unknown allocator {kind!r}; expected one of {ALLOCATORS}")
