"""Multi-slot battery simulation and Monte Carlo outage estimation.

Within a slot the order is: draw activations, classify outage against the
battery at slot start, allocate powers from the current batteries, harvest
with the full gain matrix, then update.  A device in outage drains what it
has (at most its demand) and keeps harvesting, so batteries stay in
``[0, e_max]``.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import K_CHEBYSHEV, KMEANS_MEAN, deploy_beacons
from .core import DeviceState, uniform_positions
from .eh_channel import harvested_energy, scenario_gains
from .power_alloc import allocate

DEFAULT_SLOTS = 20
DEFAULT_WARMUP = 5


@dataclass
class SlotRecord:
    slot_index: int
    sum_power: float
    outage_count: int
    per_device_battery: np.ndarray
    battery_before: np.ndarray | None = None
    activations: np.ndarray | None = None
    powers: np.ndarray | None = None
    harvested: np.ndarray | None = None
    consumed: np.ndarray | None = None
    outage: np.ndarray | None = None


@dataclass
class SimulationReport:
    trials: int
    slots_per_trial: int
    warmup: int
    mean_sum_power: float
    outage_probability: float
    stderr_outage: float
    stderr_power: float
    per_trial_outage: np.ndarray = field(repr=False, default=None)
    per_trial_power: np.ndarray = field(repr=False, default=None)
    per_slot_records: list | None = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "slots_per_trial": self.slots_per_trial,
            "warmup": self.warmup,
            "mean_sum_power_W": self.mean_sum_power,
            "outage_probability": self.outage_probability,
            "stderr_outage": self.stderr_outage,
            "stderr_power": self.stderr_power,
        }


def sample_activation(params, rng: np.random.Generator, size=None):
    """Beta-distributed active fraction of a slot."""
    return rng.beta(params.beta_a, params.beta_b, size=size)


def consumed_energy(alpha, slot_duration: float, p_sleep: float, p_active: float):
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > 1):
        raise ValueError("activation fraction must be in [0, 1]")
    e = slot_duration * ((1 - alpha) * p_sleep + alpha * p_active)
    return float(e) if np.ndim(e) == 0 else e


def advance(scenario, gains, deployment, batteries, alpha, allocator: str):
    """Array-level slot update.

    Returns ``(new_batteries, outage_mask, allocation, harvested, consumed)``.
    """
    demand = consumed_energy(alpha, scenario.slot_duration, scenario.p_sleep, scenario.p_active)
    outage = batteries < demand
    alloc = allocate(allocator, scenario, gains, deployment, batteries)
    harvest = harvested_energy(alloc.powers, gains, scenario.slot_duration, scenario.eh)
    consumed = np.where(outage, np.minimum(batteries, demand), demand)
    new = np.minimum(batteries + harvest - consumed, scenario.e_max)
    new = np.maximum(new, 0.0)
    return new, outage, alloc, harvest, consumed


def step_slot(scenario, gains, deployment, states, allocator: str, rng: np.random.Generator, slot_index: int = 0) -> SlotRecord:
    """Advance ``states`` (a list of :class:`DeviceState`, updated in place) by one slot."""
    batteries = np.array([s.battery for s in states], dtype=float)
    alpha = sample_activation(scenario.activation, rng, size=len(states))
    new, outage, alloc, harvest, consumed = advance(scenario, gains, deployment, batteries, alpha, allocator)
    for s, b, a in zip(states, new, alpha):
        s.battery = float(b)
        s.activation = float(a)
    return SlotRecord(
        slot_index=slot_index,
        sum_power=alloc.sum_power,
        outage_count=int(outage.sum()),
        per_device_battery=new,
        battery_before=batteries,
        activations=alpha,
        powers=alloc.powers,
        harvested=harvest,
        consumed=consumed,
        outage=outage,
    )


def _deployer_flag(deployer: str) -> bool:
    aliases = {K_CHEBYSHEV: True, "chebyshev": True, KMEANS_MEAN: False, "mean": False}
    if deployer not in aliases:
        raise ValueError(f"unknown deployer {deployer!r}")
    return aliases[deployer]


def run_trial(scenario, deployer: str, allocator: str, slots: int, warmup: int, seed_seq,
              redraw_positions: bool = True, initial_battery=None, keep_records: bool = False):
    """One independent trial.  Returns ``(outages, sum_power_total, records)`` over counted slots."""
    place_ss, deploy_ss, battery_ss, act_ss = seed_seq.spawn(4)
    if redraw_positions:
        pos = uniform_positions(scenario.num_devices, scenario.area_width, scenario.area_height,
                                np.random.default_rng(place_ss))
        scenario = scenario.with_devices(pos)
    deploy_seed = int(deploy_ss.generate_state(1)[0])
    deployment = deploy_beacons(scenario, seed=deploy_seed, use_chebyshev=_deployer_flag(deployer))
    gains = scenario_gains(scenario, deployment)
    if initial_battery is None:
        batteries = np.random.default_rng(battery_ss).uniform(0.0, scenario.e_max, scenario.num_devices)
    else:
        batteries = np.full(scenario.num_devices, float(initial_battery))
    rng = np.random.default_rng(act_ss)
    outages = 0
    power = 0.0
    records = [] if keep_records else None
    for t in range(slots):
        alpha = sample_activation(scenario.activation, rng, size=scenario.num_devices)
        new, outage, alloc, harvest, consumed = advance(scenario, gains, deployment, batteries, alpha, allocator)
        if t >= warmup:
            outages += int(outage.sum())
            power += alloc.sum_power
        if keep_records:
            records.append(SlotRecord(t, alloc.sum_power, int(outage.sum()), new, batteries, alpha,
                                      alloc.powers, harvest, consumed, outage))
        batteries = new
    return outages, power, records


def _trial_job(args):
    return run_trial(*args)


def run_monte_carlo(scenario, deployer: str = K_CHEBYSHEV, allocator: str = "lp", trials: int = 100,
                    slots: int = DEFAULT_SLOTS, seed: int = 0, warmup: int = DEFAULT_WARMUP,
                    redraw_positions: bool = True, initial_battery=None, workers: int = 1,
                    keep_records: bool = False) -> SimulationReport:
    """Estimate outage probability and mean sum power over independent trials.

    Trial ``k`` draws everything from the ``k``-th child of
    ``SeedSequence(seed)``, so aggregates do not depend on ``workers``.
    ``warmup`` is capped at ``slots - 1``.
    """
    if trials < 1 or slots < 1:
        raise ValueError("trials and slots must be >= 1")
    warmup = max(0, min(warmup, slots - 1))
    children = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(scenario, deployer, allocator, slots, warmup, ss, redraw_positions, initial_battery, keep_records)
            for ss in children]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_trial_job(j) for j in jobs]

    counted = slots - warmup
    n = scenario.num_devices
    out = np.array([r[0] for r in results], dtype=float) / (counted * n)
    pw = np.array([r[1] for r in results], dtype=float) / counted
    se = lambda v: float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0
    return SimulationReport(
        trials=trials,
        slots_per_trial=slots,
        warmup=warmup,
        mean_sum_power=float(pw.mean()),
        outage_probability=float(out.mean()),
        stderr_outage=se(out),
        stderr_power=se(pw),
        per_trial_outage=out,
        per_trial_power=pw,
        per_slot_records=[r[2] for r in results] if keep_records else None,
    )


def initial_device_states(batteries) -> list[DeviceState]:
    return [DeviceState(float(b)) for b in batteries]
