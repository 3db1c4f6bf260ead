"""
One charging slot
=================

Given battery levels, how much should each beacon transmit so every device
ends the slot at the energy threshold?
"""
import numpy as np

from wetplan import allocate_approx, allocate_lp, default_scenario, deploy_beacons, scenario_gains
from wetplan.eh_channel import harvest_rate, harvest_rate_inverse

scenario = default_scenario(64, 15, seed=1)
deployment = deploy_beacons(scenario, seed=1)
gains = scenario_gains(scenario, deployment)   # (devices, beacons)

# The harvester saturates: output flattens around 10.7 mW
p_in = np.array([1e-3, 5e-3, 20e-3, 100e-3])
print("harvested mW:", (harvest_rate(p_in, scenario.eh) * 1e3).round(3))
print("inverse of 3.81 mW:", harvest_rate_inverse(3.81e-3, scenario.eh) * 1e3, "mW")

rng = np.random.default_rng(1)
batteries = rng.uniform(scenario.e_th - 0.02, scenario.e_max, scenario.num_devices)

lp = allocate_lp(scenario, gains, batteries)
approx = allocate_approx(scenario, gains, deployment, batteries)
print(f"joint LP      : {lp.sum_power:6.3f} W  feasible={lp.feasible}")
print(f"per-cluster   : {approx.sum_power:6.3f} W  feasible={approx.feasible}")

# Drain the batteries and the demand can no longer be met
empty = np.zeros(scenario.num_devices)
short = allocate_lp(scenario, gains, empty)
print("empty batteries: feasible =", short.feasible, " devices short:", int((short.shortfall > 0).sum()))
