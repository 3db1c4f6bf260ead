"""Power-beacon placement, per-slot power allocation and outage simulation
for wirelessly powered IoT networks."""
from .clustering import Deployment, deploy_beacons, kmeans_assign
from .core import ActivationParams, DeviceState, EhParams, RadioParams, Scenario, default_scenario
from .eh_channel import (
    SaturationError,
    gain_matrix,
    harvest_rate,
    harvest_rate_inverse,
    harvested_energy,
    path_gain,
    scenario_gains,
)
from .geometry import Circle, brute_force_mec, min_enclosing_circle
from .lp_solver import LpProblem, LpSolution, solve_lp
from .power_alloc import AllocationResult, allocate, allocate_approx, allocate_lp, required_incident_power
from .simulation import SimulationReport, SlotRecord, consumed_energy, run_monte_carlo, sample_activation, step_slot

__version__ = "0.1.0"
