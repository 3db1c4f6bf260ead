"""End-to-end acceptance checks, one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary section at the
end of the run lists every criterion as PASS or FAIL.
"""
import itertools
import time

import numpy as np
import pytest

from oracles import grid_refine_min_power, lp_vertex_enumeration
from wetplan.cli import main
from wetplan.clustering import K_CHEBYSHEV, KMEANS_MEAN, Deployment, deploy_beacons
from wetplan.core import EhParams, Scenario, default_scenario
from wetplan.eh_channel import harvest_rate, harvest_rate_inverse, scenario_gains
from wetplan.geometry import TOL_GEOM, brute_force_mec, min_enclosing_circle
from wetplan.lp_solver import INFEASIBLE, LpProblem, solve_lp
from wetplan.power_alloc import allocate_approx, allocate_lp, required_incident_powers
from wetplan.simulation import consumed_energy, run_monte_carlo, run_trial

MC_TRIALS = 200
SERIES = list(itertools.product(["lp", "approx"], [K_CHEBYSHEV, KMEANS_MEAN]))


def test_mec_matches_oracle(criterion):
    rng = np.random.default_rng(2024)
    sets = [rng.uniform(0, 30, (int(rng.integers(1, 51)), 2)) for _ in range(500)]
    t0 = time.perf_counter()
    fast = [min_enclosing_circle(p, seed=i) for i, p in enumerate(sets)]
    t_fast = time.perf_counter() - t0
    ref = [brute_force_mec(p) for p in sets]
    t_total = time.perf_counter() - t0
    err = max(abs(f.radius - r.radius) for f, r in zip(fast, ref))
    ok = err < 1e-9 and t_total < 5.0
    criterion(1, "MEC oracle equivalence", ok, f"max |dR| = {err:.2e} m, fast {t_fast:.2f} s, with oracle {t_total:.2f} s")
    assert ok


def test_chebyshev_dominance(criterion):
    rng = np.random.default_rng(7)
    violations, worst = 0, -np.inf
    for k in range(100):
        nb = int(rng.integers(2, 21))
        s = default_scenario(64, nb, seed=1000 + k)
        mean = deploy_beacons(s, seed=k, use_chebyshev=False)
        cheb = deploy_beacons(s, seed=k, use_chebyshev=True)
        assert np.array_equal(mean.assignment, cheb.assignment)
        gap = cheb.cluster_radii - mean.cluster_radii
        violations += int(np.sum(gap > TOL_GEOM))
        worst = max(worst, gap.max())
    ok = violations == 0
    criterion(2, "Chebyshev radius dominance", ok, f"{violations} violations, max r_cheb - r_mean = {worst:.2e} m")
    assert ok


def test_eh_roundtrip(criterion):
    eh = EhParams(saturation=10.73e-3, c0=5.365, c1=0.2308)
    y = np.linspace(0.0, 0.999 * eh.saturation, 1002)[1:-1]
    err = np.abs(harvest_rate(harvest_rate_inverse(y, eh), eh) - y).max()
    ok = len(y) == 1000 and err <= 1e-9 * eh.saturation
    criterion(3, "EH inverse round trip", ok, f"max error {err / eh.saturation:.2e} x saturation")
    assert ok


def test_lp_oracles(criterion):
    rng = np.random.default_rng(99)
    worst_lp, mismatched = 0.0, 0
    for _ in range(200):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 9))
        c, A, b = rng.normal(size=n), rng.normal(size=(m, n)), rng.normal(size=m)
        u = rng.uniform(0.5, 5.0, n)
        sol = solve_lp(LpProblem(c, A, b, u))
        ref = lp_vertex_enumeration(c, A, b, u)
        if np.isinf(ref) or sol.status == INFEASIBLE:
            mismatched += int(not (np.isinf(ref) and sol.status == INFEASIBLE))
            continue
        worst_lp = max(worst_lp, abs(sol.objective - ref) / max(1.0, abs(ref)))

    worst_grid, done = 0.0, 0
    while done < 50:
        pts = rng.uniform([0, 0], [30, 15], (2, 2))
        s = Scenario(area_width=30, area_height=15, devices=pts, num_beacons=2)
        d = deploy_beacons(s, seed=done)
        # move beacons off the devices so cross gains matter
        d = Deployment(d.beacon_positions + rng.uniform(-2, 2, (2, 2)), d.assignment, d.cluster_radii, d.method_tag)
        g = scenario_gains(s, d)
        b = rng.uniform(0, s.e_th, 2)
        demand, _ = required_incident_powers(b, s.e_th, s.slot_duration, s.eh)
        ref = grid_refine_min_power(g, demand, s.p_max)
        if ref is None:
            continue
        r = allocate_lp(s, g, b)
        worst_grid = max(worst_grid, abs(r.sum_power - ref) / ref)
        done += 1
    ok = mismatched == 0 and worst_lp <= 1e-7 and worst_grid <= 1e-4
    criterion(4, "LP oracles", ok,
              f"simplex vs vertices max rel {worst_lp:.1e}, status mismatches {mismatched}; "
              f"two-PB vs grid max rel {worst_grid:.1e}")
    assert ok


def test_lp_below_approx(criterion):
    rng = np.random.default_rng(5)
    kept, tries, violations, worst = 0, 0, 0, -np.inf
    while kept < 100:
        tries += 1
        s = default_scenario(64, 15, seed=int(rng.integers(2**31)))
        d = deploy_beacons(s, seed=tries)
        g = scenario_gains(s, d)
        b = rng.uniform(s.e_th - 0.02, s.e_max, 64)
        lp, ap = allocate_lp(s, g, b), allocate_approx(s, g, d, b)
        if not (lp.feasible and ap.feasible):
            continue
        kept += 1
        violations += int(lp.sum_power > ap.sum_power + 1e-9)
        worst = max(worst, lp.sum_power - ap.sum_power)

    far_err = 0.0
    for k in range(20):
        centers = np.array([[10.0, 10.0], [150.0, 10.0], [290.0, 10.0], [150.0, 150.0]])
        pts = np.vstack([c + rng.uniform(-1, 1, (6, 2)) for c in centers])
        s = Scenario(area_width=300, area_height=160, devices=pts, num_beacons=4)
        d = deploy_beacons(s, seed=k)
        g = scenario_gains(s, d)
        b = rng.uniform(0.23, 0.25, len(pts))
        lp, ap = allocate_lp(s, g, b), allocate_approx(s, g, d, b)
        far_err = max(far_err, np.max(np.abs(ap.powers - lp.powers) / np.maximum(lp.powers, 1e-300)))
    ok = violations == 0 and far_err <= 0.01
    criterion(5, "LP <= approx sum power", ok,
              f"{kept} feasible of {tries} drawn, {violations} violations (max lp - approx {worst:.2e} W); "
              f"far clusters max rel diff {far_err:.2e}")
    assert ok


def sweep(scenario_for, values, allocator, deployer):
    return [run_monte_carlo(scenario_for(v), deployer=deployer, allocator=allocator,
                            trials=MC_TRIALS, seed=2025) for v in values]


def non_increasing(reports):
    """Each consecutive change must stay below twice its paired standard error."""
    slack = []
    for a, b in zip(reports, reports[1:]):
        diff = b.per_trial_outage - a.per_trial_outage
        se = diff.std(ddof=1) / np.sqrt(len(diff))
        slack.append(diff.mean() - 2 * se)
    return all(x <= 0 for x in slack), max(slack)


@pytest.fixture(scope="module")
def threshold_sweep():
    base = default_scenario(64, 15, seed=0)
    values = [0.05, 0.15, 0.25, 0.35, 0.45]
    t0 = time.perf_counter()
    res = {key: sweep(lambda v: base.with_updates(e_th=v), values, *key) for key in SERIES}
    return values, res, time.perf_counter() - t0


def test_threshold_trend(criterion, threshold_sweep):
    values, res, elapsed = threshold_sweep
    parts, ok = [], True
    for (alloc, dep), reps in res.items():
        power = [r.mean_sum_power for r in reps]
        inc = all(b > a for a, b in zip(power, power[1:]))
        mono, slack = non_increasing(reps)
        ok &= inc and mono
        parts.append(f"{alloc}/{dep}: P {power[0]:.1f}->{power[-1]:.1f} W "
                     f"Pout {reps[0].outage_probability:.3f}->{reps[-1].outage_probability:.3f}")
    ok &= elapsed < 120
    criterion(6, "E_th sweep trend", ok, f"{elapsed:.0f} s; " + "; ".join(parts))
    assert ok


@pytest.fixture(scope="module")
def beacon_sweep():
    base = default_scenario(64, 15, seed=0, e_th=0.25)
    values = [2, 4, 6, 10, 15]
    return values, {key: sweep(lambda v: base.with_updates(num_beacons=v), values, *key) for key in SERIES}


def test_beacon_trend(criterion, beacon_sweep):
    values, res = beacon_sweep
    ok, parts = True, []
    for (alloc, dep), reps in res.items():
        mono, _ = non_increasing(reps)
        ceiling = all(r.mean_sum_power <= v * 4.0 + 1e-9 for v, r in zip(values, reps))
        ok &= mono and ceiling
        parts.append(f"{alloc}/{dep}: Pout {reps[0].outage_probability:.3f}->{reps[-1].outage_probability:.3f}")
    gaps = []
    for dep in (K_CHEBYSHEV, KMEANS_MEAN):
        for v, a, b in zip(values, res["lp", dep], res["approx", dep]):
            if v <= 6:
                gaps.append(abs(a.mean_sum_power - b.mean_sum_power) / a.mean_sum_power)
    ok &= max(gaps) <= 0.05
    criterion(7, "|B| sweep trend", ok, f"max LP/approx gap at |B|<=6 {max(gaps):.2%}; " + "; ".join(parts))
    assert ok


def test_battery_fuzz(criterion):
    rng = np.random.default_rng(8)
    children = np.random.SeedSequence(88).spawn(800)
    device_slots = bad_bounds = bad_identity = bad_outage = bad_consumed = 0
    for k, ss in enumerate(children):
        s = default_scenario(64, int(rng.integers(1, 21)), seed=0, e_th=float(rng.uniform(0.01, 0.9)))
        alloc = "lp" if k % 2 else "approx"
        dep = K_CHEBYSHEV if k % 3 else KMEANS_MEAN
        _, _, records = run_trial(s, dep, alloc, 20, 0, ss, keep_records=True)
        for r in records:
            device_slots += len(r.per_device_battery)
            new, old = r.per_device_battery, r.battery_before
            bad_bounds += int(np.sum((new < 0) | (new > s.e_max)))
            demand = consumed_energy(r.activations, s.slot_duration, s.p_sleep, s.p_active)
            bad_outage += int(np.sum(r.outage != (old < demand)))
            bad_consumed += int(np.sum(r.consumed != np.where(r.outage, np.minimum(old, demand), demand)))
            raw = old + r.harvested - r.consumed
            free = (raw >= 0) & (raw <= s.e_max)
            bad_identity += int(np.sum(new[free] != raw[free]))
    ok = device_slots >= 10**6 and bad_bounds == bad_identity == bad_outage == bad_consumed == 0
    criterion(8, "battery invariants fuzz", ok,
              f"{device_slots} device-slots; violations bounds {bad_bounds}, identity {bad_identity}, "
              f"outage {bad_outage}, consumption {bad_consumed}")
    assert ok


def test_sweep_determinism(criterion, tmp_path):
    spec = tmp_path / "sweep.cfg"
    spec.write_text("swept_parameter = e_th\nvalues = 0.05, 0.25, 0.45 J\ntrials = 8\nslots = 10\nseed = 17\n")
    outs = []
    for i, threads in enumerate([1, 1, 2]):
        out = tmp_path / f"run{i}.csv"
        assert main(["sweep", str(spec), "--threads", str(threads), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    criterion(9, "byte-identical sweep CSV", ok, f"{len(outs[0])} bytes, threads 1/1/2")
    assert ok
