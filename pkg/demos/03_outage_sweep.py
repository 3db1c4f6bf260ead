"""
Outage versus energy threshold and beacon count
===============================================

Monte Carlo over random layouts.  Raising the threshold costs transmit
power but lowers outage; adding beacons lowers outage too.
"""
from wetplan import default_scenario, run_monte_carlo

base = default_scenario(64, 15, seed=0)

print("e_th [J]   LP power  LP outage   approx power  approx outage")
for e_th in (0.05, 0.15, 0.25, 0.35, 0.45):
    s = base.with_updates(e_th=e_th)
    lp = run_monte_carlo(s, allocator="lp", trials=50, seed=0)
    ap = run_monte_carlo(s, allocator="approx", trials=50, seed=0)
    print(f"{e_th:6.2f}   {lp.mean_sum_power:8.2f}  {lp.outage_probability:9.4f}"
          f"   {ap.mean_sum_power:12.2f}  {ap.outage_probability:13.4f}")

print()
print("|B|   LP power  outage +- se")
for nb in (2, 4, 6, 10, 15):
    rep = run_monte_carlo(base.with_updates(num_beacons=nb), trials=50, seed=0)
    print(f"{nb:3d}   {rep.mean_sum_power:8.2f}  {rep.outage_probability:.4f} +- {rep.stderr_outage:.4f}")
