"""
Placing power beacons by clustering
===================================

Devices are scattered over a 30 m x 15 m floor.  We group them into
clusters and put one beacon per cluster, either at the centroid or at the
centre of the smallest circle covering the cluster.
"""
import numpy as np

from wetplan import default_scenario, deploy_beacons

scenario = default_scenario(num_devices=64, num_beacons=15, seed=0)
print(scenario.devices[:5])

# Same clustering, two choices of beacon position per cluster
mean = deploy_beacons(scenario, seed=0, use_chebyshev=False)
cheb = deploy_beacons(scenario, seed=0, use_chebyshev=True)
assert np.array_equal(mean.assignment, cheb.assignment)

# The covering-circle centre never has a larger worst-case distance
for i in range(scenario.num_beacons):
    print(f"cluster {i:2d}: {mean.members(i).size:2d} devices, "
          f"r_mean = {mean.cluster_radii[i]:.2f} m, r_cheb = {cheb.cluster_radii[i]:.2f} m")

print("worst device distance:", mean.cluster_radii.max().round(2), "vs", cheb.cluster_radii.max().round(2))

# Deployments serialise to JSON for the command line tools
cheb.save("deployment.json")
