"""Beacon placement by K-Means with optional Chebyshev recentering.

After Lloyd's iterations converge, each centre can be moved to the centre
of the minimum enclosing circle of its cluster.  The assignment is kept as
it was at convergence; a device may therefore end up closer to a foreign
beacon than to its own.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import min_enclosing_circle

KMEANS_MEAN = "kmeans-mean"
K_CHEBYSHEV = "k-chebyshev"
METHODS = (KMEANS_MEAN, K_CHEBYSHEV)

MU = 1e-4
MAX_ITERS = 500


@dataclass(frozen=True, eq=False)
class Deployment:
    beacon_positions: np.ndarray
    assignment: np.ndarray
    cluster_radii: np.ndarray
    method_tag: str
    iterations: int = 0

    def __post_init__(self):
        if self.method_tag not in METHODS:
            raise ValueError(f"unknown method tag {self.method_tag!r}")
        object.__setattr__(self, "beacon_positions", np.asarray(self.beacon_positions, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "assignment", np.asarray(self.assignment, dtype=int).reshape(-1))
        object.__setattr__(self, "cluster_radii", np.asarray(self.cluster_radii, dtype=float).reshape(-1))
        k = len(self.beacon_positions)
        if len(self.cluster_radii) != k:
            raise ValueError("one radius per beacon required")
        if self.assignment.size and (self.assignment.min() < 0 or self.assignment.max() >= k):
            raise ValueError("assignment index out of range")

    @property
    def num_beacons(self) -> int:
        return len(self.beacon_positions)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == i)

    def to_dict(self) -> dict:
        return {
            "method": self.method_tag,
            "iterations": int(self.iterations),
            "beacons": [[float(x), float(y)] for x, y in self.beacon_positions],
            "assignment": [int(a) for a in self.assignment],
            "radii": [float(r) for r in self.cluster_radii],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Deployment:
        return cls(
            beacon_positions=np.array(data["beacons"], dtype=float),
            assignment=np.array(data["assignment"], dtype=int),
            cluster_radii=np.array(data["radii"], dtype=float),
            method_tag=data["method"],
            iterations=int(data.get("iterations", 0)),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> Deployment:
        return cls.from_dict(json.loads(Path(path).read_text()))


def kmeans_assign(device_positions, centers) -> np.ndarray:
    """Index of the nearest centre for each device; ties go to the lowest index."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if centers.shape[0] == 0:
        raise ValueError("need at least one center")
    pts = np.asarray(device_positions, dtype=float).reshape(-1, 2)
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum, which is the tie-break we want
    return np.argmin(d2, axis=1)


def cluster_radii(device_positions, centers, assignment) -> np.ndarray:
    pts = np.asarray(device_positions, dtype=float)
    centers = np.asarray(centers, dtype=float)
    d = np.linalg.norm(pts - centers[assignment], axis=1)
    radii = np.zeros(len(centers))
    np.maximum.at(radii, assignment, d)
    return radii


def kmeans_objective(device_positions, centers, assignment) -> float:
    pts = np.asarray(device_positions, dtype=float)
    return float(((pts - np.asarray(centers)[assignment]) ** 2).sum())


def kmeans_plusplus(points, k: int, rng: np.random.Generator) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    centers = np.empty((k, 2))
    centers[0] = pts[rng.integers(n)]
    d2 = ((pts - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            # every point already coincides with a centre
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[i] = pts[idx]
        d2 = np.minimum(d2, ((pts - centers[i]) ** 2).sum(axis=1))
    return centers


def lloyd(points, k: int, rng: np.random.Generator, mu: float = MU, max_iters: int = MAX_ITERS, trace=None):
    """Lloyd's iterations from k-means++ seeds.

    Returns ``(centers, assignment, iterations)``.  Convergence is declared
    when the largest centre displacement is at most ``mu``.  If ``trace`` is a
    list, the objective after each assignment step is appended to it.
    """
    pts = np.asarray(points, dtype=float)
    centers = kmeans_plusplus(pts, k, rng)
    assignment = kmeans_assign(pts, centers)
    it = 0
    for it in range(1, max_iters + 1):
        if trace is not None:
            trace.append(kmeans_objective(pts, centers, assignment))
        counts = np.bincount(assignment, minlength=k)
        sums = np.zeros((k, 2))
        np.add.at(sums, assignment, pts)
        new = centers.copy()
        nonempty = counts > 0
        new[nonempty] = sums[nonempty] / counts[nonempty, None]
        for i in np.flatnonzero(~nonempty):
            # reseed at the device farthest from its current centre
            far = np.linalg.norm(pts - new[kmeans_assign(pts, new)], axis=1)
            new[i] = pts[int(np.argmax(far))]
        shift = np.linalg.norm(new - centers, axis=1).max()
        centers = new
        assignment = kmeans_assign(pts, centers)
        if shift <= mu and np.all(np.bincount(assignment, minlength=k) > 0):
            break
    return centers, assignment, it


def deploy_beacons(scenario, seed: int = 0, use_chebyshev: bool = True, mu: float = MU, max_iters: int = MAX_ITERS) -> Deployment:
    """Place ``scenario.num_beacons`` beacons over the scenario's devices."""
    pts = scenario.devices
    k = scenario.num_beacons
    rng = np.random.default_rng(seed)
    centers, assignment, iters = lloyd(pts, k, rng, mu=mu, max_iters=max_iters)
    if use_chebyshev:
        centers = chebyshev_recenter(pts, assignment, centers, seed=seed)
    tag = K_CHEBYSHEV if use_chebyshev else KMEANS_MEAN
    return Deployment(centers, assignment, cluster_radii(pts, centers, assignment), tag, iters)


def chebyshev_recenter(points, assignment, centers, seed: int = 0) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    out = np.array(centers, dtype=float, copy=True)
    for i in range(len(out)):
        members = pts[assignment == i]
        if len(members):
            out[i] = min_enclosing_circle(members, seed=seed + i).center
    return out


def mean_centers(points, assignment, k: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    out = np.zeros((k, 2))
    for i in range(k):
        members = pts[assignment == i]
        if len(members):
            out[i] = members.mean(axis=0)
    return out
