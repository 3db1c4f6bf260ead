"""Minimum enclosing circle in the plane.

:func:`min_enclosing_circle` is the randomized incremental (Welzl-style)
algorithm in expected linear time.  :func:`brute_force_mec` enumerates
every two- and three-point support circle and is kept as an oracle.
"""
from __future__ import annotations

import functools
import itertools
import math
import random
from dataclasses import dataclass

import numpy as np

TOL_GEOM = 1e-9

# relative slack for the incremental membership test; keeps the algorithm
# from re-entering on points that sit on the boundary up to rounding
_REL_EPS = 1e-12


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def contains(self, point, tol: float = TOL_GEOM) -> bool:
        return math.dist(self.center, point) <= self.radius + tol


def _as_points(points) -> list[tuple[float, float]]:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one point")
    arr = arr.reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return [(float(x), float(y)) for x, y in arr]


def _inside(c, p) -> bool:
    cx, cy, r = c
    return math.hypot(p[0] - cx, p[1] - cy) <= r * (1 + _REL_EPS) + _REL_EPS


def _diameter(a, b):
    cx = (a[0] + b[0]) / 2
    cy = (a[1] + b[1]) / 2
    r = max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1]))
    return (cx, cy, r)


def _circumcircle(a, b, c):
    """Circle through three points, or None if they are (numerically) collinear."""
    # translate to the bounding-box centre for better conditioning
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.hypot(x - p[0], y - p[1]) for p in (a, b, c))
    return (x, y, r)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _circle_two_fixed(points, p, q):
    """Smallest circle having p and q on the boundary and enclosing ``points``."""
    circ = _diameter(p, q)
    left = right = None
    for r in points:
        if _inside(circ, r):
            continue
        cross = _cross(p, q, r)
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        side = _cross(p, q, (c[0], c[1]))
        if cross > 0 and (left is None or side > _cross(p, q, left[:2])):
            left = c
        elif cross < 0 and (right is None or side < _cross(p, q, right[:2])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_one_fixed(points, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _inside(c, q):
            if c[2] == 0.0:
                c = _diameter(p, q)
            else:
                c = _circle_two_fixed(points[: i + 1], p, q)
    return c


def min_enclosing_circle(points, seed: int = 0) -> Circle:
    """Smallest circle enclosing ``points`` (an ``(n, 2)`` array-like).

    Duplicate points are dropped and the processing order is shuffled with
    a private ``random.Random(seed)``, so the result is reproducible.
    """
    pts = sorted(set(_as_points(points)))
    random.Random(seed).shuffle(pts)
    c = None
    for i, p in enumerate(pts):
        if c is None or not _inside(c, p):
            c = _circle_one_fixed(pts[: i + 1], p)
    cx, cy, _ = c
    # report the radius actually needed for the centre found
    r = max(math.hypot(px - cx, py - cy) for px, py in pts)
    return Circle((cx, cy), r)


@functools.lru_cache(maxsize=256)
def _triples(n: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)


def brute_force_mec(points, tol: float = 1e-12) -> Circle:
    """Exhaustive oracle: smallest pair-diameter or triple circumcircle enclosing all points.

    Cubic in the number of distinct points; intended for n <= 200.
    """
    pts = sorted(set(_as_points(points)))
    if len(pts) > 200:
        raise ValueError("brute_force_mec is limited to 200 points")
    if len(pts) == 1:
        return Circle(pts[0], 0.0)
    arr = np.array(pts)
    n = len(pts)

    i, j = np.triu_indices(n, k=1)
    pair_c = (arr[i] + arr[j]) / 2
    cands = [pair_c]

    if n >= 3:
        tri = _triples(n)
        a, b, c = arr[tri[:, 0]], arr[tri[:, 1]], arr[tri[:, 2]]
        origin = (np.minimum(np.minimum(a, b), c) + np.maximum(np.maximum(a, b), c)) / 2
        a, b, c = a - origin, b - origin, c - origin
        d = 2 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
        keep = d != 0.0
        a, b, c, d, origin = a[keep], b[keep], c[keep], d[keep], origin[keep]
        a2, b2, c2 = (a * a).sum(1), (b * b).sum(1), (c * c).sum(1)
        # near-collinear triples may overflow to inf; those sort last and never win
        with np.errstate(over="ignore", invalid="ignore"):
            ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d
            uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d
        cands.append(origin + np.column_stack([ux, uy]))

    centers = np.concatenate(cands)
    # own radius of each candidate circle: distance to one of its support points
    support = np.concatenate([arr[i]] + ([a + origin] if n >= 3 else []))
    own_r = np.hypot(*(centers - support).T)
    order = np.argsort(own_r, kind="stable")
    for start in range(0, len(order), 512):
        idx = order[start:start + 512]
        block = centers[idx]
        need = np.hypot(arr[None, :, 0] - block[:, None, 0], arr[None, :, 1] - block[:, None, 1]).max(axis=1)
        ok = np.flatnonzero(need <= own_r[idx] * (1 + tol) + tol)
        if ok.size:
            k = ok[0]
            return Circle((float(block[k, 0]), float(block[k, 1])), float(need[k]))
    # only reachable through rounding on near-degenerate input
    need = np.hypot(arr[None, :, 0] - centers[:, None, 0], arr[None, :, 1] - centers[:, None, 1]).max(axis=1)
    k = int(np.argmin(need))
    return Circle((float(centers[k, 0]), float(centers[k, 1])), float(need[k]))
