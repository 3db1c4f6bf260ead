"""Small dense LP solver.

Solves ``min c.x  s.t.  A x >= b,  0 <= x <= upper`` with a two-phase
tableau simplex.  Pivoting uses Dantzig's rule and falls back to Bland's
rule after a run of degenerate pivots, which guarantees termination.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_LP = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_PIVOT_TOL = 1e-11
_DEGENERATE_RUN = 30


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.shape[0]
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if np.size(self.A) else np.zeros((0, n))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if self.A.shape != (self.b.shape[0], n):
            raise ValueError(f"A has shape {self.A.shape}, expected ({self.b.shape[0]}, {n})")
        if self.upper.shape != (n,):
            raise ValueError(f"upper has length {self.upper.shape[0]}, expected {n}")
        if not np.all(np.isfinite(self.upper)) or np.any(self.upper < 0):
            raise ValueError("upper bounds must be finite and nonnegative")
        for name in ("c", "A", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be finite")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bound_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Rows ``0..m-1`` are constraints, the last row holds reduced costs and ``-objective``."""

    def __init__(self, T, basis):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, r, c):
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = c
        self.iterations += 1

    def run(self, allowed, max_iter):
        """Primal simplex over columns flagged in ``allowed``."""
        T = self.T
        bland = False
        degenerate = 0
        m = T.shape[0] - 1
        for _ in range(max_iter):
            d = T[-1, :-1]
            cand = np.flatnonzero(allowed & (d < -TOL_LP))
            if cand.size == 0:
                return True
            c = cand[0] if bland else cand[np.argmin(d[cand])]
            col = T[:m, c]
            rows = np.flatnonzero(col > _PIVOT_TOL)
            if rows.size == 0:
                # cannot happen with finite upper bounds; treat as stalled
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = tied[np.argmin(self.basis[tied])] if tied.size > 1 else tied[0]
            if T[r, -1] <= 1e-12:
                degenerate += 1
                if degenerate >= _DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, c)
        raise RuntimeError("simplex iteration limit reached")


def solve_lp(problem: LpProblem, max_iter: int = 10000) -> LpSolution:
    """Solve ``problem``; infeasibility is reported in the returned status."""
    c, A, b, u = problem.c, problem.A, problem.b, problem.upper
    m, n = A.shape

    # columns: x (n) | surplus s (m) | bound slack t (n) | artificials
    flip = b <= 0
    art_rows = np.flatnonzero(~flip)
    na = art_rows.size
    ncols = n + m + n + na
    rows = m + n
    T = np.zeros((rows + 1, ncols + 1))
    sign = np.where(flip, -1.0, 1.0)
    T[:m, :n] = A * sign[:, None]
    T[:m, n:n + m] = np.diag(-sign)
    T[:m, -1] = b * sign
    T[m:rows, :n] = np.eye(n)
    T[m:rows, n + m:n + m + n] = np.eye(n)
    T[m:rows, -1] = u
    basis = np.empty(rows, dtype=np.intp)
    basis[:m] = n + np.arange(m)
    basis[m:] = n + m + np.arange(n)
    for k, i in enumerate(art_rows):
        T[i, n + m + n + k] = 1.0
        basis[i] = n + m + n + k

    tab = _Tableau(T, basis)
    is_art = np.zeros(ncols, dtype=bool)
    is_art[n + m + n:] = True

    if na:
        # phase 1: minimise the sum of artificials
        T[-1, :] = 0.0
        T[-1, n + m + n:ncols] = 1.0
        T[-1] -= T[art_rows].sum(axis=0)
        tab.run(np.ones(ncols, dtype=bool), max_iter)
        infeas = -T[-1, -1]
        if infeas > TOL_LP * (1.0 + np.abs(b).max()):
            return LpSolution(INFEASIBLE, np.full(n, np.nan), np.nan, iterations=tab.iterations)
        # drive remaining (zero-valued) artificials out of the basis
        keep_rows = np.ones(rows + 1, dtype=bool)
        for r in range(rows):
            if is_art[basis[r]]:
                nz = np.flatnonzero((~is_art) & (np.abs(T[r, :-1]) > 1e-9))
                if nz.size:
                    tab.pivot(r, nz[0])
                else:
                    keep_rows[r] = False
        T = T[keep_rows][:, np.append(~is_art, True)]
        basis = basis[keep_rows[:-1]]
        done = tab.iterations
        tab = _Tableau(T, basis)
        tab.iterations = done
        ncols = n + m + n

    # phase 2
    cost = np.zeros(ncols)
    cost[:n] = c
    T = tab.T
    T[-1, :-1] = cost - cost[basis] @ T[:-1, :-1]
    T[-1, -1] = -cost[basis] @ T[:-1, -1]
    tab.run(np.ones(ncols, dtype=bool), max_iter)

    x = np.zeros(ncols)
    x[basis] = T[:-1, -1]
    xv = np.clip(x[:n], 0.0, u)
    duals = T[-1, n:n + m].copy()
    bound_duals = T[-1, n + m:n + m + n].copy()
    return LpSolution(
        OPTIMAL,
        xv,
        float(c @ xv),
        duals=duals,
        bound_duals=bound_duals,
        iterations=tab.iterations,
    )
