"""Vectorized per-step transition costs over a storage grid.

The enumerating solvers all need, for a step record, the cost of every
(storage_i -> storage_j) move. ``StageEvaluator`` computes those m x m
tables with numpy, mirroring :func:`resopt.system.transition` cell by cell
(infeasible cells carry +inf). The linear allocation is evaluated in closed
form across the whole release matrix; the quadratic formulation falls back
to the per-cell greedy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import AllocationProblem, allocate
from .grid import StorageGrid
from .system import (
    EPS,
    StepRecord,
    SystemSpec,
    WeightVector,
    tributary_inflow,
)


@dataclass
class StageTable:
    g: np.ndarray  # (m, m) step cost, +inf where infeasible
    feasible: np.ndarray  # (m, m) bool
    r_total: np.ndarray  # (m, m) release volume (clipped at 0)

    def feasible_counts(self) -> np.ndarray:
        return self.feasible.sum(axis=1)


class StageEvaluator:
    """Builds stage tables for one (system, grid, weights) configuration."""

    def __init__(
        self,
        spec: SystemSpec,
        grid: StorageGrid,
        weights: WeightVector,
        formulation: str = "linear",
        nu: int = 50,
        include_hydropower: bool = True,
        aggregate_users: bool = False,
    ):
        self.spec = spec
        self.grid = grid
        self.weights = weights
        self.formulation = formulation
        self.nu = nu
        self.include_hydropower = include_hydropower
        self.aggregate_users = aggregate_users
        self.storages = grid.as_array()
        self.areas = grid.areas(spec)
        self.levels = grid.surface_levels(spec)

    def table(self, rec: StepRecord) -> StageTable:
        spec, grid = self.spec, self.grid
        m = grid.m
        s = self.storages
        rate = spec.step_evap_rate(rec.t)
        evap = rate * (self.areas[:, None] + self.areas[None, :]) / 2.0
        r_total = (s[:, None] + rec.q) - s[None, :] - evap
        feasible = r_total >= -EPS
        r_total = np.maximum(r_total, 0.0)
        if spec.release_cap_enforced:
            cap = spec.release_cap_volume(rec.t)
            feasible &= r_total <= cap + EPS

        w = self.weights.as_array()
        h = self.levels
        d1 = np.maximum(rec.d1 - h, 0.0)
        d2 = np.maximum(h - rec.d2, 0.0)
        level_cost = w[0] * d1 * d1 + w[1] * d2 * d2  # function of i only

        q_tr = tributary_inflow(rec)
        dem = rec.demands()
        uw = self.weights.user_weights()

        if self.aggregate_users:
            g, _ = self._aggregate_cost(rec, r_total, q_tr, dem, uw)
        else:
            trib = allocate(
                AllocationProblem(q_tr, tuple(dem), tuple(uw), self.formulation, self.nu)
            )
            residual = np.maximum(dem - trib, 0.0)
            res = self._allocate_matrix(r_total, residual, uw)  # (5, m, m)
            deficits = np.maximum(residual[:, None, None] - res, 0.0)
            g = np.einsum("u,umn->mn", uw, deficits * deficits)
            if self.include_hydropower and (w[7] > 0 or rec.d8 > 0):
                releases = trib[:, None, None] + res
                power = self._cascade(rec, r_total, releases[0], releases[1], releases[4])
                d8 = np.maximum(rec.d8 - power, 0.0)
                g = g + w[7] * d8 * d8
        g = g + level_cost[:, None]
        g = np.where(feasible, g, np.inf)
        return StageTable(g=g, feasible=feasible, r_total=r_total)

    # -- internals -------------------------------------------------------

    def _allocate_matrix(self, r_total: np.ndarray, demands: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Releases (5, m, m) given the available-release matrix."""
        n = demands.size
        if self.formulation == "linear":
            order = sorted(range(n), key=lambda i: (-weights[i], i))
            res = np.zeros((n,) + r_total.shape)
            before = 0.0
            for i in order:
                res[i] = np.clip(r_total - before, 0.0, demands[i])
                before = before + demands[i]
            return res
        res = np.zeros((n,) + r_total.shape)
        seen: dict[float, np.ndarray] = {}
        it = np.nditer(r_total, flags=["multi_index"])
        for val in it:
            v = float(val)
            got = seen.get(v)
            if got is None:
                got = allocate(
                    AllocationProblem(v, tuple(demands), tuple(weights), "quadratic", self.nu)
                )
                seen[v] = got
            res[(slice(None),) + it.multi_index] = got
        return res

    def _cascade(self, rec: StepRecord, r_total, r3, r4, r7) -> np.ndarray:
        """Vector form of the hydropower cascade; mirrors system.hydropower."""
        spec = self.spec
        seconds = spec.step_seconds(rec.t)
        hours = spec.step_hours(rec.t)
        conv = 1000.0 / seconds
        h = self.levels
        q0 = np.minimum(r_total * conv, spec.hec_max[0])
        head0 = (h[:, None] + h[None, :]) / 2.0 - spec.tailwater_level
        e0 = spec.gen[0] * q0 * np.maximum(head0, 0.0) * hours
        q1p = np.maximum(np.minimum(q0 - r7 * conv, spec.hec_max[1]), 0.0)
        e1 = spec.gen[1] * q1p * spec.heads[1] * hours
        lat1 = (rec.q1 - rec.q) * conv
        q2p = np.maximum(np.minimum(q1p + lat1 - r3 * conv, spec.hec_max[2]), 0.0)
        e2 = spec.gen[2] * q2p * spec.heads[2] * hours
        lat2 = (rec.q2 - rec.q1) * conv
        q3p = np.maximum(np.minimum(q2p + lat2 - r4 * conv, spec.hec_max[3]), 0.0)
        e3 = spec.gen[3] * q3p * spec.heads[3] * hours
        q6p = np.maximum(np.minimum(r3 * conv, spec.hec_max[6]), 0.0)
        e6 = spec.gen[6] * q6p * spec.heads[6] * hours
        return e0 + e1 + e2 + e3 + e6

    def _aggregate_cost(self, rec, r_total, q_tr, dem, uw):
        """Stage-1 cost of the aggregated-demand baseline: one pooled user
        demand served by tributary + release, hydropower proxied with no
        user intakes (the split is not known until stage 2)."""
        w = self.weights.as_array()
        d_sum = float(dem.sum())
        w_sum = float(uw.sum())
        deficit = np.maximum(d_sum - q_tr - r_total, 0.0)
        g = w_sum * deficit * deficit
        power = None
        if self.include_hydropower and (w[7] > 0 or rec.d8 > 0):
            zeros = np.zeros_like(r_total)
            power = self._cascade(rec, r_total, zeros, zeros, zeros)
            d8 = np.maximum(rec.d8 - power, 0.0)
            g = g + w[7] * d8 * d8
        return g, power


__all__ = ["StageEvaluator", "StageTable"]
