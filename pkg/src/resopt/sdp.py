"""Stochastic DP on inflow classes: expected-value Bellman recursion over a
one-year cyclostationary horizon.

Inflows enter as k-means class centres (reservoir and tributary inflow
share one class index; see :func:`resopt.clustering.class_representatives`)
and the expectation over next classes uses the reservoir-inflow transition
matrices. The hydropower objective is excluded here: the two mid-river
gauges it needs are not part of the stochastic model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import InflowClustering, TransitionMatrixSet
from .grid import StorageGrid
from .stage import StageEvaluator
from .system import (
    Infeasible,
    SolverError,
    StepRecord,
    SystemSpec,
    WeightVector,
    transition,
)


@dataclass
class SdpPolicy:
    """One-year policy table over (step, storage index, inflow class)."""

    spec: SystemSpec
    grid: StorageGrid
    weights: WeightVector
    formulation: str
    nu: int
    clustering_q: InflowClustering
    clustering_qtr: InflowClustering
    qtr_representatives: np.ndarray  # (T, L)
    actions: np.ndarray  # (T, m, L)
    user_releases: np.ndarray  # (T, m, L, 5)
    values: np.ndarray  # (T+1, m, L); values[T] is the wrap snapshot
    cycles_used: int
    include_hydropower: bool = False

    @property
    def steps_per_year(self) -> int:
        return self.actions.shape[0]

    def lookup(self, t: int, storage: float, q_actual: float) -> float:
        ty = t % self.steps_per_year
        l = self.clustering_q.classify(q_actual)
        i = self.grid.snap(storage)
        return self.grid.levels[int(self.actions[ty, i, l])]

    def decide(self, t: int, storage: float, rec: StepRecord) -> float:
        return self.lookup(t, storage, rec.q)

    def policy_rows(self) -> list[tuple]:
        """(storage, step, q_class_value, qtr_class_value, next_storage) rows."""
        rows = []
        levels = self.grid.levels
        for t in range(self.steps_per_year):
            for i in range(self.grid.m):
                for l in range(self.clustering_q.n_classes):
                    rows.append(
                        (
                            levels[i],
                            t + 1,
                            self.clustering_q.centres[l],
                            self.clustering_qtr.centres[l],
                            levels[int(self.actions[t, i, l])],
                        )
                    )
        return rows


def sdp_policy_lookup(
    policy: SdpPolicy, t: int, storage: float, q_actual: float, qtr_actual: float
) -> float:
    """Next storage target for actual inflows: the reservoir inflow's class
    drives the row choice (joint-class assumption); storage snaps to the
    nearest grid level."""
    del qtr_actual  # classified jointly with q
    return policy.lookup(t, storage, q_actual)


def _class_records(
    demand_year: list[StepRecord],
    clustering_q: InflowClustering,
    qtr_reps: np.ndarray,
) -> list[list[StepRecord]]:
    """Synthetic records per (step, class): class-centre inflows with the
    year's demands. Mid-river gauges are set to q (no lateral gain) since
    hydropower is out of the stochastic objective."""
    out = []
    for t, rec in enumerate(demand_year):
        per_class = []
        for l in range(clustering_q.n_classes):
            q = clustering_q.centres[l]
            qtr = max(float(qtr_reps[t, l]), 0.0)
            per_class.append(
                replace(rec, t=rec.t, q=q, q1=q, q2=q, q3=q + qtr)
            )
        out.append(per_class)
    return out


def nsdp_solve(
    spec: SystemSpec,
    demand_year: list[StepRecord],
    clustering_q: InflowClustering,
    clustering_qtr: InflowClustering,
    tms: TransitionMatrixSet,
    grid: StorageGrid,
    weights: WeightVector,
    formulation: str = "linear",
    nu: int = 50,
    gamma: float = 1.0,
    convergence_cycles: int = 3,
    k_max: int = 30,
    qtr_representatives: np.ndarray | None = None,
) -> SdpPolicy:
    """Expected-value backward recursion over (step, storage, inflow class).

    Stops when the action table is unchanged for ``convergence_cycles``
    consecutive sweeps. ``qtr_representatives`` defaults to the tributary
    class centres for every step.
    """
    T = len(demand_year)
    if T == 0:
        raise ValueError("demand year must not be empty")
    L = clustering_q.n_classes
    if clustering_qtr.n_classes != L:
        raise ValueError(
            "reservoir and tributary clusterings must use the same number of classes"
        )
    if tms.steps_per_year != T or tms.n_classes != L:
        raise ValueError("transition matrices do not match the demand year / classes")
    if qtr_representatives is None:
        qtr_representatives = np.tile(np.array(clustering_qtr.centres), (T, 1))
    qtr_representatives = np.asarray(qtr_representatives, dtype=float)
    if qtr_representatives.shape != (T, L):
        raise ValueError("qtr_representatives must have shape (steps, classes)")

    records = _class_records(demand_year, clustering_q, qtr_representatives)
    evaluator = StageEvaluator(
        spec, grid, weights, formulation, nu, include_hydropower=False
    )
    m = grid.m
    g = np.empty((T, L, m, m))
    for t in range(T):
        for l in range(L):
            tab = evaluator.table(records[t][l])
            counts = tab.feasible_counts()
            if not counts.all():
                i = int(np.argmin(counts))
                raise SolverError(
                    f"no feasible transition from storage index {i} "
                    f"at step {t}, inflow class {l}"
                )
            g[t, l] = tab.g

    values = np.zeros((T + 1, m, L))
    wrap_next = np.zeros((m, L))
    actions = np.empty((T, m, L), dtype=int)
    prev_actions: np.ndarray | None = None
    unchanged = 0
    last_delta = T * m * L
    idx = np.arange(m)
    converged = False
    cycles = 0
    for k in range(1, k_max + 1):
        cycles = k
        wrap_used = wrap_next
        v_next = wrap_used  # (m, L)
        for t in range(T - 1, -1, -1):
            expected = v_next @ tms.at(t).T  # (m, L): E[V(t+1, j, .) | class l]
            for l in range(L):
                total = g[t, l] + gamma * expected[:, l][None, :]
                actions[t, :, l] = np.argmin(total, axis=1)
                values[t, :, l] = total[idx, actions[t, :, l]]
            v_next = values[t]
        values[T] = wrap_used
        if prev_actions is not None:
            last_delta = int(np.sum(actions != prev_actions))
            unchanged = unchanged + 1 if last_delta == 0 else 0
        prev_actions = actions.copy()
        wrap_next = values[0].copy()
        if unchanged >= convergence_cycles:
            converged = True
            break
    if not converged:
        raise SolverError(
            f"policy not stable after {k_max} cycles "
            f"(required {convergence_cycles} unchanged, last delta {last_delta} cells)"
        )

    releases = np.zeros((T, m, L, 5))
    levels = grid.as_array()
    for t in range(T):
        for l in range(L):
            for i in range(m):
                res = transition(
                    spec,
                    records[t][l],
                    levels[i],
                    levels[int(actions[t, i, l])],
                    weights,
                    formulation,
                    nu,
                    include_hydropower=False,
                )
                if isinstance(res, Infeasible):  # pragma: no cover
                    raise SolverError(
                        f"recorded action infeasible at step {t}, storage {i}, class {l}"
                    )
                releases[t, i, l] = res.user_releases()

    return SdpPolicy(
        spec=spec,
        grid=grid,
        weights=weights,
        formulation=formulation,
        nu=nu,
        clustering_q=clustering_q,
        clustering_qtr=clustering_qtr,
        qtr_representatives=qtr_representatives,
        actions=actions,
        user_releases=releases,
        values=values,
        cycles_used=cycles,
    )


__all__ = ["SdpPolicy", "nsdp_solve", "sdp_policy_lookup"]
