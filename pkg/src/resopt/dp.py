"""Deterministic allocation-nested dynamic programming over a full series.

The backward recursion runs over the whole horizon with a cyclic boundary
(the last step's continuation value is the first step's value from the
previous sweep) and stops when the action table is stable between sweeps.
Also here: the aggregated-demand two-stage baseline, forward policy
simulation and the cyclic start search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import StorageGrid
from .outcomes import OutcomeSeries
from .stage import StageEvaluator, StageTable
from .system import (
    Infeasible,
    PolicyGapError,
    SolverError,
    StepRecord,
    SystemSpec,
    WeightVector,
    apply_decision,
    transition,
)


@dataclass
class DpSolution:
    """Converged action/value tables plus the trajectory from a start storage."""

    spec: SystemSpec
    grid: StorageGrid
    weights: WeightVector
    formulation: str
    nu: int
    include_hydropower: bool
    gamma: float
    actions: np.ndarray  # (T, m) index of the next storage level
    user_releases: np.ndarray  # (T, m, 5)
    values: np.ndarray  # (T+1, m); values[T] is the wrap snapshot
    cycles_used: int
    start_storage: float = 0.0
    start_is_fixed_point: bool = True
    outcomes: OutcomeSeries | None = None

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    def decide(self, t: int, storage: float, rec: StepRecord) -> float:
        i = self.grid.snap(storage)
        j = int(self.actions[t % self.horizon, i])
        return self.grid.levels[j]

    def total_cost(self) -> float:
        if self.outcomes is None:
            raise ValueError("solution carries no simulated trajectory")
        return self.outcomes.total_cost()

    def policy_rows(self) -> list[tuple]:
        """(storage, step, q_class_value, qtr_class_value, next_storage) rows."""
        rows = []
        levels = self.grid.levels
        for t in range(self.horizon):
            for i in range(self.grid.m):
                rows.append(
                    (levels[i], t + 1, "", "", levels[int(self.actions[t, i])])
                )
        return rows


def _check_tables(tables: list[StageTable]) -> None:
    for t, tab in enumerate(tables):
        counts = tab.feasible_counts()
        if not counts.all():
            i = int(np.argmin(counts))
            raise SolverError(
                f"no feasible transition from storage index {i} at step {t}"
            )


def _solve_cyclic(
    tables: list[StageTable],
    gamma: float,
    convergence_cycles: int,
    k_max: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Backward sweeps until the action table repeats; returns
    (actions, values incl. wrap snapshot, cycles used)."""
    T = len(tables)
    m = tables[0].g.shape[0]
    wrap_next = np.zeros(m)
    values = np.zeros((T + 1, m))
    prev_actions: np.ndarray | None = None
    unchanged = 0
    last_delta = m * T
    idx = np.arange(m)
    for k in range(1, k_max + 1):
        wrap_used = wrap_next
        actions = np.empty((T, m), dtype=int)
        v_next = wrap_used
        for t in range(T - 1, -1, -1):
            total = tables[t].g + gamma * v_next[None, :]
            actions[t] = np.argmin(total, axis=1)
            values[t] = total[idx, actions[t]]
            v_next = values[t]
        values[T] = wrap_used
        if prev_actions is not None:
            last_delta = int(np.sum(actions != prev_actions))
            unchanged = unchanged + 1 if last_delta == 0 else 0
        prev_actions = actions
        wrap_next = values[0].copy()
        if unchanged >= convergence_cycles:
            return actions, values, k
    raise SolverError(
        f"policy not stable after {k_max} cycles "
        f"(required {convergence_cycles} unchanged, last delta {last_delta} cells)"
    )


def _fill_releases(
    spec: SystemSpec,
    series: list[StepRecord],
    grid: StorageGrid,
    actions: np.ndarray,
    weights: WeightVector,
    formulation: str,
    nu: int,
    include_hydropower: bool,
) -> np.ndarray:
    T, m = actions.shape
    out = np.zeros((T, m, 5))
    levels = grid.as_array()
    for t in range(T):
        for i in range(m):
            res = transition(
                spec,
                series[t],
                levels[i],
                levels[int(actions[t, i])],
                weights,
                formulation,
                nu,
                include_hydropower,
            )
            if isinstance(res, Infeasible):  # pragma: no cover - guarded upstream
                raise SolverError(
                    f"recorded action infeasible at step {t}, storage index {i}: {res.reason}"
                )
            out[t, i] = res.user_releases()
    return out


def _walk_table(actions: np.ndarray, start_index: int) -> int:
    i = start_index
    for t in range(actions.shape[0]):
        i = int(actions[t, i])
    return i


def find_cyclic_start(solution: DpSolution) -> tuple[float, bool]:
    """Grid storage whose simulated end storage equals itself.

    Returns the lowest fixed point; when none exists, the start minimizing
    the end-start gap with ``exact=False``.
    """
    actions = solution.actions
    levels = solution.grid.as_array()
    ends = np.array([_walk_table(actions, i) for i in range(solution.grid.m)])
    fixed = np.nonzero(ends == np.arange(solution.grid.m))[0]
    if fixed.size:
        return float(levels[fixed[0]]), True
    gaps = np.abs(levels[ends] - levels)
    return float(levels[int(np.argmin(gaps))]), False


def _clamp_target(spec, rec, s, target, grid: StorageGrid | None):
    """Nearest reachable substitute for an unreachable target.

    Prefers grid levels inside the feasible release window (so simulated
    trajectories stay on the policy's grid); None when no grid level is
    reachable and the raw clamping step must take over.
    """
    if grid is None:
        return None
    from .system import EPS, evaporation

    evap = evaporation(spec, s, target, rec.t)
    high = s + rec.q - evap  # zero-release bound
    low = -np.inf
    if spec.release_cap_enforced:
        low = high - spec.release_cap_volume(rec.t)
    arr = grid.as_array()
    ok = (arr <= high + EPS) & (arr >= low - EPS)
    if not ok.any():
        return None
    candidates = arr[ok]
    return float(candidates[int(np.argmin(np.abs(candidates - target)))])


def simulate_policy(
    spec: SystemSpec,
    series: list[StepRecord],
    policy,
    start_storage: float,
    weights: WeightVector | None = None,
    formulation: str | None = None,
    nu: int | None = None,
    include_hydropower: bool | None = None,
) -> OutcomeSeries:
    """Run a policy forward under the actual inflows.

    ``policy`` is anything with ``decide(t, storage, rec) -> target | None``.
    Feasible targets are applied exactly. An unreachable target is clamped
    to the nearest reachable level of the policy's grid; failing that, the
    step executes with whatever the water allows (zero or capped release,
    spill above the maximum storage). Evaluation parameters default to the
    policy's own.
    """
    weights = weights if weights is not None else policy.weights
    formulation = formulation if formulation is not None else policy.formulation
    nu = nu if nu is not None else getattr(policy, "nu", 50)
    if include_hydropower is None:
        include_hydropower = getattr(policy, "include_hydropower", True)
    grid = getattr(policy, "grid", None)
    steps = []
    s = float(start_storage)
    for t, rec in enumerate(series):
        target = policy.decide(t, s, rec)
        if target is None:
            raise PolicyGapError(
                f"policy has no decision for step {t} at storage {s:g} "
                f"(inflow {rec.q:g})"
            )
        out = transition(spec, rec, s, target, weights, formulation, nu, include_hydropower)
        if isinstance(out, Infeasible):
            snapped = _clamp_target(spec, rec, s, target, grid)
            if snapped is not None:
                out = transition(
                    spec, rec, s, snapped, weights, formulation, nu, include_hydropower
                )
        if isinstance(out, Infeasible):
            out = apply_decision(
                spec, rec, s, target, weights, formulation, nu, include_hydropower
            )
        steps.append(out)
        s = out.s_next
    return OutcomeSeries.from_steps(steps)


def ndp_solve(
    spec: SystemSpec,
    series: list[StepRecord],
    grid: StorageGrid,
    weights: WeightVector,
    formulation: str = "linear",
    nu: int = 50,
    gamma: float = 1.0,
    convergence_cycles: int = 1,
    k_max: int = 10,
    include_hydropower: bool = True,
    start_storage: float | None = None,
) -> DpSolution:
    """Allocation-nested DP over the whole series with cyclic boundary."""
    if not series:
        raise ValueError("series must not be empty")
    evaluator = StageEvaluator(
        spec, grid, weights, formulation, nu, include_hydropower
    )
    tables = [evaluator.table(rec) for rec in series]
    _check_tables(tables)
    actions, values, cycles = _solve_cyclic(tables, gamma, convergence_cycles, k_max)
    releases = _fill_releases(
        spec, series, grid, actions, weights, formulation, nu, include_hydropower
    )
    solution = DpSolution(
        spec=spec,
        grid=grid,
        weights=weights,
        formulation=formulation,
        nu=nu,
        include_hydropower=include_hydropower,
        gamma=gamma,
        actions=actions,
        user_releases=releases,
        values=values,
        cycles_used=cycles,
    )
    if start_storage is None:
        start_storage, exact = find_cyclic_start(solution)
    else:
        end = _walk_table(actions, grid.snap(start_storage))
        exact = grid.levels[end] == grid.levels[grid.snap(start_storage)]
    solution.start_storage = float(start_storage)
    solution.start_is_fixed_point = bool(exact)
    solution.outcomes = simulate_policy(spec, series, solution, solution.start_storage)
    return solution


def awd_dp_solve(
    spec: SystemSpec,
    series: list[StepRecord],
    grid: StorageGrid,
    weights: WeightVector,
    formulation: str = "linear",
    nu: int = 50,
    gamma: float = 1.0,
    convergence_cycles: int = 1,
    k_max: int = 10,
    include_hydropower: bool = True,
    start_storage: float | None = None,
) -> DpSolution:
    """Two-stage aggregated-demand baseline.

    Stage 1 solves the DP with all user demands pooled into one (weight =
    sum of user weights) next to the level and hydropower objectives.
    Stage 2 only splits each step's already-fixed release among the users
    with the original weights; the release totals are not re-optimized.
    """
    if not series:
        raise ValueError("series must not be empty")
    evaluator = StageEvaluator(
        spec, grid, weights, formulation, nu, include_hydropower, aggregate_users=True
    )
    tables = [evaluator.table(rec) for rec in series]
    _check_tables(tables)
    actions, values, cycles = _solve_cyclic(tables, gamma, convergence_cycles, k_max)
    releases = _fill_releases(
        spec, series, grid, actions, weights, formulation, nu, include_hydropower
    )
    solution = DpSolution(
        spec=spec,
        grid=grid,
        weights=weights,
        formulation=formulation,
        nu=nu,
        include_hydropower=include_hydropower,
        gamma=gamma,
        actions=actions,
        user_releases=releases,
        values=values,
        cycles_used=cycles,
    )
    if start_storage is None:
        start_storage, exact = find_cyclic_start(solution)
    else:
        end = _walk_table(actions, grid.snap(start_storage))
        exact = grid.levels[end] == grid.levels[grid.snap(start_storage)]
    solution.start_storage = float(start_storage)
    solution.start_is_fixed_point = bool(exact)
    solution.outcomes = simulate_policy(spec, series, solution, solution.start_storage)
    return solution


__all__ = [
    "DpSolution",
    "ndp_solve",
    "awd_dp_solve",
    "simulate_policy",
    "find_cyclic_start",
]
