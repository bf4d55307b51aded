"""Stochastic DP: cluster inflows, build transition matrices, derive a
one-year policy and read a few rows of its table."""

import numpy as np

from resopt.clustering import (
    build_transition_matrices,
    class_representatives,
    kmeans_cluster,
)
from resopt.dp import simulate_policy
from resopt.grid import StorageGrid
from resopt.sdp import nsdp_solve
from resopt.synthetic import synthetic_series, zletovica_system
from resopt.system import WeightVector

spec = zletovica_system(steps_per_year=52, release_cap_enforced=False)
T = 52
series = synthetic_series(12, seed=11)
train, test = series[: 10 * T], series[10 * T :]

q = [r.q for r in train]
q_tr = [max(r.q3 - r.q, 0.0) for r in train]
clustering_q = kmeans_cluster(q, 5, seed=11)
clustering_qtr = kmeans_cluster(q_tr, 5, seed=11)
print("inflow class centres:", [f"{c:.0f}" for c in clustering_q.centres])
print("interval edges:      ", [f"{e:.0f}" for e in clustering_q.edges])

tms = build_transition_matrices(clustering_q, q, T)
print("\nweek-1 transition matrix (rows sum to 1):")
print(np.round(tms.at(0), 2))

reps = class_representatives(clustering_q, clustering_qtr, q, q_tr, T)
grid = StorageGrid.from_levels(np.linspace(spec.s_dead, spec.s_max, 15))
weights = WeightVector(2e6, 2e6, 200, 1, 200, 1, 300, 0)
policy = nsdp_solve(spec, train[:T], clustering_q, clustering_qtr, tms, grid,
                    weights, qtr_representatives=reps)
print(f"\npolicy converged in {policy.cycles_used} cycles; table "
      f"{policy.actions.shape} = (weeks, storage levels, classes)")

rows = policy.policy_rows()
print("sample policy rows (storage, week, q class value, q_tr class value, next):")
for row in rows[150:154]:
    print("  ", tuple(round(x, 2) if isinstance(x, float) else x for x in row))

sim = simulate_policy(spec, test, policy, policy.grid.levels[7])
print(f"\nsimulated {len(sim)} test weeks: total cost {sim.total_cost():.4g}")
print("objective sums D1..D8:",
      [f"{s:.3g}" for s in sim.objective_sums()])
