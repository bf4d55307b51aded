"""Q-learning on a deterministic year: watch the greedy policy approach the
DP optimum through training checkpoints."""

from dataclasses import replace

import numpy as np

from resopt.clustering import kmeans_cluster
from resopt.dp import ndp_solve, simulate_policy
from resopt.grid import StorageGrid
from resopt.rl import RlBenchmark, RlConfig, TotalRlPolicy, nrl_train, s_n_benchmark
from resopt.synthetic import toy_system, toy_year_series
from resopt.system import WeightVector, volume_to_level

spec = toy_system(steps_per_year=52)
grid = StorageGrid.from_levels(np.linspace(500.0, 4500.0, 15))
d1 = volume_to_level(spec, 2500.0)
d2 = volume_to_level(spec, 2500.0 + 0.5 * grid.step_size())
year = [replace(r, d1=d1, d2=d2, d3=120.0, d5=90.0, d4=r.d4 * 2.5)
        for r in toy_year_series(seed=0)]
weights = WeightVector(5e5, 5e5, 2, 1, 2, 1, 4, 0)

reference = ndp_solve(spec, year, grid, weights)
print(f"DP optimum: cost {reference.total_cost():.6g} "
      f"from storage {reference.start_storage:.0f}")

clustering_q = kmeans_cluster([r.q for r in year], 1, seed=0)
clustering_qtr = kmeans_cluster([r.q3 - r.q for r in year], 1, seed=0)
config = RlConfig(max_episodes=10_000, gamma=0.5, alpha0=0.8, seed=0,
                  checkpoint_every=1_000)
bench = RlBenchmark(series=year, start_storage=reference.start_storage,
                    reference=reference.outcomes)
policy = nrl_train(spec, year, grid, clustering_q, clustering_qtr, weights,
                   config, benchmark=bench)

print(f"\ntrained {policy.episodes_trained} episodes, "
      f"{len(policy.actions)} states stored")
print("checkpoints (episode, storage distance to the DP trajectory, greedy cost):")
for c in policy.checkpoints:
    print(f"  {c['episode']:>6d}  S_n {c['s_n']:>8.0f}  cost {c['greedy_cost']:.6g}")

final = simulate_policy(spec, year, TotalRlPolicy(policy), reference.start_storage)
print(f"\nfinal greedy policy: cost {final.total_cost():.6g} "
      f"({final.total_cost() / reference.total_cost():.4f} x optimum), "
      f"S_n {s_n_benchmark(reference.outcomes, final):.0f}")
