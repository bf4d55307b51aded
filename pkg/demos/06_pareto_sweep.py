"""Multi-weight sweep: run the deterministic solver across weight vectors
and filter the outcomes to the non-dominated set."""


from resopt.dp import ndp_solve
from resopt.grid import StorageGrid
from resopt.moss import moss_execute
from resopt.synthetic import toy_series, toy_system
from resopt.system import WeightVector

spec = toy_system()
grid = StorageGrid.uniform(spec, 500.0)
series = toy_series(T=8, d3=150.0, d4=260.0)

# trade town supply (w3) against irrigation (w4)
weight_sets = [
    (50, 50, 8, 1, 0, 0, 0, 0),
    (50, 50, 4, 1, 0, 0, 0, 0),
    (50, 50, 2, 2, 0, 0, 0, 0),
    (50, 50, 1, 4, 0, 0, 0, 0),
    (50, 50, 1, 8, 0, 0, 0, 0),
    (50, 50, 8, 1, 0, 0, 0, 0),  # duplicate on purpose: stays non-dominated
]


def run_one(weights: WeightVector, seed: int):
    return ndp_solve(spec, series, grid, weights, formulation="quadratic",
                     nu=50).outcomes


sweep = moss_execute(run_one, weight_sets, solver="ndp",
                     formulation="quadratic", workers=2, master_seed=1)

print("entry  w3:w4   sum D3   sum D4   total cost   dominated")
for e in sweep.entries:
    w = e.weights.as_array()
    sums = e.objective_sums
    print(f"  {e.index}   {w[2]:>3.0f}:{w[3]:<3.0f} {sums[2]:8.1f} {sums[3]:8.1f} "
          f"{e.total_cost:12.4g}   {e.dominated}")

kept = sweep.non_dominated()
print(f"\n{len(kept)} of {len(sweep.entries)} entries are non-dominated")
print("town-vs-irrigation deficits trace the trade-off frontier:")
for e in kept:
    print(f"  D3+D5 {e.objective_sums[2] + e.objective_sums[4]:8.1f}   "
          f"D4+D6 {e.objective_sums[3] + e.objective_sums[5]:8.1f}")
