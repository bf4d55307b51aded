"""Independent brute-force references used by the test suite.

These deliberately avoid the solver code paths they check: trajectory costs
come from enumerating every storage path over precomputed stage costs, and
dominance from a plain pairwise double loop.
"""

import itertools

import numpy as np

from resopt.stage import StageEvaluator


def stage_cost_tables(spec, series, grid, weights, formulation="linear", nu=50,
                      include_hydropower=True):
    ev = StageEvaluator(spec, grid, weights, formulation, nu, include_hydropower)
    return [ev.table(rec) for rec in series]


def enumerate_cyclic_trajectories(tables):
    """Cost of the best closed storage cycle by exhaustive enumeration.

    Evaluates all m^T assignments (s_0 .. s_{T-1}) with the wrap transition
    s_{T-1} -> s_0; infeasible moves carry +inf cost. Returns
    (best_cost, best_path).
    """
    T = len(tables)
    m = tables[0].g.shape[0]
    paths = np.array(list(itertools.product(range(m), repeat=T)), dtype=np.int64)
    costs = np.zeros(paths.shape[0])
    for t in range(T):
        nxt = paths[:, (t + 1) % T]
        costs += tables[t].g[paths[:, t], nxt]
    best = int(np.argmin(costs))
    return float(costs[best]), paths[best].tolist()


def brute_force_non_dominated(vectors, tol=1e-9):
    """Pairwise dominance check written independently of the library."""
    v = np.asarray(vectors, dtype=float)
    n = v.shape[0]
    keep = []
    for a in range(n):
        dominated = False
        for b in range(n):
            if a == b:
                continue
            if all(v[b, k] <= v[a, k] + tol for k in range(v.shape[1])) and any(
                v[b, k] < v[a, k] - tol for k in range(v.shape[1])
            ):
                dominated = True
                break
        if not dominated:
            keep.append(a)
    return keep
