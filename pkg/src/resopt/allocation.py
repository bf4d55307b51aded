"""Single-step water allocation among competing users.

Given a fixed available volume and per-user demands/weights, pick releases
that minimize the weighted deficit. Two formulations:

* ``linear``   - minimize sum w_i (d_i - r_i); the optimum is the greedy
  fill in decreasing weight order (ties by user index), solved exactly.
* ``quadratic`` - minimize sum w_i (d_i - r_i)^2 with releases restricted
  to nu equal increments of the available volume; solved by marginal-cost
  greedy (discrete water filling), which is optimal on that lattice.

``allocate_oracle`` recomputes the optimum by brute force (vertex
enumeration for linear, exhaustive search of the increment lattice for
quadratic) and exists purely to cross-check ``allocate`` in tests.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

EPS = 1e-9

FORMULATIONS = ("linear", "quadratic")

ORACLE_MAX_USERS = 6
ORACLE_MAX_NU = 60


@dataclass(frozen=True)
class AllocationProblem:
    available: float
    demands: tuple[float, ...]
    weights: tuple[float, ...]
    formulation: str = "linear"
    nu: int = 50

    def __post_init__(self):
        if self.available < 0:
            raise ValueError("available volume must be nonnegative")
        if len(self.demands) != len(self.weights):
            raise ValueError("demands and weights must have equal length")
        if any(d < 0 for d in self.demands):
            raise ValueError("demands must be nonnegative")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        if self.nu < 1:
            raise ValueError("nu must be at least 1")

    @property
    def n(self) -> int:
        return len(self.demands)


def allocation_cost(problem: AllocationProblem, releases) -> float:
    """Objective value of a release vector under the problem's formulation."""
    d = np.asarray(problem.demands, dtype=float)
    w = np.asarray(problem.weights, dtype=float)
    deficit = np.maximum(d - np.asarray(releases, dtype=float), 0.0)
    if problem.formulation == "linear":
        return float(np.dot(w, deficit))
    return float(np.dot(w, deficit * deficit))


def _linear_fill(available: float, demands, weights, order) -> np.ndarray:
    r = np.zeros(len(demands))
    left = available
    for i in order:
        take = min(demands[i], left)
        r[i] = take
        left -= take
        if left <= EPS:
            break
    return r


def allocate(problem: AllocationProblem) -> np.ndarray:
    """Optimal releases for the problem (see module docstring)."""
    d = np.asarray(problem.demands, dtype=float)
    w = np.asarray(problem.weights, dtype=float)
    n = problem.n
    if n == 0:
        return np.zeros(0)
    if d.sum() <= problem.available + EPS:
        # enough water for everyone: the allocation question is moot
        return d.copy()
    if problem.available <= 0:
        return np.zeros(n)

    if problem.formulation == "linear":
        order = sorted(range(n), key=lambda i: (-w[i], i))
        return _linear_fill(problem.available, d, w, order)

    # quadratic: greedy on the increment lattice
    delta = problem.available / problem.nu
    caps = np.floor(d / delta + EPS).astype(int)
    counts = np.zeros(n, dtype=int)
    budget = problem.nu

    def gain(i: int, k: int) -> float:
        # objective drop from granting user i its (k+1)-th increment
        rem = d[i] - k * delta
        return w[i] * delta * (2.0 * rem - delta)

    heap = [(-gain(i, 0), i) for i in range(n) if caps[i] > 0]
    heapq.heapify(heap)
    while budget > 0 and heap:
        _, i = heapq.heappop(heap)
        counts[i] += 1
        budget -= 1
        if counts[i] < caps[i]:
            heapq.heappush(heap, (-gain(i, counts[i]), i))
    return counts * delta


def allocate_oracle(problem: AllocationProblem) -> np.ndarray:
    """Brute-force optimum, for testing ``allocate`` against.

    Ties are broken toward the lexicographically largest release vector.
    Refuses instances beyond (n=6, nu=60) to keep the search exhaustive yet
    bounded.
    """
    n = problem.n
    if n > ORACLE_MAX_USERS:
        raise ValueError(f"oracle limited to {ORACLE_MAX_USERS} users, got {n}")
    if problem.formulation == "quadratic" and problem.nu > ORACLE_MAX_NU:
        raise ValueError(f"oracle limited to nu <= {ORACLE_MAX_NU}, got {problem.nu}")
    d = np.asarray(problem.demands, dtype=float)
    if n == 0:
        return np.zeros(0)
    if d.sum() <= problem.available + EPS:
        return d.copy()
    if problem.available <= 0:
        return np.zeros(n)

    if problem.formulation == "linear":
        best = None
        for order in itertools.permutations(range(n)):
            r = _linear_fill(problem.available, d, problem.weights, order)
            cost = allocation_cost(problem, r)
            key = (cost, tuple(-x for x in r))
            if best is None or key < best[0]:
                best = (key, r)
        return best[1]

    # quadratic: exact search of the lattice, organized as a table over
    # (user, remaining increments) so large nu stays tractable
    w = np.asarray(problem.weights, dtype=float)
    delta = problem.available / problem.nu
    caps = np.floor(d / delta + EPS).astype(int)
    nu = problem.nu
    INF = float("inf")
    best_cost = np.full((n + 1, nu + 1), INF)
    best_cost[n, :] = 0.0
    for i in range(n - 1, -1, -1):
        for u in range(nu + 1):
            lo = INF
            for k in range(min(caps[i], u) + 1):
                c = w[i] * (d[i] - k * delta) ** 2 + best_cost[i + 1, u - k]
                if c < lo:
                    lo = c
            best_cost[i, u] = lo
    # walk forward preferring the largest release at each user among optima
    counts = np.zeros(n, dtype=int)
    u = nu
    for i in range(n):
        chosen = None
        for k in range(min(caps[i], u), -1, -1):
            c = w[i] * (d[i] - k * delta) ** 2 + best_cost[i + 1, u - k]
            if c <= best_cost[i, u] + 1e-12 * max(1.0, abs(best_cost[i, u])):
                chosen = k
                break
        counts[i] = chosen
        u -= chosen
    return counts * delta


__all__ = [
    "AllocationProblem",
    "allocate",
    "allocate_oracle",
    "allocation_cost",
    "FORMULATIONS",
]
