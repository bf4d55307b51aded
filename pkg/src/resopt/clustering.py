"""Inflow discretization: 1-D k-means classes and empirical class-transition
matrices per step of year."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class InflowClustering:
    """Sorted cluster centres and the interval edges they induce.

    Edges are the midpoints between adjacent centres; the bottom edge is 0
    and the top edge is five times the largest centre so that simulated
    peaks beyond the training range still classify (into the top class).
    """

    centres: tuple[float, ...]
    edges: tuple[float, ...]
    objective: float
    iterations: int

    @property
    def n_classes(self) -> int:
        return len(self.centres)

    def classify(self, values):
        """Class index/indices for inflow value(s); clamps to [0, L-1]."""
        arr = np.asarray(values, dtype=float)
        idx = np.searchsorted(np.array(self.edges[1:-1]), arr, side="right")
        if arr.ndim == 0:
            return int(idx)
        return idx.astype(int)


def _interval_edges(centres: np.ndarray) -> np.ndarray:
    L = centres.size
    edges = np.empty(L + 1)
    edges[0] = 0.0
    edges[1:L] = (centres[:-1] + centres[1:]) / 2.0
    edges[L] = centres[-1] * 5.0
    return edges


def kmeans_cluster(data, n_classes: int, seed: int = 0) -> InflowClustering:
    """Lloyd's iteration with absolute-difference distance on 1-D data.

    Seeding follows the k-means++ recipe (distance-weighted draws) from an
    explicit seed so runs reproduce; cluster centres are the medians of
    their members (the L1 minimizer); a cluster that loses all members is
    re-seeded at the point farthest from its current centre.
    """
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        raise ValueError("clustering needs at least one data point")
    if np.any(arr < 0):
        raise ValueError("inflow data must be nonnegative")
    distinct = np.unique(arr)
    if not 1 <= n_classes <= distinct.size:
        raise ValueError(
            f"need 1 <= n_classes <= {distinct.size} distinct values, got {n_classes}"
        )

    rng = np.random.default_rng(seed)
    centres = [arr[rng.integers(arr.size)]]
    while len(centres) < n_classes:
        dist = np.min(np.abs(arr[:, None] - np.array(centres)[None, :]), axis=1)
        total = dist.sum()
        if total <= 0:
            # remaining mass sits on the chosen centres; pick a new distinct value
            pool = np.setdiff1d(distinct, np.array(centres))
            centres.append(pool[rng.integers(pool.size)])
            continue
        centres.append(arr[rng.choice(arr.size, p=dist / total)])
    centres = np.array(sorted(centres))

    assign = None
    iterations = 0
    for iterations in range(1, 501):
        dist = np.abs(arr[:, None] - centres[None, :])
        new_assign = np.argmin(dist, axis=1)
        for l in range(n_classes):
            members = arr[new_assign == l]
            if members.size:
                centres[l] = np.median(members)
            else:
                own = np.abs(arr - centres[new_assign])
                far = int(np.argmax(own))
                centres[l] = arr[far]
                new_assign[far] = l
        order = np.argsort(centres, kind="stable")
        centres = centres[order]
        new_assign = np.argsort(order)[new_assign]
        if assign is not None and np.array_equal(new_assign, assign):
            assign = new_assign
            break
        assign = new_assign

    objective = float(np.abs(arr - centres[assign]).sum())
    return InflowClustering(
        centres=tuple(float(c) for c in centres),
        edges=tuple(float(e) for e in _interval_edges(centres)),
        objective=objective,
        iterations=iterations,
    )


def kmeans_objective(data, centres) -> float:
    arr = np.asarray(data, dtype=float)
    c = np.asarray(centres, dtype=float)
    return float(np.min(np.abs(arr[:, None] - c[None, :]), axis=1).sum())


@dataclass(frozen=True)
class TransitionMatrixSet:
    """Row-stochastic class-transition matrices, one per step of year."""

    matrices: np.ndarray = field(repr=False)  # (steps_per_year, L, L)

    def __post_init__(self):
        p = np.asarray(self.matrices, dtype=float)
        if p.ndim != 3 or p.shape[1] != p.shape[2]:
            raise ValueError("matrices must be (steps, L, L)")
        if np.any(p < 0):
            raise ValueError("transition probabilities must be nonnegative")
        if np.any(np.abs(p.sum(axis=2) - 1.0) > 1e-12):
            raise ValueError("every transition matrix row must sum to 1")
        object.__setattr__(self, "matrices", p)

    @property
    def steps_per_year(self) -> int:
        return self.matrices.shape[0]

    @property
    def n_classes(self) -> int:
        return self.matrices.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.matrices[t % self.steps_per_year]


def build_transition_matrices(
    clustering: InflowClustering, values, steps_per_year: int
) -> TransitionMatrixSet:
    """Empirical frequencies of class(t) -> class(t+1) per step of year.

    Consecutive observations provide the transitions (including the wrap
    from a year's last step into the next year's first); rows never
    observed fall back to the uniform distribution.
    """
    arr = np.asarray(values, dtype=float)
    years = arr.size // steps_per_year
    if years < 1:
        raise ValueError("need at least one full year of data")
    if arr.size % steps_per_year:
        warnings.warn(
            f"dropping {arr.size % steps_per_year} trailing steps "
            "(not a full year)",
            stacklevel=2,
        )
        arr = arr[: years * steps_per_year]
    L = clustering.n_classes
    classes = clustering.classify(arr)
    counts = np.zeros((steps_per_year, L, L))
    for k in range(arr.size - 1):
        t = k % steps_per_year
        counts[t, classes[k], classes[k + 1]] += 1.0
    matrices = np.empty_like(counts)
    for t in range(steps_per_year):
        row_sums = counts[t].sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            matrices[t] = np.where(row_sums > 0, counts[t] / row_sums, 1.0 / L)
        matrices[t] /= matrices[t].sum(axis=1, keepdims=True)
    return TransitionMatrixSet(matrices=matrices)


def class_representatives(
    clustering_q: InflowClustering,
    clustering_qtr: InflowClustering,
    q_values,
    qtr_values,
    steps_per_year: int,
) -> np.ndarray:
    """Per (step-of-year, q-class) tributary inflow to assume in training.

    The joint-class simplification drives everything off the reservoir
    inflow's class; the tributary value used for that class at that step is
    the mean of the co-occurring training values, falling back to the
    tributary clustering's own class centre when no sample exists.
    """
    q = np.asarray(q_values, dtype=float)
    qtr = np.asarray(qtr_values, dtype=float)
    if q.size != qtr.size:
        raise ValueError("q and q_tr series must have equal length")
    years = q.size // steps_per_year
    q = q[: years * steps_per_year]
    qtr = qtr[: years * steps_per_year]
    L = clustering_q.n_classes
    classes = clustering_q.classify(q)
    reps = np.zeros((steps_per_year, L))
    for t in range(steps_per_year):
        at_t = slice(t, years * steps_per_year, steps_per_year)
        cls_t = classes[at_t]
        vals_t = qtr[at_t]
        for l in range(L):
            members = vals_t[cls_t == l]
            if members.size:
                reps[t, l] = members.mean()
            else:
                reps[t, l] = clustering_qtr.centres[min(l, clustering_qtr.n_classes - 1)]
    return reps


__all__ = [
    "InflowClustering",
    "kmeans_cluster",
    "kmeans_objective",
    "TransitionMatrixSet",
    "build_transition_matrices",
    "class_representatives",
]
