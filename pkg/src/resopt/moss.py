"""Multi-weight driver: run a solver once per weight vector, collect the
eight per-objective deviation sums of each evaluated policy, and filter the
results to the non-dominated set."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .outcomes import OutcomeSeries
from .system import WeightVector

DOMINANCE_TOL = 1e-9


def entry_seed(master_seed: int, index: int) -> int:
    """Deterministic per-entry seed for stochastic solvers."""
    return int(master_seed) * 100_003 + 7_919 * int(index)


@dataclass
class MossEntry:
    index: int
    weights: WeightVector
    solver: str
    formulation: str
    objective_sums: np.ndarray | None = None
    total_cost: float | None = None
    artifact: object = None
    error: str | None = None
    dominated: bool | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.objective_sums is not None


@dataclass
class MossRun:
    entries: list[MossEntry] = field(default_factory=list)

    def non_dominated(self) -> list[MossEntry]:
        return [e for e in self.entries if e.ok and e.dominated is False]

    def table(self) -> list[dict]:
        rows = []
        for e in self.entries:
            rows.append(
                {
                    "index": e.index,
                    "solver": e.solver,
                    "formulation": e.formulation,
                    "weights": list(e.weights.as_array()),
                    "objective_sums": None
                    if e.objective_sums is None
                    else [float(x) for x in e.objective_sums],
                    "total_cost": e.total_cost,
                    "dominated": e.dominated,
                    "error": e.error,
                }
            )
        return rows


def dominance_mask(vectors: np.ndarray, tol: float = DOMINANCE_TOL) -> np.ndarray:
    """Boolean mask of non-dominated rows.

    Row a is dominated when some row b is <= a + tol everywhere and
    < a - tol somewhere.
    """
    v = np.asarray(vectors, dtype=float)
    n = v.shape[0]
    keep = np.ones(n, dtype=bool)
    for a in range(n):
        le = np.all(v <= v[a] + tol, axis=1)
        lt = np.any(v < v[a] - tol, axis=1)
        dominators = le & lt
        dominators[a] = False
        if dominators.any():
            keep[a] = False
    return keep


def pareto_filter(entries, tol: float = DOMINANCE_TOL):
    """Maximal non-dominated subset, in stable input order.

    Accepts either an array-like of objective vectors (returns the kept
    rows as an ndarray) or a list of :class:`MossEntry` (returns the kept
    entries and sets every entry's ``dominated`` flag; failed entries are
    left unflagged).
    """
    if len(entries) and isinstance(entries[0], MossEntry):
        ok = [e for e in entries if e.ok]
        if ok:
            mask = dominance_mask(np.array([e.objective_sums for e in ok]), tol)
            for e, keep in zip(ok, mask):
                e.dominated = not keep
        return [e for e in ok if e.dominated is False]
    v = np.asarray(entries, dtype=float)
    if v.size == 0:
        return v
    return v[dominance_mask(v, tol)]


def moss_execute(
    run_one: Callable[[WeightVector, int], OutcomeSeries],
    weight_vectors,
    solver: str = "",
    formulation: str = "linear",
    workers: int = 1,
    master_seed: int = 0,
) -> MossRun:
    """Evaluate every weight vector with ``run_one(weights, seed)``.

    Entries keep their input order whatever the completion order; a failed
    entry records its error without aborting the sweep; dominance flags are
    set over the successful entries' objective sums.
    """
    vectors = [
        w if isinstance(w, WeightVector) else WeightVector.from_sequence(w)
        for w in weight_vectors
    ]
    if not vectors:
        raise ValueError("at least one weight vector is required")
    entries = [
        MossEntry(index=i, weights=w, solver=solver, formulation=formulation)
        for i, w in enumerate(vectors)
    ]

    def execute(entry: MossEntry) -> None:
        try:
            outcome = run_one(entry.weights, entry_seed(master_seed, entry.index))
            entry.objective_sums = np.asarray(outcome.objective_sums(), dtype=float)
            entry.total_cost = float(outcome.total_cost())
            entry.artifact = outcome
        except Exception as exc:  # noqa: BLE001 - per-entry fault isolation
            entry.error = f"{type(exc).__name__}: {exc}"

    if workers <= 1:
        for entry in entries:
            execute(entry)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(execute, entries))

    pareto_filter(entries)
    return MossRun(entries=entries)


__all__ = [
    "MossEntry",
    "MossRun",
    "moss_execute",
    "pareto_filter",
    "dominance_mask",
    "entry_seed",
    "DOMINANCE_TOL",
]
