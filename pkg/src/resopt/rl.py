"""Tabular Q-learning over (step, storage, inflow classes) with the
allocation solver nested inside every executed transition.

Episodes are calendar years of the training series, each started from a
random grid storage. Action sets are rebuilt every step from the episode's
actual inflow (feasibility is data-dependent); rewards are the negated
step costs so the agent maximizes. The learning rate falls linearly over
the episode budget and exploration follows a breakpoint schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .clustering import InflowClustering
from .grid import StorageGrid
from .outcomes import OutcomeSeries
from .stage import StageEvaluator
from .system import (
    EPS,
    SolverError,
    StepRecord,
    SystemSpec,
    WeightVector,
    apply_decision,
)

State = tuple[int, int, int, int]  # (step of year, storage idx, q class, qtr class)


@dataclass(frozen=True)
class RlConfig:
    """Agent hyperparameters and schedules.

    ``epsilon_schedule`` is a list of (episode, epsilon) breakpoints; each
    value holds until the next breakpoint. ``None`` scales the default
    shape (0.8 / 0.4 / 0.2 / 0.05 / 0.0001 at 0, M/4, M/2, 3M/4, 3.5M/4)
    to ``max_episodes``. ``alpha`` falls linearly from ``alpha0`` to
    ``alpha_min`` over the episode budget, updated every ``alpha_stride``
    episodes.
    """

    alpha0: float = 0.8
    alpha_min: float = 0.001
    gamma: float = 0.5
    epsilon_schedule: tuple[tuple[int, float], ...] | None = None
    max_episodes: int = 400_000
    learning_threshold: float = 0.0
    alpha_stride: int = 500
    seed: int = 0
    checkpoint_every: int = 10_000
    terminal_bootstrap: str = "cyclic"  # or "zero"

    def __post_init__(self):
        if not 0 < self.alpha0 <= 1:
            raise ValueError("alpha0 must be in (0, 1]")
        if not 0 < self.alpha_min <= self.alpha0:
            raise ValueError("alpha_min must be in (0, alpha0]")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must be in [0, 1]")
        if self.gamma == 1:
            warnings.warn("gamma=1 can diverge on cyclic episodes", stacklevel=2)
        if self.max_episodes < 0:
            raise ValueError("max_episodes must be nonnegative")
        if self.learning_threshold < 0:
            raise ValueError("learning_threshold must be nonnegative")
        if self.alpha_stride < 1:
            raise ValueError("alpha_stride must be positive")
        if self.terminal_bootstrap not in ("cyclic", "zero"):
            raise ValueError("terminal_bootstrap must be 'cyclic' or 'zero'")
        if self.epsilon_schedule is not None:
            sched = tuple((int(e), float(v)) for e, v in self.epsilon_schedule)
            if not sched or sched[0][0] != 0:
                raise ValueError("epsilon schedule must start at episode 0")
            if any(not 0 <= v <= 1 for _, v in sched):
                raise ValueError("epsilon values must be in [0, 1]")
            if any(sched[i][0] >= sched[i + 1][0] for i in range(len(sched) - 1)):
                raise ValueError("epsilon schedule episodes must increase")
            object.__setattr__(self, "epsilon_schedule", sched)

    def resolved_epsilon_schedule(self) -> tuple[tuple[int, float], ...]:
        if self.epsilon_schedule is not None:
            return self.epsilon_schedule
        m = max(self.max_episodes, 1)
        return (
            (0, 0.8),
            (m // 4, 0.4),
            (m // 2, 0.2),
            (3 * m // 4, 0.05),
            (int(3.5 * m / 4), 0.0001),
        )

    def epsilon_for(self, episode: int) -> float:
        value = 0.0
        for ep, v in self.resolved_epsilon_schedule():
            if episode >= ep:
                value = v
            else:
                break
        return value

    def alpha_for(self, episode: int) -> float:
        if self.max_episodes <= 0:
            return self.alpha0
        held = (episode // self.alpha_stride) * self.alpha_stride
        raw = self.alpha0 - (self.alpha0 - self.alpha_min) * held / self.max_episodes
        return max(self.alpha_min, raw)


class QStore:
    """Sparse state-action values: absent pairs read as 0.

    Values are kept per-state as dense action arrays for speed; the
    ``visited`` mask preserves which (state, action) pairs were actually
    stored, so extraction only considers pairs that were feasible when
    written.
    """

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self._values: dict[State, np.ndarray] = {}
        self._visited: dict[State, np.ndarray] = {}

    def __len__(self) -> int:
        return sum(int(v.sum()) for v in self._visited.values())

    def get(self, state: State, action: int) -> float:
        row = self._values.get(state)
        return 0.0 if row is None else float(row[action])

    def set(self, state: State, action: int, value: float) -> None:
        row = self._values.get(state)
        if row is None:
            row = np.zeros(self.n_actions)
            self._values[state] = row
            self._visited[state] = np.zeros(self.n_actions, dtype=bool)
        row[action] = value
        self._visited[state][action] = True

    def best(self, state: State, actions: np.ndarray) -> float:
        """max over the given feasible actions, absent pairs counting 0."""
        row = self._values.get(state)
        if row is None:
            return 0.0
        return float(row[actions].max())

    def greedy(self, state: State, actions: np.ndarray) -> int:
        row = self._values.get(state)
        if row is None:
            return int(actions[0])
        return int(actions[int(np.argmax(row[actions]))])

    def visited_pairs(self):
        for state, mask in self._visited.items():
            for action in np.nonzero(mask)[0]:
                yield state, int(action)

    def extract_actions(self) -> dict[State, int]:
        """Greedy table over visited pairs only (argmax, ties to smaller)."""
        table = {}
        for state, mask in self._visited.items():
            acts = np.nonzero(mask)[0]
            if acts.size == 0:
                continue
            vals = self._values[state][acts]
            table[state] = int(acts[int(np.argmax(vals))])
        return table


def q_update(
    store: QStore,
    state: State,
    action: int,
    reward: float,
    next_state: State | None,
    next_actions: np.ndarray | None,
    alpha: float,
    gamma: float,
) -> float:
    """One incremental state-action value update; returns the absolute
    update magnitude (accumulated into the per-pass learning rate)."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    best = 0.0
    if next_state is not None and next_actions is not None and len(next_actions):
        best = store.best(next_state, np.asarray(next_actions))
    q = store.get(state, action)
    step = alpha * (reward + gamma * best - q)
    store.set(state, action, q + step)
    return abs(step)


def feasible_actions(
    spec: SystemSpec, grid: StorageGrid, i: int, rec: StepRecord, t: int | None = None
) -> np.ndarray:
    """Grid indices reachable from storage index i under the step's actual
    inflow and evaporation (and the release cap when enforced).

    Never empty: when no strict move exists the single forced move is
    returned - to the top level when water is forced in (excess spills),
    to the bottom when even a zero release cannot hold the grid floor.
    """
    t = rec.t if t is None else t
    s = grid.as_array()
    areas = grid.areas(spec)
    rate = spec.step_evap_rate(t)
    evap = rate * (areas[i] + areas) / 2.0
    r = (s[i] + rec.q) - s - evap
    ok = r >= -EPS
    if spec.release_cap_enforced:
        ok &= r <= spec.release_cap_volume(t) + EPS
    idx = np.nonzero(ok)[0]
    if idx.size:
        return idx
    if r[-1] >= -EPS:
        return np.array([grid.m - 1])  # forced fill: spill over the top
    return np.array([0])  # forced drain: nothing left to release


@dataclass
class RlPolicy:
    """Greedy table extracted from a trained store.

    ``decide`` is strict (None for a state the agent never stored), which
    forward simulation reports as a policy gap; ``TotalRlPolicy`` wraps
    this with a deterministic fallback for service use.
    """

    spec: SystemSpec
    grid: StorageGrid
    weights: WeightVector
    formulation: str
    nu: int
    include_hydropower: bool
    clustering_q: InflowClustering
    clustering_qtr: InflowClustering
    actions: dict[State, int]
    episodes_trained: int
    final_pass_lr: float
    converged: bool
    learning_curve: list[tuple[int, float]] = field(default_factory=list)
    checkpoints: list[dict] = field(default_factory=list)

    def state_for(self, t: int, storage: float, rec: StepRecord) -> State:
        ty = t % self.spec.steps_per_year
        i = self.grid.snap(storage)
        lq = self.clustering_q.classify(rec.q)
        ltr = self.clustering_qtr.classify(max(rec.q3 - rec.q, 0.0))
        return (ty, i, lq, ltr)

    def decide(self, t: int, storage: float, rec: StepRecord):
        j = self.actions.get(self.state_for(t, storage, rec))
        return None if j is None else self.grid.levels[j]

    def policy_rows(self) -> list[tuple]:
        rows = []
        levels = self.grid.levels
        for (ty, i, lq, ltr), j in sorted(self.actions.items()):
            rows.append(
                (
                    levels[i],
                    ty + 1,
                    self.clustering_q.centres[lq],
                    self.clustering_qtr.centres[ltr],
                    levels[j],
                )
            )
        return rows


@dataclass
class TotalRlPolicy:
    """Gap-free view of an RlPolicy: a state the agent never stored falls
    back to the feasible move closest to holding the current storage."""

    policy: RlPolicy

    def __getattr__(self, name):
        return getattr(self.policy, name)

    def decide(self, t: int, storage: float, rec: StepRecord) -> float:
        got = self.policy.decide(t, storage, rec)
        if got is not None:
            return got
        grid = self.policy.grid
        i = grid.snap(storage)
        acts = feasible_actions(self.policy.spec, grid, i, rec, rec.t)
        levels = grid.as_array()
        j = int(acts[int(np.argmin(np.abs(levels[acts] - levels[i])))])
        return grid.levels[j]


@dataclass
class RlBenchmark:
    """Context for training checkpoints: simulate the greedy policy so far
    on a held-out series and log its distance to a reference trajectory."""

    series: list[StepRecord]
    start_storage: float
    reference: OutcomeSeries | None = None


def s_n_benchmark(reference: OutcomeSeries, candidate: OutcomeSeries) -> float:
    """Sum of absolute storage differences between two trajectories."""
    if len(reference) != len(candidate):
        raise ValueError(
            f"series lengths differ: {len(reference)} vs {len(candidate)}"
        )
    return float(np.abs(reference.s_start - candidate.s_start).sum())


def nrl_train(
    spec: SystemSpec,
    series: list[StepRecord],
    grid: StorageGrid,
    clustering_q: InflowClustering,
    clustering_qtr: InflowClustering,
    weights: WeightVector,
    config: RlConfig,
    formulation: str = "linear",
    nu: int = 50,
    include_hydropower: bool = True,
    benchmark: RlBenchmark | None = None,
) -> RlPolicy:
    """Train the agent over year-episodes of the series.

    Stops when a complete pass over the years accumulates less learning
    than ``config.learning_threshold``, or at ``config.max_episodes``.
    Step costs per (year, step, storage, target) are precomputed once, so
    episodes reduce to table lookups and value updates.
    """
    T = spec.steps_per_year
    n_years = len(series) // T
    if n_years < 1:
        raise ValueError("training series must cover at least one full year")
    if len(series) % T:
        warnings.warn(
            f"dropping {len(series) % T} trailing steps (not a full year)",
            stacklevel=2,
        )
    m = grid.m
    evaluator = StageEvaluator(spec, grid, weights, formulation, nu, include_hydropower)
    levels = grid.as_array()
    areas = grid.areas(spec)

    rewards: list[list[np.ndarray]] = []
    feas: list[list[list[np.ndarray]]] = []
    lq = np.empty((n_years, T), dtype=int)
    ltr = np.empty((n_years, T), dtype=int)
    for y in range(n_years):
        rew_y, feas_y = [], []
        for t in range(T):
            rec = series[y * T + t]
            lq[y, t] = clustering_q.classify(rec.q)
            ltr[y, t] = clustering_qtr.classify(max(rec.q3 - rec.q, 0.0))
            tab = evaluator.table(rec)
            rew = np.where(tab.feasible, -tab.g, -np.inf)
            rows = []
            for i in range(m):
                idx = np.nonzero(tab.feasible[i])[0]
                if idx.size == 0:
                    # forced move: fill-and-spill at the top, or drain at the floor
                    rate = spec.step_evap_rate(rec.t)
                    evap_top = rate * (areas[i] + areas[-1]) / 2.0
                    desired_top = (levels[i] + rec.q) - levels[-1] - evap_top
                    j = m - 1 if desired_top >= -EPS else 0
                    out = apply_decision(
                        spec, rec, levels[i], levels[j], weights,
                        formulation, nu, include_hydropower,
                    )
                    rew[i, j] = -out.reward
                    idx = np.array([j])
                rows.append(idx)
            rew_y.append(rew)
            feas_y.append(rows)
        rewards.append(rew_y)
        feas.append(feas_y)

    store = QStore(m)
    rng = np.random.default_rng(config.seed)
    learning_curve: list[tuple[int, float]] = []
    checkpoints: list[dict] = []
    episodes = 0
    final_pass_lr = float("inf")
    converged = False

    def run_checkpoint(ep: int) -> None:
        if benchmark is None:
            return
        from .dp import simulate_policy

        snapshot = RlPolicy(
            spec, grid, weights, formulation, nu, include_hydropower,
            clustering_q, clustering_qtr, store.extract_actions(),
            ep, float("nan"), False,
        )
        sim = simulate_policy(
            spec, benchmark.series, TotalRlPolicy(snapshot), benchmark.start_storage
        )
        entry = {"episode": ep, "greedy_cost": sim.total_cost()}
        if benchmark.reference is not None:
            entry["s_n"] = s_n_benchmark(benchmark.reference, sim)
        checkpoints.append(entry)

    while episodes < config.max_episodes and not converged:
        pass_lr = 0.0
        completed_pass = True
        for y in range(n_years):
            if episodes >= config.max_episodes:
                completed_pass = False
                break
            alpha = config.alpha_for(episodes)
            epsilon = config.epsilon_for(episodes)
            i = int(rng.integers(m))
            lr = 0.0
            for t in range(T):
                state = (t, i, int(lq[y, t]), int(ltr[y, t]))
                acts = feas[y][t][i]
                if acts.size > 1 and rng.random() < epsilon:
                    j = int(acts[rng.integers(acts.size)])
                else:
                    j = store.greedy(state, acts)
                reward = rewards[y][t][i, j]
                if t + 1 < T:
                    nstate = (t + 1, j, int(lq[y, t + 1]), int(ltr[y, t + 1]))
                    nacts = feas[y][t + 1][j]
                elif config.terminal_bootstrap == "cyclic":
                    nstate = (0, j, int(lq[y, 0]), int(ltr[y, 0]))
                    nacts = feas[y][0][j]
                else:
                    nstate, nacts = None, None
                lr += q_update(store, state, j, reward, nstate, nacts, alpha, config.gamma)
                i = j
            if not np.isfinite(lr):
                raise SolverError(
                    f"non-finite state-action values in episode {episodes} "
                    f"(year {y}); check gamma/reward scaling"
                )
            pass_lr += lr
            learning_curve.append((episodes, lr))
            episodes += 1
            if config.checkpoint_every and episodes % config.checkpoint_every == 0:
                run_checkpoint(episodes)
        if completed_pass:
            final_pass_lr = pass_lr
            if pass_lr < config.learning_threshold:
                converged = True

    return RlPolicy(
        spec=spec,
        grid=grid,
        weights=weights,
        formulation=formulation,
        nu=nu,
        include_hydropower=include_hydropower,
        clustering_q=clustering_q,
        clustering_qtr=clustering_qtr,
        actions=store.extract_actions(),
        episodes_trained=episodes,
        final_pass_lr=final_pass_lr,
        converged=converged,
        learning_curve=learning_curve,
        checkpoints=checkpoints,
    )


def write_learning_curve_csv(policy: RlPolicy, path) -> None:
    """episode, learning-rate sum, and checkpoint S_n where available."""
    s_n_by_episode = {c["episode"]: c.get("s_n") for c in policy.checkpoints}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("episode,lr,s_n\n")
        for ep, lr in policy.learning_curve:
            s_n = s_n_by_episode.get(ep + 1, "")
            s_n_txt = "" if s_n is None or s_n == "" else format(s_n, ".17g")
            fh.write(f"{ep},{format(lr, '.17g')},{s_n_txt}\n")


__all__ = [
    "RlConfig",
    "QStore",
    "q_update",
    "feasible_actions",
    "RlPolicy",
    "TotalRlPolicy",
    "RlBenchmark",
    "nrl_train",
    "s_n_benchmark",
    "write_learning_curve_csv",
]
