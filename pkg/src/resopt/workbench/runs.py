"""Run configuration, execution and the persisted run registry.

A run takes data files plus solver settings, executes the chosen solver,
and leaves a self-contained directory: config snapshot, outcome series,
policy table, summary JSON (and per-weight-set children for sweeps). The
registry is a single JSON file updated atomically, so run ids stay unique
and stable across restarts.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import threading
import traceback
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..clustering import (
    build_transition_matrices,
    class_representatives,
    kmeans_cluster,
)
from ..dp import awd_dp_solve, ndp_solve, simulate_policy
from ..grid import StorageGrid
from ..moss import entry_seed, moss_execute
from ..rl import RlConfig, TotalRlPolicy, nrl_train, write_learning_curve_csv
from ..sdp import nsdp_solve
from ..system import SystemSpec, WeightVector, tributary_balance_note
from .io import (
    export_policy_csv,
    ingest_series,
    load_outcomes,
    load_system_spec,
    save_outcomes,
)

SOLVERS = ("ndp", "awd-dp", "nsdp", "nrl", "moss")


@dataclass
class RunConfig:
    """Everything one optimization run needs, JSON-serializable."""

    solver: str
    series: str
    demands: str
    system: str
    formulation: str = "linear"
    weights: list[float] | None = None
    manifest: str | None = None
    grid_step: float | None = None
    grid_levels: list[float] | None = None
    train_years: int | None = None
    evaluate_on: str = "auto"  # test | train | all | auto
    start_storage: float | None = None
    seed: int = 0
    name: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "solver" not in data or "series" not in data or "demands" not in data \
                or "system" not in data:
            raise ValueError("config needs solver, series, demands and system")
        return cls(**data)

    def resolve_paths(self, base: Path) -> "RunConfig":
        def res(p):
            return str((base / p).resolve()) if p and not os.path.isabs(p) else p

        return RunConfig(
            **{
                **self.to_dict(),
                "series": res(self.series),
                "demands": res(self.demands),
                "system": res(self.system),
                "manifest": res(self.manifest) if self.manifest else None,
            }
        )

    def validate(self) -> list[str]:
        problems = []
        if self.solver not in SOLVERS:
            problems.append(f"solver: must be one of {', '.join(SOLVERS)}")
        for name in ("series", "demands", "system"):
            p = getattr(self, name)
            if not p or not Path(p).is_file():
                problems.append(f"{name}: file not found ({p})")
        if self.formulation not in ("linear", "quadratic"):
            problems.append("formulation: must be linear or quadratic")
        if self.solver == "moss":
            if not self.manifest or not Path(self.manifest).is_file():
                problems.append(f"manifest: file not found ({self.manifest})")
        elif self.weights is None:
            problems.append("weights: required for single-weight solvers")
        if self.weights is not None:
            if len(self.weights) != 8:
                problems.append("weights: exactly 8 components required")
            elif any(w < 0 for w in self.weights):
                problems.append("weights: must be nonnegative")
            elif not any(w > 0 for w in self.weights):
                problems.append("weights: at least one must be positive")
        if self.grid_step is None and not self.grid_levels:
            problems.append("grid_step or grid_levels: one is required")
        if self.grid_step is not None and self.grid_step <= 0:
            problems.append("grid_step: must be positive")
        if self.train_years is not None and self.train_years < 1:
            problems.append("train_years: must be at least 1")
        if self.evaluate_on not in ("auto", "test", "train", "all"):
            problems.append("evaluate_on: must be auto, test, train or all")
        return problems


@dataclass
class RunRecord:
    run_id: str
    solver: str
    name: str = ""
    status: str = "queued"  # queued | running | done | failed
    created: str = ""
    started: str = ""
    finished: str = ""
    error: str = ""
    config: dict = field(default_factory=dict)
    outdir: str = ""
    result_paths: dict = field(default_factory=dict)
    summary: dict | None = None
    children: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(**data)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class Registry:
    """Persisted run index: one JSON file, written via temp-and-rename.

    Methods are safe to call from multiple threads of one process; every
    write goes through a fresh temp file and an atomic replace.
    """

    def __init__(self, state_dir):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.state_dir / "registry.json"
        self._lock = threading.RLock()

    def _load(self) -> dict:
        if not self.path.is_file():
            return {"counter": 0, "runs": {}}
        return json.loads(self.path.read_text("utf-8"))

    def _write(self, data: dict) -> None:
        tmp = self.path.with_name(f".registry-{uuid.uuid4().hex}.tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", "utf-8")
        os.replace(tmp, self.path)

    def new_record(self, config: RunConfig) -> RunRecord:
        with self._lock:
            data = self._load()
            data["counter"] += 1
            run_id = f"run-{data['counter']:04d}-{uuid.uuid4().hex[:6]}"
            record = RunRecord(
                run_id=run_id,
                solver=config.solver,
                name=config.name,
                status="queued",
                created=_now(),
                config=config.to_dict(),
                outdir=str(self.state_dir / "runs" / run_id),
            )
            data["runs"][run_id] = record.to_dict()
            self._write(data)
            return record

    def upsert(self, record: RunRecord) -> None:
        with self._lock:
            data = self._load()
            data["runs"][record.run_id] = record.to_dict()
            self._write(data)

    def get(self, run_id: str) -> RunRecord | None:
        with self._lock:
            data = self._load()
        raw = data["runs"].get(run_id)
        return RunRecord.from_dict(raw) if raw else None

    def list(self) -> list[RunRecord]:
        with self._lock:
            data = self._load()
        records = [RunRecord.from_dict(v) for v in data["runs"].values()]
        return sorted(records, key=lambda r: r.run_id)


# -- execution ---------------------------------------------------------------


def _build_grid(config: RunConfig, spec: SystemSpec) -> StorageGrid:
    if config.grid_levels:
        return StorageGrid.from_levels(config.grid_levels, spec)
    return StorageGrid.uniform(spec, float(config.grid_step))


def _split(records, config: RunConfig, steps_per_year: int):
    if config.train_years is None:
        return [], records
    boundary = config.train_years * steps_per_year
    if boundary >= len(records):
        raise ValueError(
            f"train_years={config.train_years} does not leave a test split "
            f"({len(records)} steps total)"
        )
    return records[:boundary], records[boundary:]


def _eval_records(train, test, config: RunConfig):
    mode = config.evaluate_on
    if mode == "auto":
        mode = "test" if train else "all"
    if mode == "train":
        if not train:
            raise ValueError("evaluate_on=train requires train_years")
        return train
    if mode == "test":
        if not test:
            raise ValueError("evaluate_on=test requires train_years")
        return test
    return train + test


def _default_start(grid: StorageGrid, config: RunConfig) -> float:
    if config.start_storage is not None:
        return float(config.start_storage)
    return grid.levels[grid.m // 2]


def _solver_outputs(config: RunConfig, spec: SystemSpec, seed: int | None = None):
    """Run the configured solver; returns (outcomes, policy_rows, extra)."""
    records = ingest_series(config.series, config.demands, spec.steps_per_year, spec)
    grid = _build_grid(config, spec)
    weights = WeightVector.from_sequence(config.weights)
    balance_note = tributary_balance_note(records)
    params = dict(config.params or {})
    nu = int(params.get("nu", 50))
    gamma = float(params.get("gamma", 1.0))
    k_max = int(params.get("k_max", 10))
    T = spec.steps_per_year
    train, evaluated = _split(records, config, T)
    evaluated = _eval_records(train, evaluated, config)
    extra: dict = {"steps_evaluated": len(evaluated), "train_steps": len(train)}
    if balance_note:
        extra["notes"] = [balance_note]

    if config.solver in ("ndp", "awd-dp"):
        solve = ndp_solve if config.solver == "ndp" else awd_dp_solve
        sol = solve(
            spec, evaluated, grid, weights, config.formulation, nu, gamma,
            convergence_cycles=int(params.get("convergence_cycles", 1)),
            k_max=k_max, start_storage=config.start_storage,
        )
        extra["cycles_used"] = sol.cycles_used
        extra["start_storage"] = sol.start_storage
        extra["start_is_fixed_point"] = sol.start_is_fixed_point
        return sol.outcomes, sol.policy_rows(), extra

    if not train:
        raise ValueError(f"{config.solver} requires train_years")
    q_train = [r.q for r in train]
    qtr_train = [max(r.q3 - r.q, 0.0) for r in train]
    n_classes = int(params.get("n_classes", 5))
    cluster_seed = int(params.get("cluster_seed", config.seed))
    cq = kmeans_cluster(q_train, n_classes, seed=cluster_seed)
    ctr = kmeans_cluster(qtr_train, n_classes, seed=cluster_seed)
    start = _default_start(grid, config)

    if config.solver == "nsdp":
        tms = build_transition_matrices(cq, q_train, T)
        reps = class_representatives(cq, ctr, q_train, qtr_train, T)
        policy = nsdp_solve(
            spec, train[:T], cq, ctr, tms, grid, weights, config.formulation,
            nu, gamma,
            convergence_cycles=int(params.get("convergence_cycles", 3)),
            k_max=int(params.get("k_max", 30)),
            qtr_representatives=reps,
        )
        outcomes = simulate_policy(spec, evaluated, policy, start)
        extra["cycles_used"] = policy.cycles_used
        extra["start_storage"] = start
        return outcomes, policy.policy_rows(), extra

    if config.solver == "nrl":
        rl_seed = int(seed if seed is not None else config.seed)
        rl_config = RlConfig(
            alpha0=float(params.get("alpha0", 0.8)),
            alpha_min=float(params.get("alpha_min", 0.001)),
            gamma=float(params.get("rl_gamma", 0.5)),
            epsilon_schedule=(
                tuple(tuple(x) for x in params["epsilon_schedule"])
                if params.get("epsilon_schedule")
                else None
            ),
            max_episodes=int(params.get("max_episodes", 10_000)),
            learning_threshold=float(params.get("learning_threshold", 0.0)),
            alpha_stride=int(params.get("alpha_stride", 500)),
            seed=rl_seed,
            checkpoint_every=int(params.get("checkpoint_every", 10_000)),
            terminal_bootstrap=str(params.get("terminal_bootstrap", "cyclic")),
        )
        policy = nrl_train(
            spec, train, grid, cq, ctr, weights, rl_config,
            config.formulation, nu,
        )
        outcomes = simulate_policy(spec, evaluated, TotalRlPolicy(policy), start)
        extra["episodes_trained"] = policy.episodes_trained
        extra["final_pass_lr"] = policy.final_pass_lr
        extra["converged"] = policy.converged
        extra["states_stored"] = len(policy.actions)
        extra["start_storage"] = start
        extra["_rl_policy"] = policy
        if policy.episodes_trained == 0:
            extra["flags"] = ["empty policy: trained for 0 episodes"]
        return outcomes, policy.policy_rows(), extra

    raise ValueError(f"unknown solver {config.solver!r}")


def execute_run(
    config: RunConfig,
    registry: Registry,
    record: RunRecord | None = None,
) -> RunRecord:
    """Execute a run to completion, persisting artifacts and status.

    Solver failures are captured into the record (status ``failed``); a
    record that is already done is returned untouched (idempotence).
    """
    if record is None:
        record = registry.new_record(config)
    if record.status == "done":
        return record
    record.status = "running"
    record.started = _now()
    registry.upsert(record)
    outdir = Path(record.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        problems = config.validate()
        if problems:
            raise ValueError("invalid config: " + "; ".join(problems))
        spec = load_system_spec(config.system)
        (outdir / "config.json").write_text(
            json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8"
        )
        if config.solver == "moss":
            summary = _execute_moss(config, spec, registry, record)
        else:
            outcomes, policy_rows, extra = _solver_outputs(config, spec)
            rl_policy = extra.pop("_rl_policy", None)
            save_outcomes(outcomes, outdir / "outcomes.json")
            export_policy_csv(policy_rows, outdir / "policy.csv")
            record.result_paths = {
                "outcomes": "outcomes.json",
                "policy": "policy.csv",
            }
            if rl_policy is not None:
                write_learning_curve_csv(rl_policy, outdir / "learning_curve.csv")
                record.result_paths["learning_curve"] = "learning_curve.csv"
            summary = {
                "solver": config.solver,
                "formulation": config.formulation,
                "weights": list(config.weights),
                **outcomes.summary(),
                **{k: v for k, v in extra.items() if not k.startswith("_")},
            }
        (outdir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", "utf-8"
        )
        record.result_paths["summary"] = "summary.json"
        record.summary = summary
        record.status = "done"
    except Exception as exc:  # noqa: BLE001 - captured into the record
        record.status = "failed"
        record.error = f"{type(exc).__name__}: {exc}"
        record.summary = None
        (outdir / "error.txt").write_text(traceback.format_exc(), "utf-8")
    record.finished = _now()
    registry.upsert(record)
    return record


def _execute_moss(config: RunConfig, spec: SystemSpec, registry: Registry,
                  record: RunRecord) -> dict:
    manifest = json.loads(Path(config.manifest).read_text("utf-8"))
    child_solver = manifest.get("solver", "ndp")
    if child_solver not in SOLVERS or child_solver == "moss":
        raise ValueError(f"manifest solver must be a single-weight solver, got {child_solver!r}")
    weight_sets = manifest.get("weight_sets")
    if not weight_sets:
        raise ValueError("manifest needs a nonempty weight_sets list")
    formulation = manifest.get("formulation", config.formulation)
    child_params = {**(config.params or {}), **manifest.get("params", {})}
    workers = int(child_params.pop("workers", 1))

    child_records: list[RunRecord] = []
    base = config.to_dict()
    for i, ws in enumerate(weight_sets):
        child_config = RunConfig.from_dict(
            {
                **base,
                "solver": child_solver,
                "formulation": formulation,
                "weights": [float(x) for x in ws],
                "manifest": None,
                "name": f"{config.name or record.run_id} [{i}]",
                "params": child_params,
                "seed": entry_seed(config.seed, i),
            }
        )
        child_records.append(registry.new_record(child_config))

    def run_one(weights: WeightVector, seed: int):
        del weights  # the entry seed identifies the child deterministically
        i = (seed - config.seed * 100_003) // 7_919
        child = execute_run(
            RunConfig.from_dict(child_records[i].config), registry, child_records[i]
        )
        if child.status != "done":
            raise RuntimeError(child.error or "child run failed")
        return load_outcomes(Path(child.outdir) / "outcomes.json")

    vectors = [WeightVector.from_sequence(ws) for ws in weight_sets]
    sweep = moss_execute(
        run_one, vectors, solver=child_solver, formulation=formulation,
        workers=workers, master_seed=config.seed,
    )
    record.children = [c.run_id for c in child_records]
    kept = [e.index for e in sweep.entries if e.dominated is False]
    return {
        "solver": "moss",
        "child_solver": child_solver,
        "formulation": formulation,
        "children": [c.run_id for c in child_records],
        "entries": sweep.table(),
        "non_dominated_indices": kept,
    }


__all__ = ["SOLVERS", "RunConfig", "RunRecord", "Registry", "execute_run"]
