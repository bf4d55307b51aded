"""Command line for the workbench.

Subcommands: ``gen-synthetic`` (seeded dataset), ``optimize`` (run one
config), ``simulate`` (replay an exported policy on a series), ``sweep``
(multi-weight run from a manifest), ``report`` (summary table and
plot-data CSVs for a finished run), ``serve`` (HTTP service).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from ..dp import simulate_policy
from ..synthetic import (
    synthetic_demand_year,
    synthetic_inflows,
    zletovica_system,
)
from ..system import WeightVector
from .io import (
    import_policy_csv,
    ingest_series,
    load_outcomes,
    load_system_spec,
    save_outcomes,
    save_system_spec,
    write_demands_csv,
    write_series_csv,
)
from .runs import Registry, RunConfig, RunRecord, execute_run


def _fmt(x) -> str:
    return format(float(x), ".17g")


def cmd_gen_synthetic(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = zletovica_system(
        steps_per_year=args.steps_per_year,
        release_cap_enforced=args.release_cap,
    )
    flows = synthetic_inflows(args.years, args.seed, args.steps_per_year)
    write_series_csv(out / "series.csv", flows["q"], flows["q1"], flows["q2"], flows["q3"])
    write_demands_csv(out / "demands.csv", synthetic_demand_year(args.steps_per_year))
    save_system_spec(spec, out / "system.json")
    print(f"wrote series.csv, demands.csv, system.json under {out}")
    print(f"  {args.years} years x {args.steps_per_year} steps, seed {args.seed}")
    return 0


def _resolve_record(args) -> tuple[RunRecord, Path]:
    """A run directory either directly or via the registry."""
    if args.run_dir:
        outdir = Path(args.run_dir)
        summary_path = outdir / "summary.json"
        config_path = outdir / "config.json"
        if not config_path.is_file():
            raise FileNotFoundError(f"{config_path} not found")
        record = RunRecord(
            run_id=outdir.name,
            solver=json.loads(config_path.read_text())["solver"],
            status="done" if summary_path.is_file() else "unknown",
            config=json.loads(config_path.read_text()),
            outdir=str(outdir),
            result_paths={
                "summary": "summary.json",
                "outcomes": "outcomes.json",
                "policy": "policy.csv",
            },
            summary=json.loads(summary_path.read_text()) if summary_path.is_file() else None,
        )
        return record, outdir
    registry = Registry(args.state_dir)
    record = registry.get(args.run)
    if record is None:
        raise KeyError(f"unknown run id {args.run}")
    return record, Path(record.outdir)


def cmd_optimize(args) -> int:
    config_path = Path(args.config)
    config = RunConfig.from_dict(json.loads(config_path.read_text("utf-8")))
    config = config.resolve_paths(config_path.parent)
    problems = config.validate()
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    registry = Registry(args.state_dir)
    record = execute_run(config, registry)
    if record.status != "done":
        print(f"run {record.run_id} failed: {record.error}", file=sys.stderr)
        return 1
    print(f"run {record.run_id} done")
    print(f"  outdir: {record.outdir}")
    if record.summary and "total_cost" in record.summary:
        print(f"  total cost: {record.summary['total_cost']:.6g}")
    return 0


def cmd_simulate(args) -> int:
    record, outdir = _resolve_record(args)
    config = RunConfig.from_dict(record.config)
    spec = load_system_spec(args.system or config.system)
    series_path = args.series or config.series
    demands_path = args.demands or config.demands
    records = ingest_series(series_path, demands_path, spec.steps_per_year, spec)
    policy = import_policy_csv(outdir / "policy.csv")
    if args.start is not None:
        start = args.start
    elif record.summary and "start_storage" in record.summary:
        start = float(record.summary["start_storage"])
    else:
        start = float(records[0].d1)  # last resort: the critical level
    weights = WeightVector.from_sequence(config.weights)
    sim = simulate_policy(
        spec, records, policy, start, weights=weights,
        formulation=config.formulation,
        nu=int((config.params or {}).get("nu", 50)),
        include_hydropower=config.solver != "nsdp",
    )
    out_path = Path(args.out) if args.out else outdir / "simulation.json"
    save_outcomes(sim, out_path)
    summary = sim.summary()
    print(f"simulated {len(records)} steps from storage {start:g}")
    print(f"  total cost: {summary['total_cost']:.6g}")
    print(f"  outcomes: {out_path}")
    return 0


def cmd_sweep(args) -> int:
    config = RunConfig(
        solver="moss",
        series=args.series,
        demands=args.demands,
        system=args.system,
        manifest=args.manifest,
        grid_step=args.grid_step,
        train_years=args.train_years,
        seed=args.seed,
        name=args.name,
    )
    config = config.resolve_paths(Path.cwd())
    problems = config.validate()
    if problems:
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    registry = Registry(args.state_dir)
    record = execute_run(config, registry)
    if record.status != "done":
        print(f"sweep {record.run_id} failed: {record.error}", file=sys.stderr)
        return 1
    summary = record.summary or {}
    kept = summary.get("non_dominated_indices", [])
    print(f"sweep {record.run_id} done: {len(summary.get('entries', []))} entries, "
          f"{len(kept)} non-dominated")
    print(f"  outdir: {record.outdir}")
    return 0


def cmd_report(args) -> int:
    record, outdir = _resolve_record(args)
    if record.summary is None:
        print(f"run {record.run_id} has no summary (status {record.status})",
              file=sys.stderr)
        return 1
    report_dir = Path(args.out) if args.out else outdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    summary = record.summary

    if record.config.get("solver") == "moss" or "entries" in summary:
        with open(report_dir / "pareto.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["index", "dominated", "total_cost"] + [f"sum_d{i}" for i in range(1, 9)]
            )
            for e in summary["entries"]:
                sums = e["objective_sums"] or [""] * 8
                writer.writerow([e["index"], e["dominated"], e["total_cost"], *sums])
        print(f"pareto table: {report_dir / 'pareto.csv'}")
        print(f"non-dominated entries: {summary['non_dominated_indices']}")
        return 0

    outcomes = load_outcomes(outdir / "outcomes.json")
    with open(report_dir / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "s_start", "s_end", "r_total", "evap", "overspill",
                         "power", "reward"])
        for k in range(len(outcomes)):
            writer.writerow([
                int(outcomes.t[k]), _fmt(outcomes.s_start[k]), _fmt(outcomes.s_end[k]),
                _fmt(outcomes.r_total[k]), _fmt(outcomes.evap[k]),
                _fmt(outcomes.overspill[k]), _fmt(outcomes.power[k]),
                _fmt(outcomes.reward[k]),
            ])
    sums = outcomes.objective_sums()
    with open(report_dir / "deficits.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"sum_d{i}" for i in range(1, 9)])
        writer.writerow([_fmt(x) for x in sums])
    print(f"run {record.run_id} [{record.config.get('solver')}]")
    print(f"  steps: {summary['steps']}  total cost: {summary['total_cost']:.6g}")
    labels = ["D1 (m)", "D2 (m)", "D3", "D4", "D5", "D6", "D7", "D8 (kWh)"]
    for label, value in zip(labels, summary["objective_sums"]):
        print(f"  sum {label:9s} {value:.6g}")
    print(f"  plot data: {report_dir}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(
        state_dir=args.state_dir,
        host=args.host,
        port=args.port,
        data_dir=args.data_dir,
        queue_depth=args.queue_depth,
        workers=args.workers,
        token=args.token,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resopt",
        description="Reservoir operation optimization workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--years", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-per-year", type=int, default=52, choices=(12, 52))
    p.add_argument("--release-cap", action=argparse.BooleanOptionalAction,
                   default=False,
                   help="enforce the plant-0 release cap in the written system")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("optimize", help="execute one run config")
    p.add_argument("--config", required=True)
    p.add_argument("--state-dir", default="state")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="replay a run's policy on a series")
    p.add_argument("--run", help="run id (with --state-dir)")
    p.add_argument("--run-dir", help="run directory (instead of --run)")
    p.add_argument("--state-dir", default="state")
    p.add_argument("--series")
    p.add_argument("--demands")
    p.add_argument("--system")
    p.add_argument("--start", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="multi-weight run from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--series", required=True)
    p.add_argument("--demands", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--grid-step", type=float, default=1500.0)
    p.add_argument("--train-years", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="")
    p.add_argument("--state-dir", default="state")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summary table and plot-data CSVs")
    p.add_argument("--run")
    p.add_argument("--run-dir")
    p.add_argument("--state-dir", default="state")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--state-dir", default="state")
    p.add_argument("--data-dir")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--queue-depth", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--token")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("simulate", "report") and not (args.run or args.run_dir):
        parser.error("--run or --run-dir is required")
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
