"""File formats of the workbench.

* series CSV: ``step,date,q,q1,q2,q3`` (volumes in 10^3 m^3 per step)
* demands CSV: ``step_of_year,d1_level,d2_level,d3,d4,d5,d6,d7,d8`` for one
  year, tiled cyclically over the series
* system spec: JSON mirroring :class:`resopt.system.SystemSpec`
* policy CSV: ``storage,step,q_class_value,qtr_class_value,next_storage``
* outcome series: JSON via :meth:`OutcomeSeries.to_dict`

All files are UTF-8 with a header row and ``.`` decimal separator; floats
are written with 17 significant digits so re-reading reproduces them
exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from ..outcomes import OutcomeSeries
from ..system import StepRecord, SystemSpec

SERIES_COLUMNS = ["step", "date", "q", "q1", "q2", "q3"]
DEMANDS_COLUMNS = ["step_of_year", "d1_level", "d2_level", "d3", "d4", "d5", "d6", "d7", "d8"]
POLICY_COLUMNS = ["storage", "step", "q_class_value", "qtr_class_value", "next_storage"]


class IngestError(ValueError):
    """Input file problems, each message carrying its line number."""

    def __init__(self, path, problems: list[str]):
        self.path = str(path)
        self.problems = problems
        preview = "; ".join(problems[:5])
        more = "" if len(problems) <= 5 else f" (+{len(problems) - 5} more)"
        super().__init__(f"{path}: {preview}{more}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- system spec -------------------------------------------------------------


def save_system_spec(spec: SystemSpec, path) -> None:
    data = {
        "storage_curve": [list(k) for k in spec.storage_curve],
        "s_dead": spec.s_dead,
        "s_max": spec.s_max,
        "h_dead": spec.h_dead,
        "h_max": spec.h_max,
        "hec_max": {str(k): v for k, v in spec.hec_max.items()},
        "gen": {str(k): v for k, v in spec.gen.items()},
        "heads": {str(k): v for k, v in spec.heads.items()},
        "evap_rates": list(spec.evap_rates),
        "tailwater_level": spec.tailwater_level,
        "release_cap_enforced": spec.release_cap_enforced,
        "steps_per_year": spec.steps_per_year,
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", "utf-8")


def load_system_spec(path) -> SystemSpec:
    data = json.loads(Path(path).read_text("utf-8"))
    return SystemSpec(
        storage_curve=tuple(tuple(float(x) for x in k) for k in data["storage_curve"]),
        s_dead=float(data["s_dead"]),
        s_max=float(data["s_max"]),
        h_dead=float(data["h_dead"]),
        h_max=float(data["h_max"]),
        hec_max={int(k): float(v) for k, v in data["hec_max"].items()},
        gen={int(k): float(v) for k, v in data["gen"].items()},
        heads={int(k): float(v) for k, v in data["heads"].items()},
        evap_rates=tuple(float(x) for x in data["evap_rates"]),
        tailwater_level=float(data.get("tailwater_level", 990.0)),
        release_cap_enforced=bool(data.get("release_cap_enforced", True)),
        steps_per_year=int(data.get("steps_per_year", 52)),
    )


# -- series and demands ------------------------------------------------------


def write_series_csv(path, q, q1, q2, q3, start_date: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_COLUMNS)
        for t in range(len(q)):
            writer.writerow(
                [t + 1, start_date, _fmt(q[t]), _fmt(q1[t]), _fmt(q2[t]), _fmt(q3[t])]
            )


def read_series_csv(path) -> list[dict]:
    problems: list[str] = []
    rows: list[dict] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != SERIES_COLUMNS:
            raise IngestError(path, [f"line 1: expected header {','.join(SERIES_COLUMNS)}"])
        for line, raw in enumerate(reader, start=2):
            try:
                row = {
                    "step": int(raw["step"]),
                    "date": raw["date"],
                    "q": float(raw["q"]),
                    "q1": float(raw["q1"]),
                    "q2": float(raw["q2"]),
                    "q3": float(raw["q3"]),
                }
            except (TypeError, ValueError):
                problems.append(f"line {line}: malformed row")
                continue
            for name in ("q", "q1", "q2", "q3"):
                if row[name] < 0:
                    problems.append(f"line {line}: {name} is negative")
            if row["q3"] < row["q"]:
                problems.append(f"line {line}: q3 below reservoir inflow q")
            rows.append(row)
    if problems:
        raise IngestError(path, problems)
    return rows


def write_demands_csv(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DEMANDS_COLUMNS)
        for row in rows:
            writer.writerow(
                [row["step_of_year"]] + [_fmt(row[c]) for c in DEMANDS_COLUMNS[1:]]
            )


def read_demands_csv(path) -> list[dict]:
    problems: list[str] = []
    rows: list[dict] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != DEMANDS_COLUMNS:
            raise IngestError(path, [f"line 1: expected header {','.join(DEMANDS_COLUMNS)}"])
        for line, raw in enumerate(reader, start=2):
            try:
                row = {"step_of_year": int(raw["step_of_year"])}
                for c in DEMANDS_COLUMNS[1:]:
                    row[c] = float(raw[c])
            except (TypeError, ValueError):
                problems.append(f"line {line}: malformed row")
                continue
            for c in ("d3", "d4", "d5", "d6", "d7", "d8"):
                if row[c] < 0:
                    problems.append(f"line {line}: {c} is negative")
            if not row["d1_level"] < row["d2_level"]:
                problems.append(f"line {line}: d1_level must be below d2_level")
            rows.append(row)
    if problems:
        raise IngestError(path, problems)
    if [r["step_of_year"] for r in rows] != list(range(1, len(rows) + 1)):
        raise IngestError(path, ["step_of_year must run 1..T without gaps"])
    return rows


def ingest_series(series_path, demands_path, steps_per_year: int | None = None,
                  spec: SystemSpec | None = None) -> list[StepRecord]:
    """Parse and combine the series and demand files into step records.

    The one-year demand table is tiled cyclically over the series. Row
    problems are collected and raised together with line numbers.
    """
    if steps_per_year is None:
        steps_per_year = spec.steps_per_year if spec is not None else 52
    series_rows = read_series_csv(series_path)
    demand_rows = read_demands_csv(demands_path)
    if len(demand_rows) != steps_per_year:
        raise IngestError(
            demands_path,
            [f"expected {steps_per_year} demand rows, found {len(demand_rows)}"],
        )
    records = []
    for t, row in enumerate(series_rows):
        d = demand_rows[t % steps_per_year]
        records.append(
            StepRecord(
                t=t, q=row["q"], q1=row["q1"], q2=row["q2"], q3=row["q3"],
                d3=d["d3"], d4=d["d4"], d5=d["d5"], d6=d["d6"], d7=d["d7"],
                d8=d["d8"], d1=d["d1_level"], d2=d["d2_level"],
            )
        )
    if spec is not None:
        problems = []
        for t, rec in enumerate(records):
            try:
                rec.check(spec)
            except ValueError as exc:
                problems.append(f"line {t + 2}: {exc}")
        if problems:
            raise IngestError(series_path, problems)
    return records


# -- outcome series ----------------------------------------------------------


def save_outcomes(outcomes: OutcomeSeries, path) -> None:
    Path(path).write_text(
        json.dumps(outcomes.to_dict(), sort_keys=True) + "\n", "utf-8"
    )


def load_outcomes(path) -> OutcomeSeries:
    return OutcomeSeries.from_dict(json.loads(Path(path).read_text("utf-8")))


# -- policy tables -----------------------------------------------------------


def export_policy_csv(rows: list[tuple], path) -> None:
    """Rows are (storage, step, q_class_value, qtr_class_value, next_storage);
    the class columns stay empty for policies without inflow classes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POLICY_COLUMNS)
        for storage, step, q_val, qtr_val, nxt in rows:
            writer.writerow(
                [
                    _fmt(storage),
                    int(step),
                    "" if q_val == "" else _fmt(q_val),
                    "" if qtr_val == "" else _fmt(qtr_val),
                    _fmt(nxt),
                ]
            )


@dataclass
class ImportedPolicy:
    """Policy rebuilt from an exported table.

    Decisions match the row with the nearest storage, then the nearest
    reservoir-inflow class value (then tributary class value) among rows of
    that step. Works for tables with or without inflow-class columns.
    """

    rows_by_step: dict[int, list[tuple]]
    steps: int

    def decide(self, t: int, storage: float, rec: StepRecord):
        rows = self.rows_by_step.get(t % self.steps)
        if not rows:
            return None
        q_tr = max(rec.q3 - rec.q, 0.0)

        def key(row):
            s, q_val, qtr_val, _ = row
            return (
                abs(s - storage),
                abs(q_val - rec.q) if q_val is not None else 0.0,
                abs(qtr_val - q_tr) if qtr_val is not None else 0.0,
            )

        return min(rows, key=key)[3]


def import_policy_csv(path) -> ImportedPolicy:
    rows_by_step: dict[int, list[tuple]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != POLICY_COLUMNS:
            raise IngestError(path, [f"line 1: expected header {','.join(POLICY_COLUMNS)}"])
        for line, raw in enumerate(reader, start=2):
            try:
                step = int(raw["step"]) - 1
                row = (
                    float(raw["storage"]),
                    float(raw["q_class_value"]) if raw["q_class_value"] else None,
                    float(raw["qtr_class_value"]) if raw["qtr_class_value"] else None,
                    float(raw["next_storage"]),
                )
            except (TypeError, ValueError):
                raise IngestError(path, [f"line {line}: malformed row"]) from None
            rows_by_step.setdefault(step, []).append(row)
    if not rows_by_step:
        raise IngestError(path, ["policy table is empty"])
    return ImportedPolicy(rows_by_step=rows_by_step, steps=max(rows_by_step) + 1)


def read_policy_rows(path) -> list[tuple]:
    """Raw rows of an exported policy file (for round-trip checks)."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for raw in reader:
            out.append(
                (
                    float(raw["storage"]),
                    int(raw["step"]),
                    float(raw["q_class_value"]) if raw["q_class_value"] else "",
                    float(raw["qtr_class_value"]) if raw["qtr_class_value"] else "",
                    float(raw["next_storage"]),
                )
            )
    return out


__all__ = [
    "IngestError",
    "ImportedPolicy",
    "SERIES_COLUMNS",
    "DEMANDS_COLUMNS",
    "POLICY_COLUMNS",
    "save_system_spec",
    "load_system_spec",
    "write_series_csv",
    "read_series_csv",
    "write_demands_csv",
    "read_demands_csv",
    "ingest_series",
    "save_outcomes",
    "load_outcomes",
    "export_policy_csv",
    "import_policy_csv",
    "read_policy_rows",
]
