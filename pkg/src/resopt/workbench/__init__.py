"""Everything around the solvers: file formats, run execution and registry,
the HTTP service and the command line."""

from .io import (
    IngestError,
    ImportedPolicy,
    export_policy_csv,
    import_policy_csv,
    ingest_series,
    load_outcomes,
    load_system_spec,
    read_demands_csv,
    read_series_csv,
    save_outcomes,
    save_system_spec,
    write_demands_csv,
    write_series_csv,
)
from .runs import Registry, RunConfig, RunRecord, execute_run

__all__ = [
    "IngestError",
    "ImportedPolicy",
    "export_policy_csv",
    "import_policy_csv",
    "ingest_series",
    "load_outcomes",
    "load_system_spec",
    "read_demands_csv",
    "read_series_csv",
    "save_outcomes",
    "save_system_spec",
    "write_demands_csv",
    "write_series_csv",
    "Registry",
    "RunConfig",
    "RunRecord",
    "execute_run",
]
