"""Minimal HTTP run service.

JSON over HTTP on the standard library server; one background worker
executes queued runs one at a time by default (queue depth and worker
count configurable). Endpoints:

* ``POST /runs``              submit a run config, returns the run id
* ``GET  /runs``              list runs
* ``GET  /runs/{id}``         status and summary
* ``GET  /runs/{id}/series``  outcome series JSON of a done run
* ``GET  /runs/{id}/policy``  exported policy table (CSV)
* ``POST /runs/{id}/cancel``  cancel a queued run
* ``GET  /pareto?ids=a,b``    dominance flags across done runs
* ``GET  /datasets``          data files available next to the state dir

Responses for a done run are byte-identical across polls (documents are
served from the persisted files). An optional shared token locks every
endpoint behind ``Authorization: Bearer <token>``.
"""

from __future__ import annotations

import json
import queue
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from ..moss import dominance_mask
from .runs import Registry, RunConfig, execute_run


class ServiceState:
    """Registry plus a run queue drained by background workers."""

    def __init__(self, state_dir, data_dir=None, queue_depth: int = 16,
                 workers: int = 1, token: str | None = None):
        self.state_dir = Path(state_dir)
        self.data_dir = Path(data_dir) if data_dir else self.state_dir / "data"
        self.registry = Registry(self.state_dir)
        self.queue: queue.Queue = queue.Queue(maxsize=queue_depth)
        self.token = token
        self.lock = threading.Lock()
        self._stop = threading.Event()
        # workers=0 leaves the queue undrained (useful in tests)
        self._threads = [
            threading.Thread(target=self._worker, daemon=True, name=f"run-worker-{i}")
            for i in range(max(0, workers))
        ]
        for t in self._threads:
            t.start()

    def _worker(self) -> None:
        while not self._stop.is_set():
            try:
                run_id = self.queue.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                with self.lock:
                    record = self.registry.get(run_id)
                    if record is None or record.status != "queued":
                        continue
                execute_run(RunConfig.from_dict(record.config), self.registry, record)
            finally:
                self.queue.task_done()

    def close(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)

    # -- operations ------------------------------------------------------

    def submit(self, payload: dict):
        config = RunConfig.from_dict(payload)
        config = config.resolve_paths(self.data_dir)
        problems = config.validate()
        if problems:
            return None, problems
        with self.lock:
            record = self.registry.new_record(config)
        try:
            self.queue.put_nowait(record.run_id)
        except queue.Full:
            record.status = "failed"
            record.error = "queue full"
            self.registry.upsert(record)
            return None, ["queue full"]
        return record, []

    def cancel(self, run_id: str):
        with self.lock:
            record = self.registry.get(run_id)
            if record is None:
                return None, 404, "unknown run id"
            if record.status != "queued":
                return None, 409, f"run is {record.status}, only queued runs cancel"
            record.status = "failed"
            record.error = "cancelled by user"
            self.registry.upsert(record)
            return record, 200, ""

    def pareto(self, ids: list[str]):
        rows = []
        for run_id in ids:
            record = self.registry.get(run_id)
            if record is None:
                return None, 404, f"unknown run id {run_id}"
            if record.status != "done" or not record.summary:
                return None, 409, f"run {run_id} is not done"
            sums = record.summary.get("objective_sums")
            if sums is None:
                return None, 409, f"run {run_id} has no objective sums"
            rows.append((run_id, sums, record.summary.get("total_cost")))
        mask = dominance_mask(np.array([
            r[1] for r in rows
        ])) if rows else np.zeros(0, dtype=bool)
        return (
            [
                {
                    "run_id": run_id,
                    "objective_sums": sums,
                    "total_cost": total,
                    "dominated": bool(not keep),
                }
                for (run_id, sums, total), keep in zip(rows, mask)
            ],
            200,
            "",
        )

    def datasets(self) -> list[dict]:
        if not self.data_dir.is_dir():
            return []
        out = []
        for p in sorted(self.data_dir.iterdir()):
            if p.suffix in (".csv", ".json") and p.is_file():
                out.append({"name": p.name, "bytes": p.stat().st_size})
        return out


def make_handler(state: ServiceState):
    class Handler(BaseHTTPRequestHandler):
        server_version = "resopt-service/0.1"

        def log_message(self, *args):  # quiet by default
            pass

        # -- plumbing --------------------------------------------------

        def _send(self, code: int, payload, content_type="application/json"):
            if isinstance(payload, (dict, list)):
                body = (json.dumps(payload, sort_keys=True) + "\n").encode()
            elif isinstance(payload, str):
                body = payload.encode()
            else:
                body = payload
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header(
                "Access-Control-Allow-Headers", "Authorization, Content-Type"
            )
            self.end_headers()
            self.wfile.write(body)

        def _error(self, code: int, message, fields=None):
            payload = {"error": message}
            if fields:
                payload["fields"] = fields
            self._send(code, payload)

        def _authorized(self) -> bool:
            if state.token is None:
                return True
            got = self.headers.get("Authorization", "")
            return got == f"Bearer {state.token}"

        def _read_json(self):
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length) if length else b"{}"
            return json.loads(raw.decode("utf-8"))

        def _record_or_404(self, run_id):
            record = state.registry.get(run_id)
            if record is None:
                self._error(404, f"unknown run id {run_id}")
                return None
            return record

        def _serve_artifact(self, record, key, content_type):
            if record.status != "done":
                self._error(409, f"run is {record.status}")
                return
            rel = record.result_paths.get(key)
            path = Path(record.outdir) / rel if rel else None
            if not path or not path.is_file():
                self._error(404, f"no {key} artifact")
                return
            self._send(200, path.read_bytes(), content_type)

        # -- verbs -----------------------------------------------------

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header(
                "Access-Control-Allow-Headers", "Authorization, Content-Type"
            )
            self.end_headers()

        def do_GET(self):
            if not self._authorized():
                return self._error(401, "missing or wrong token")
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if parts == ["runs"]:
                return self._send(
                    200, {"runs": [r.to_dict() for r in state.registry.list()]}
                )
            if len(parts) == 2 and parts[0] == "runs":
                record = self._record_or_404(parts[1])
                if record:
                    self._send(200, record.to_dict())
                return
            if len(parts) == 3 and parts[0] == "runs":
                record = self._record_or_404(parts[1])
                if not record:
                    return
                if parts[2] == "series":
                    return self._serve_artifact(record, "outcomes", "application/json")
                if parts[2] == "policy":
                    return self._serve_artifact(record, "policy", "text/csv")
                return self._error(404, f"unknown artifact {parts[2]}")
            if parts == ["pareto"]:
                ids = parse_qs(url.query).get("ids", [""])[0]
                id_list = [x for x in ids.split(",") if x]
                if not id_list:
                    return self._error(400, "ids query parameter required")
                rows, code, msg = state.pareto(id_list)
                if rows is None:
                    return self._error(code, msg)
                return self._send(200, {"entries": rows})
            if parts == ["datasets"]:
                return self._send(200, {"datasets": state.datasets()})
            return self._error(404, "no such endpoint")

        def do_POST(self):
            if not self._authorized():
                return self._error(401, "missing or wrong token")
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            if parts == ["runs"]:
                try:
                    payload = self._read_json()
                except (ValueError, json.JSONDecodeError) as exc:
                    return self._error(400, f"bad JSON: {exc}")
                try:
                    record, problems = state.submit(payload)
                except ValueError as exc:
                    return self._error(400, str(exc))
                if record is None:
                    return self._error(400, "invalid config", fields=problems)
                return self._send(201, {"run_id": record.run_id})
            if len(parts) == 3 and parts[0] == "runs" and parts[2] == "cancel":
                record, code, msg = state.cancel(parts[1])
                if record is None:
                    return self._error(code, msg)
                return self._send(200, record.to_dict())
            return self._error(404, "no such endpoint")

    return Handler


def make_server(state: ServiceState, host: str = "127.0.0.1", port: int = 0):
    return ThreadingHTTPServer((host, port), make_handler(state))


def serve(state_dir, host: str = "127.0.0.1", port: int = 8080, data_dir=None,
          queue_depth: int = 16, workers: int = 1, token: str | None = None):
    """Run the service until interrupted."""
    state = ServiceState(state_dir, data_dir, queue_depth, workers, token)
    server = make_server(state, host, port)
    try:
        print(f"serving on http://{host}:{server.server_address[1]} "
              f"(state: {state.state_dir}, data: {state.data_dir})")
        server.serve_forever()
    finally:
        state.close()
        server.server_close()


__all__ = ["ServiceState", "make_server", "make_handler", "serve"]
