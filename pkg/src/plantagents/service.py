"""HTTP service exposing the simulated plant.

Routes mirror the service URLs in the catalog:

    POST /{module_id}/functionalities/{name}   body {"params": {...}}
    POST /{module_id}/functionality/{name}     accepted alias, same behavior
    POST /{module_id}/skills/{code}            body {"workpiece_id": ..., "detail": ...}
    GET  /{module_id}/state
    GET  /plant/state

Successful calls answer 200 {"status": "ok", "state_version": N}; violated
preconditions answer 409 {"status": "fault", "reason": "..."}.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .catalog import CatalogError
from .plant import PlantFault, PlantSim

DEFAULT_PORT = 5010

_FUNCTIONALITY_RE = re.compile(r"^/([^/]+)/functionalit(?:ies|y)/([^/]+)$")
_SKILL_RE = re.compile(r"^/([^/]+)/skills/([^/]+)$")
_MODULE_STATE_RE = re.compile(r"^/([^/]+)/state$")


class _PlantHandler(BaseHTTPRequestHandler):
    server: "PlantService"

    # -- plumbing ----------------------------------------------------------

    def _reply(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        if not length:
            return {}
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError:
            return {"_malformed": True}
        return payload if isinstance(payload, dict) else {"_malformed": True}

    def log_message(self, format: str, *args) -> None:
        pass  # diagnostics go through the state endpoints, not stderr noise

    # -- routes ------------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (stdlib handler naming)
        sim = self.server.sim
        if self.path == "/plant/state":
            self._reply(200, sim.snapshot())
            return
        match = _MODULE_STATE_RE.match(self.path)
        if match:
            module_id = match.group(1)
            try:
                self._reply(200, sim.module_snapshot(module_id))
            except CatalogError as exc:
                self._reply(404, {"status": "error", "reason": str(exc)})
            return
        self._reply(404, {"status": "error", "reason": f"no route {self.path}"})

    def do_POST(self) -> None:  # noqa: N802
        sim = self.server.sim
        body = self._read_body()
        if body.get("_malformed"):
            self._reply(400, {"status": "error", "reason": "request body is not a JSON object"})
            return

        match = _FUNCTIONALITY_RE.match(self.path)
        if match:
            module_id, name = match.groups()
            self._call_functionality(sim, module_id, name, body)
            return
        match = _SKILL_RE.match(self.path)
        if match:
            module_id, code = match.groups()
            self._call_skill(sim, module_id, code, body)
            return
        self._reply(404, {"status": "error", "reason": f"no route {self.path}"})

    def _call_functionality(self, sim: PlantSim, module_id: str, name: str, body: dict) -> None:
        if not sim.registry.has_module(module_id):
            self._reply(404, {"status": "error", "reason": f"unknown module {module_id!r}"})
            return
        try:
            sim.registry.functionality(module_id, name)
        except CatalogError as exc:
            self._reply(409, {"status": "fault", "reason": str(exc)})
            return
        params = body.get("params") or {}
        try:
            version = sim.apply_functionality(name, params)
        except PlantFault as exc:
            self._reply(409, {"status": "fault", "reason": exc.reason})
            return
        self._reply(200, {"status": "ok", "state_version": version})

    def _call_skill(self, sim: PlantSim, module_id: str, code: str, body: dict) -> None:
        if not sim.registry.has_module(module_id):
            self._reply(404, {"status": "error", "reason": f"unknown module {module_id!r}"})
            return
        if not sim.registry.has_skill(code) or sim.registry.skill_host(code).id != module_id:
            self._reply(409, {"status": "fault", "reason": f"module {module_id} offers no skill {code}"})
            return
        workpiece_id = body.get("workpiece_id")
        if not workpiece_id:
            try:
                workpiece_id = sim.sole_workpiece().id
            except PlantFault as exc:
                self._reply(409, {"status": "fault", "reason": exc.reason})
                return
        try:
            version = sim.apply_skill(code, workpiece_id, detail=body.get("detail"))
        except PlantFault as exc:
            self._reply(409, {"status": "fault", "reason": exc.reason})
            return
        self._reply(200, {"status": "ok", "state_version": version})


class PlantService(ThreadingHTTPServer):
    """Threaded HTTP server around one PlantSim instance."""

    daemon_threads = True

    def __init__(self, sim: PlantSim, host: str = "127.0.0.1", port: int = DEFAULT_PORT) -> None:
        super().__init__((host, port), _PlantHandler)
        self.sim = sim
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "PlantService":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "PlantService":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def serve_plant(sim: PlantSim, host: str = "127.0.0.1", port: int = 0) -> PlantService:
    """Start a plant service on a background thread; port 0 picks a free one."""
    return PlantService(sim, host=host, port=port).start()
