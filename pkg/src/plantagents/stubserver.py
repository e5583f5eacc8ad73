"""In-process stand-in for an OpenAI-compatible completions endpoint.

Serves canned completions for tests and demos: answer normally, answer
with an HTTP error, or stall past the client timeout.  The received
request payloads are kept for conformance checks.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

MODES = ("ok", "error", "stall")


class _StubHandler(BaseHTTPRequestHandler):
    server: "StubCompletionsServer"

    def do_POST(self) -> None:  # noqa: N802 (stdlib handler naming)
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b""
        try:
            payload = json.loads(raw.decode("utf-8")) if raw else {}
        except json.JSONDecodeError:
            payload = {"_unparseable": raw.decode("utf-8", "replace")}
        with self.server.lock:
            self.server.requests.append(
                {"path": self.path, "headers": dict(self.headers), "payload": payload}
            )

        mode = self.server.mode
        if mode == "stall":
            time.sleep(self.server.stall_seconds)
            mode = "ok"
        if mode == "error":
            body = json.dumps({"error": {"message": "stub failure"}}).encode("utf-8")
            self.send_response(self.server.error_status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        body = json.dumps(
            {
                "id": "stub-completion",
                "object": "text_completion",
                "model": payload.get("model", "stub"),
                "choices": [{"index": 0, "text": self.server.completion_text}],
            }
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format: str, *args) -> None:
        pass  # keep test output quiet


class StubCompletionsServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(
        self,
        completion_text: str = "",
        mode: str = "ok",
        stall_seconds: float = 5.0,
        error_status: int = 500,
        host: str = "127.0.0.1",
        port: int = 0,
    ) -> None:
        if mode not in MODES:
            raise ValueError(f"unknown stub mode {mode!r}")
        super().__init__((host, port), _StubHandler)
        self.completion_text = completion_text
        self.mode = mode
        self.stall_seconds = stall_seconds
        self.error_status = error_status
        self.requests: list[dict] = []
        self.lock = threading.Lock()
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/v1/completions"

    def start(self) -> "StubCompletionsServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "StubCompletionsServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
