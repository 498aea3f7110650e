"""In-process works-endpoint mock for tests and offline demos.

Serves ``GET /works/doi:{doi}`` from a DOI -> payload dict; per-DOI status
scripts let tests exercise retry behaviour (e.g. two 429s before the 200).
"""

from __future__ import annotations

import json
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class MockGraphServer:
    def __init__(self, knowledge: dict[str, dict], script: dict[str, list[int]] | None = None):
        self.knowledge = dict(knowledge)
        self.script = {doi: list(codes) for doi, codes in (script or {}).items()}
        self.request_log: list[tuple[str, int]] = []
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle ----------------------------------------------------------
    def start(self) -> "MockGraphServer":
        mock = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                status, body = mock._respond(self.path)
                payload = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server:
            self._server.shutdown()
            self._server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self) -> "MockGraphServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def base_url(self) -> str:
        assert self._server is not None, "server not started"
        return f"http://127.0.0.1:{self._server.server_address[1]}"

    def requests_for(self, doi: str) -> int:
        with self._lock:
            return sum(1 for d, _ in self.request_log if d == doi)

    # -- request handling ---------------------------------------------------
    def _respond(self, path: str) -> tuple[int, dict]:
        prefix = "/works/doi:"
        if not path.startswith(prefix):
            return 404, {"error": "unknown route"}
        doi = urllib.parse.unquote(path[len(prefix):])
        with self._lock:
            scripted = self.script.get(doi)
            if scripted:
                status = scripted.pop(0)
                if status != 200:
                    self.request_log.append((doi, status))
                    return status, {"error": f"scripted {status}"}
            if doi in self.knowledge:
                self.request_log.append((doi, 200))
                return 200, self.knowledge[doi]
            self.request_log.append((doi, 404))
            return 404, {"error": "not found"}
