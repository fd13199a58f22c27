"""Threaded HTTP hosting for a SearchLogService.

The service itself is a pure request -> response function; this module only
moves bytes. Paths under /searchlog plus /search and /healthz go to the
service. When a UI directory is configured, any other GET serves static
files from it, with index.html as the fallback for client-side routes.
"""

from __future__ import annotations

import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .service import HttpRequest, HttpResponse, SearchLogService, dump_json

log = logging.getLogger(__name__)

_MAX_BODY = 16 * 1024 * 1024  # refuse absurd uploads outright


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "searchtrail"

    def _read_body(self) -> bytes:
        length = self.headers.get("Content-Length")
        if length is None:
            return b""
        size = int(length)
        if size < 0 or size > _MAX_BODY:
            return b""
        return self.rfile.read(size)

    def _service_path(self, path: str) -> bool:
        return (path == "/healthz" or path == "/search"
                or path == "/searchlog" or path.startswith("/searchlog/"))

    def _dispatch(self) -> None:
        parts = urlsplit(self.path)
        path = parts.path
        server: TrackerHTTPServer = self.server  # type: ignore[assignment]
        if (not self._service_path(path) and server.ui_dir is not None
                and self.command == "GET"):
            self._serve_static(server.ui_dir, path)
            return
        query_params = {key: values[0] for key, values
                        in parse_qs(parts.query, keep_blank_values=True).items()}
        request = HttpRequest(
            method=self.command,
            path=path,
            headers={k: v for k, v in self.headers.items()},
            body=self._read_body(),
            query_params=query_params,
        )
        response = server.service.handle(request)
        self._send(response)

    def _serve_static(self, ui_dir: Path, path: str) -> None:
        root = ui_dir.resolve()
        relative = path.lstrip("/") or "index.html"
        candidate = (root / relative).resolve()
        inside = candidate == root or str(candidate).startswith(str(root) + "/")
        if not inside:
            # anything resolving outside the UI root is refused outright
            self._send(HttpResponse(
                status=404,
                body=dump_json({"code": 404,
                                "reason": "The requested URI is not found"})))
            return
        if not candidate.is_file():
            # client-side routes have no extension; give them the app shell
            if "." not in relative.rsplit("/", 1)[-1]:
                candidate = root / "index.html"
            if not candidate.is_file():
                self._send(HttpResponse(
                    status=404,
                    body=dump_json({"code": 404,
                                    "reason": "The requested URI is not found"})))
                return
        content_type = mimetypes.guess_type(str(candidate))[0] or \
            "application/octet-stream"
        self._send(HttpResponse(status=200, body=candidate.read_bytes(),
                                content_type=content_type))

    def _send(self, response: HttpResponse) -> None:
        self.send_response(response.status)
        self.send_header("Content-Type", response.content_type)
        self.send_header("Content-Length", str(len(response.body)))
        for name, value in response.headers.items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(response.body)

    do_GET = _dispatch
    do_POST = _dispatch
    do_DELETE = _dispatch

    def log_message(self, fmt: str, *args: object) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)


class TrackerHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: SearchLogService,
                 ui_dir: Path | None = None):
        self.service = service
        self.ui_dir = ui_dir
        super().__init__(address, _Handler)


def make_server(host: str, port: int, service: SearchLogService,
                ui_dir: str | Path | None = None) -> TrackerHTTPServer:
    """Bind and return the server; the caller drives serve_forever()."""
    return TrackerHTTPServer((host, port), service,
                             Path(ui_dir) if ui_dir else None)


def run_in_thread(server: TrackerHTTPServer) -> threading.Thread:
    """Serve on a daemon thread; handy for tests and embedded use."""
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
