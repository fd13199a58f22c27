"""Client-side session recorder that batches interaction events.

Displayed results, clicks/saves and viewing durations accumulate in local
buffers and are pushed to the service in one go when any of three triggers
fires: the query changes, ten minutes pass without activity, or the session
ends. Query logs, tag edits and comments are posted immediately.

Tags carry forward: the tag set of search k, as last edited, becomes the
initial tag set of search k+1 within the same session, and is dropped when
the session ends.

The transport is pluggable so tests can drive the recorder against an
in-process service with a fake clock; no wall-clock reads are needed
anywhere when both the clock and transport are injected.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol

import requests

from .model import (
    NO_GROUP,
    InvalidComment,
    InvalidQuery,
    TrackerError,
    normalize_query,
    normalize_url,
)
from .service import BASE, HttpRequest, SearchLogService, dump_json

FLUSH_TIMEOUT_MS = 600_000  # ten minutes of inactivity

QUERY_CHANGE = "query_change"
TIMEOUT = "timeout"
SESSION_END = "session_end"
EXPLICIT = "explicit"


class NoOpenSearch(TrackerError):
    """Operation needs a current search and none is open."""


class UnknownUrl(TrackerError):
    """Url was never displayed for the current search."""


class ViewAlreadyOpen(TrackerError):
    pass


class ViewNotOpen(TrackerError):
    pass


class TrackerRequestError(TrackerError):
    """Service answered non-200; mirrors the legacy client's failure mode."""

    def __init__(self, status: int, reason: str = ""):
        super().__init__(f"Failed : HTTP error code : {status}"
                         + (f" ({reason})" if reason else ""))
        self.status = status
        self.reason = reason


@dataclass(slots=True)
class FlushReport:
    trigger: str
    resources_sent: int = 0
    actions_sent: int = 0
    viewings_sent: int = 0


class Transport(Protocol):
    """Minimal wire abstraction: one JSON request, one parsed response."""

    def request(self, method: str, path: str, headers: dict[str, str],
                json_body: Any | None = None) -> tuple[int, Any]:
        ...


class HttpTransport:
    """Real HTTP transport for production use."""

    def __init__(self, base_url: str, session: requests.Session | None = None,
                 timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.session = session or requests.Session()
        self.timeout_s = timeout_s

    def request(self, method: str, path: str, headers: dict[str, str],
                json_body: Any | None = None) -> tuple[int, Any]:
        response = self.session.request(
            method, self.base_url + path, headers=headers,
            json=json_body, timeout=self.timeout_s)
        try:
            payload = response.json()
        except ValueError:
            payload = None
        return response.status_code, payload


class InProcessTransport:
    """Calls a SearchLogService directly; used by tests and the simulator."""

    def __init__(self, service: SearchLogService):
        self.service = service

    def request(self, method: str, path: str, headers: dict[str, str],
                json_body: Any | None = None) -> tuple[int, Any]:
        body = b""
        all_headers = dict(headers)
        if json_body is not None:
            body = dump_json(json_body)
            all_headers["Content-Type"] = "application/json"
        response = self.service.handle(HttpRequest(
            method=method, path=path, headers=all_headers, body=body))
        return response.status, response.json()


def _wall_clock_ms() -> int:
    return int(time.time() * 1000)


@dataclass(slots=True)
class _BufferedResource:
    rank: int
    url: str
    title: str
    source: str
    media_type: str
    saved: bool = False
    saved_group_id: int = NO_GROUP


@dataclass(slots=True)
class _BufferedAction:
    url: str
    action: str
    timestamp: int
    group_id: int = NO_GROUP


class SessionRecorder:
    """Per-session capture of searches and interactions with batching."""

    def __init__(self, transport: Transport, user_id: int, session_id: str,
                 flush_timeout_ms: int = FLUSH_TIMEOUT_MS,
                 clock: Callable[[], int] = _wall_clock_ms):
        if user_id < 1:
            raise ValueError("user_id must be a positive integer")
        if not session_id:
            raise ValueError("session_id must be nonempty")
        self.transport = transport
        self.user_id = user_id
        self.session_id = session_id
        self.flush_timeout_ms = flush_timeout_ms
        self.clock = clock

        self.current_result_set_id: int | None = None
        self.carried_tags: list[str] = []
        self._resources: list[_BufferedResource] = []
        self._buffered_keys: set[str] = set()   # normalized urls in buffer
        self._flushed_keys: set[str] = set()    # normalized urls already sent
        self._next_rank = 1
        self._actions: list[_BufferedAction] = []
        self._viewings: list[dict] = []          # ready-to-send entries
        self._open_views: dict[str, int] = {}    # normalized url -> opened_at
        self._open_view_urls: dict[str, str] = {}  # normalized -> as displayed
        self._last_activity = 0

    # ------------------------------------------------------------ transport

    def _post(self, path: str, payload: Any) -> Any:
        status, body = self.transport.request(
            "POST", path, {"X-User-Id": str(self.user_id)}, payload)
        if status != 200:
            reason = ""
            if isinstance(body, dict):
                reason = str(body.get("reason", ""))
            raise TrackerRequestError(status, reason)
        return body

    # ------------------------------------------------------------ searches

    def begin_search(self, query: str, search_type: str = "text",
                     group_id: int = NO_GROUP, at: int | None = None) -> int:
        """Flush any open search, log the new query, seed carried tags.

        Returns the fresh result set id. Raises InvalidQuery locally for a
        blank query without touching the wire.
        """
        if not normalize_query(query):
            raise InvalidQuery("query must be nonempty after trimming")
        at = self.clock() if at is None else at
        if self.current_result_set_id is not None:
            self.flush(QUERY_CHANGE, at=at)
        body = self._post(f"/{BASE}/querylog", {
            "user_id": self.user_id, "group_id": group_id,
            "session_id": self.session_id, "query": query,
            "search_type": search_type, "timestamp": at})
        rsid = int(body["returnid"])
        self.current_result_set_id = rsid
        self._resources.clear()
        self._buffered_keys.clear()
        self._flushed_keys.clear()
        self._next_rank = 1
        self._actions.clear()
        self._viewings.clear()
        self._open_views.clear()
        self._open_view_urls.clear()
        # carry-forward: the previous search's tag set seeds the new one
        self._post(f"/{BASE}/taglist", {"result_set_id": rsid,
                                        "tags": list(self.carried_tags)})
        self._last_activity = at
        return rsid

    def _require_open(self) -> int:
        if self.current_result_set_id is None:
            raise NoOpenSearch("no search is open in this session")
        return self.current_result_set_id

    # ------------------------------------------------------------ recording

    def record_displayed(self, results: Iterable, at: int | None = None) -> int:
        """Buffer displayed results; returns how many were actually added.

        Accepts (url, title, source, media_type) tuples or objects with
        those attributes. Ranks continue from the end of the buffer.
        Duplicates by normalized url (including already flushed ones) are
        ignored, first occurrence wins.
        """
        self._require_open()
        at = self.clock() if at is None else at
        added = 0
        for result in results:
            url, title, source, media_type = _coerce_result(result)
            key = normalize_url(url)
            if key in self._buffered_keys or key in self._flushed_keys:
                continue
            self._resources.append(_BufferedResource(
                rank=self._next_rank, url=url.strip(), title=title,
                source=source, media_type=media_type))
            self._buffered_keys.add(key)
            self._next_rank += 1
            added += 1
        self._last_activity = at
        return added

    def _require_known_url(self, url: str) -> str:
        key = normalize_url(url)
        if key not in self._buffered_keys and key not in self._flushed_keys:
            raise UnknownUrl(f"url was never displayed this search: {url}")
        return key

    def record_click(self, url: str, at: int | None = None) -> None:
        self._require_open()
        at = self.clock() if at is None else at
        self._require_known_url(url)
        self._actions.append(_BufferedAction(url=url.strip(), action="clicked",
                                             timestamp=at))
        self._last_activity = at

    def record_save(self, url: str, group_id: int = NO_GROUP,
                    at: int | None = None) -> None:
        """Buffer a save; a still-buffered resource is marked saved in place."""
        self._require_open()
        at = self.clock() if at is None else at
        key = self._require_known_url(url)
        for resource in self._resources:
            if normalize_url(resource.url) == key:
                resource.saved = True
                resource.saved_group_id = group_id
                break
        self._actions.append(_BufferedAction(url=url.strip(), action="saved",
                                             timestamp=at, group_id=group_id))
        self._last_activity = at

    def open_view(self, url: str, at: int | None = None) -> None:
        self._require_open()
        at = self.clock() if at is None else at
        key = self._require_known_url(url)
        if key in self._open_views:
            raise ViewAlreadyOpen(f"view already open for {url}")
        self._open_views[key] = at
        self._open_view_urls[key] = url.strip()
        self._last_activity = at

    def close_view(self, url: str, at: int | None = None) -> None:
        self._require_open()
        at = self.clock() if at is None else at
        key = normalize_url(url)
        if key not in self._open_views:
            raise ViewNotOpen(f"no open view for {url}")
        opened = self._open_views.pop(key)
        self._open_view_urls.pop(key)
        self._viewings.append({"url": url.strip(), "opened_at": opened,
                               "duration_ms": max(0, at - opened)})
        self._last_activity = at

    # ------------------------------------------------------------ immediate posts

    def set_tags(self, tags: list[str], at: int | None = None) -> None:
        """Replace the current search's tag set and the carried set."""
        rsid = self._require_open()
        at = self.clock() if at is None else at
        self._post(f"/{BASE}/taglist", {"result_set_id": rsid,
                                        "tags": list(tags)})
        self.carried_tags = list(tags)
        self._last_activity = at

    def add_comment(self, text: str, at: int | None = None) -> int:
        """Post a comment immediately; returns its id."""
        rsid = self._require_open()
        if not text.strip():
            raise InvalidComment("comment text must be nonempty after trimming")
        at = self.clock() if at is None else at
        body = self._post(f"/{BASE}/searchcomment", {
            "result_set_id": rsid, "text": text, "timestamp": at})
        self._last_activity = at
        return int(body["returnid"])

    # ------------------------------------------------------------ flushing

    def flush(self, trigger: str = EXPLICIT, at: int | None = None) -> FlushReport:
        """Send buffers in order: resources, then actions, then viewings.

        Views still open are auto-closed with the flush instant as their end.
        Buffers are cleared only for what was actually acknowledged, so a
        transport failure leaves the rest intact for a retry.
        """
        report = FlushReport(trigger=trigger)
        if self.current_result_set_id is None:
            return report
        rsid = self.current_result_set_id
        at = self.clock() if at is None else at

        # auto-close open views before sending so they join this batch
        for key, opened in list(self._open_views.items()):
            self._viewings.append({"url": self._open_view_urls[key],
                                   "opened_at": opened,
                                   "duration_ms": max(0, at - opened)})
        self._open_views.clear()
        self._open_view_urls.clear()

        if self._resources:
            batch = [{"result_set_id": rsid, "rank": r.rank, "url": r.url,
                      "title": r.title, "source": r.source,
                      "media_type": r.media_type, "saved": r.saved,
                      "saved_group_id": r.saved_group_id}
                     for r in self._resources]
            self._post(f"/{BASE}/xmlbatchresultsetlog", batch)
            report.resources_sent = len(batch)
            self._flushed_keys.update(self._buffered_keys)
            self._buffered_keys.clear()
            self._resources.clear()

        while self._actions:
            action = self._actions[0]
            self._post(f"/{BASE}/resourcelog", {
                "result_set_id": rsid, "url": action.url,
                "action": action.action, "timestamp": action.timestamp,
                "group_id": action.group_id})
            if action.action == "saved":
                self._post(f"/{BASE}/updateresultset", {
                    "result_set_id": rsid, "url": action.url,
                    "group_id": action.group_id})
            self._actions.pop(0)
            report.actions_sent += 1

        if self._viewings:
            batch = [{"result_set_id": rsid, **entry}
                     for entry in self._viewings]
            self._post(f"/{BASE}/updatebatchviewingtimelog", batch)
            report.viewings_sent = len(batch)
            self._viewings.clear()

        self._last_activity = at
        return report

    def tick(self, now: int) -> FlushReport | None:
        """Fire the inactivity flush when the timeout has fully elapsed."""
        if (self.current_result_set_id is not None
                and now - self._last_activity >= self.flush_timeout_ms):
            return self.flush(TIMEOUT, at=now)
        return None

    def end_session(self, at: int | None = None) -> FlushReport:
        """Final flush; carried tags and the open search are dropped."""
        at = self.clock() if at is None else at
        report = self.flush(SESSION_END, at=at)
        self.current_result_set_id = None
        self.carried_tags = []
        self._flushed_keys.clear()
        self._buffered_keys.clear()
        self._next_rank = 1
        return report


def _coerce_result(result) -> tuple[str, str, str, str]:
    if isinstance(result, (tuple, list)):
        url, title, source, media_type = result
        return str(url), str(title), str(source), str(media_type)
    return (str(result.url), str(result.title), str(result.source),
            str(result.media_type))
