"""Stateless JSON-over-HTTP facade in front of the store.

The wire contract is deliberately rigid:

* every endpoint requires a positive integer ``X-User-Id`` header naming the
  caller (401 when absent or malformed),
* unknown paths are 404, known paths with the wrong method are 405, bodies
  that are not ``application/json`` are 415, bodies that fail to parse or
  validate are 400, authorization denials are 403, unknown ids are 404 and
  storage trouble is 500,
* every successful mutation answers 200 with a ``ServiceResponse`` body,
  serialized with sorted keys and no whitespace so responses are
  byte-stable,
* GET handlers never write, so repeating one returns an identical body.

Authorization: the owner of a result set passes every mode; a user holding
a share grant passes ``read`` and ``annotate``; deleting and sharing always
require ownership. History listings are private to their user.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping
from urllib.parse import parse_qs, unquote

from . import analysis
from .model import (
    ACTION_KINDS,
    NO_GROUP,
    RESULT_SET_FILTERS,
    SEARCH_TYPES,
    AccessDenied,
    Comment,
    DuplicateUrl,
    EmptyQuery,
    HistoryQuery,
    InvalidComment,
    InvalidQuery,
    NotOwner,
    QueryLog,
    RankConflict,
    Resource,
    ResourceActionEntry,
    SearchHistoryEntry,
    SelfShare,
    ShareGrant,
    StorageFailure,
    TrackerError,
    UnknownResource,
    UnknownResultSet,
    ViewingTime,
    normalize_query,
)
from .provider import Corpus
from .store import ANNOTATE, READ, Store

log = logging.getLogger(__name__)

BASE = "searchlog"

UPDATED_MESSAGE = "Database Successfully Updated"
DELETED_MESSAGE = "Successfully removed the required user queries from the database"

REASON_NOT_FOUND = "The requested URI is not found"
REASON_METHOD = "The HTTP method is not allowed for the requested URI"
REASON_AUTH = "The request requires user authentication"
REASON_MEDIA_TYPE = "The request entity has a media type which the service does not support"
REASON_INTERNAL = "The service encountered an unexpected internal condition"


# ---------------------------------------------------------------- wire plumbing


@dataclass(slots=True)
class HttpRequest:
    method: str
    path: str  # raw, percent-encoded, no query string
    headers: Mapping[str, str] = field(default_factory=dict)
    body: bytes = b""
    query_params: Mapping[str, str] = field(default_factory=dict)

    def header(self, name: str) -> str | None:
        lowered = name.lower()
        for key, value in self.headers.items():
            if key.lower() == lowered:
                return value
        return None


@dataclass(slots=True)
class HttpResponse:
    status: int
    body: bytes
    content_type: str = "application/json"
    headers: dict[str, str] = field(default_factory=dict)

    def json(self) -> Any:
        return json.loads(self.body)


def dump_json(payload: Any) -> bytes:
    """Canonical body encoding: sorted keys, no whitespace, UTF-8."""
    return json.dumps(payload, separators=(",", ":"), sort_keys=True,
                      ensure_ascii=False).encode("utf-8")


class _BadRequest(Exception):
    """Request understood structurally but rejected; maps to 400."""


# ---------------------------------------------------------------- body readers


def _expect_object(body: Any) -> dict:
    if not isinstance(body, dict):
        raise _BadRequest("request body must be a JSON object")
    return body


def _expect_array(body: Any) -> list:
    if not isinstance(body, list):
        raise _BadRequest("request body must be a JSON array")
    return body


_MISSING = object()


def _get_int(obj: dict, name: str, *, minimum: int | None = None,
             default: Any = _MISSING) -> int:
    value = obj.get(name, _MISSING)
    if value is _MISSING:
        if default is _MISSING:
            raise _BadRequest(f"missing field {name!r}")
        return default
    # bool is an int subtype but not an acceptable wire integer
    if not isinstance(value, int) or isinstance(value, bool):
        raise _BadRequest(f"field {name!r} must be an integer")
    if minimum is not None and value < minimum:
        raise _BadRequest(f"field {name!r} must be >= {minimum}")
    return value


def _get_str(obj: dict, name: str, *, default: Any = _MISSING) -> str:
    value = obj.get(name, _MISSING)
    if value is _MISSING:
        if default is _MISSING:
            raise _BadRequest(f"missing field {name!r}")
        return default
    if not isinstance(value, str):
        raise _BadRequest(f"field {name!r} must be a string")
    return value


def _get_bool(obj: dict, name: str, *, default: bool = False) -> bool:
    value = obj.get(name, _MISSING)
    if value is _MISSING:
        return default
    if not isinstance(value, bool):
        raise _BadRequest(f"field {name!r} must be a boolean")
    return value


def _resource_item(obj: dict) -> tuple[int, dict]:
    """(result_set_id, store batch item) from one resource wire object."""
    body = _expect_object(obj)
    rsid = _get_int(body, "result_set_id", minimum=1)
    item = {
        "rank": _get_int(body, "rank", minimum=1),
        "url": _get_str(body, "url"),
        "title": _get_str(body, "title", default=""),
        "source": _get_str(body, "source", default=""),
        "media_type": _get_str(body, "media_type"),
        "saved": _get_bool(body, "saved", default=False),
        "saved_group_id": _get_int(body, "saved_group_id", minimum=0,
                                   default=NO_GROUP),
    }
    return rsid, item


def _viewing_item(obj: dict) -> dict:
    body = _expect_object(obj)
    return {
        "result_set_id": _get_int(body, "result_set_id", minimum=1),
        "url": _get_str(body, "url"),
        "opened_at": _get_int(body, "opened_at", minimum=1),
        "duration_ms": _get_int(body, "duration_ms", minimum=0),
    }


# ---------------------------------------------------------------- wire shapes


def _wire_query_log(q: QueryLog) -> dict:
    return {"result_set_id": q.result_set_id, "user_id": q.user_id,
            "group_id": q.group_id, "session_id": q.session_id,
            "query": q.query, "search_type": q.search_type,
            "timestamp": q.timestamp}


def _wire_resource(r: Resource) -> dict:
    return {"result_set_id": r.result_set_id, "rank": r.rank, "url": r.url,
            "title": r.title, "source": r.source, "media_type": r.media_type,
            "saved": r.saved, "saved_group_id": r.saved_group_id}


def _wire_action(a: ResourceActionEntry) -> dict:
    return {"result_set_id": a.result_set_id, "url": a.url,
            "action": a.action, "acting_user_id": a.acting_user_id,
            "timestamp": a.timestamp, "group_id": a.group_id}


def _wire_viewing(v: ViewingTime) -> dict:
    return {"result_set_id": v.result_set_id, "url": v.url,
            "opened_at": v.opened_at, "duration_ms": v.duration_ms}


def _wire_comment(c: Comment) -> dict:
    return {"comment_id": c.comment_id, "result_set_id": c.result_set_id,
            "author_id": c.author_id, "text": c.text,
            "timestamp": c.timestamp}


def _wire_grant(g: ShareGrant) -> dict:
    return {"owner_id": g.owner_id, "grantee_id": g.grantee_id,
            "result_set_id": g.result_set_id, "timestamp": g.timestamp}


def wire_history_entry(e: SearchHistoryEntry) -> dict:
    return {"query_log": _wire_query_log(e.query_log),
            "clicked": [_wire_resource(r) for r in e.clicked],
            "saved": [_wire_resource(r) for r in e.saved],
            "event_timestamps": dict(e.event_timestamps)}


# ---------------------------------------------------------------- routing


@dataclass(frozen=True)
class _Param:
    name: str
    kind: str  # "int" | "str"

    def match(self, segment: str) -> bool:
        if self.kind == "int":
            return segment.isdigit()
        return bool(segment)


def _i(name: str) -> _Param:
    return _Param(name, "int")


def _s(name: str) -> _Param:
    return _Param(name, "str")


@dataclass(frozen=True)
class _Route:
    method: str
    pattern: tuple
    handler: str
    public: bool = False
    body: str = "none"  # none | required | optional


_ROUTES: tuple[_Route, ...] = (
    _Route("GET", ("healthz",), "_get_healthz", public=True),
    _Route("GET", ("search",), "_get_search", public=True),
    _Route("POST", (BASE, "querylog"), "_post_querylog", body="required"),
    _Route("GET", (BASE, "filterqueriesbytime", _i("start"), _i("end")),
           "_get_filterqueriesbytime"),
    _Route("DELETE", (BASE, "deleteuserqueries"), "_delete_deleteuserqueries",
           body="required"),
    _Route("POST", (BASE, "searchcomment"), "_post_searchcomment",
           body="required"),
    _Route("GET", (BASE, "commentsbyresultsetid", _i("rsid")),
           "_get_commentsbyresultsetid"),
    _Route("POST", (BASE, "xmlresultsetlog"), "_post_xmlresultsetlog",
           body="required"),
    _Route("POST", (BASE, "xmlbatchresultsetlog"), "_post_xmlbatchresultsetlog",
           body="required"),
    _Route("GET", (BASE, "resourceurlsbyresultsetid", _i("rsid")),
           "_get_resourceurlsbyresultsetid"),
    _Route("GET", (BASE, "resourcesbyresultsetid", _i("rsid")),
           "_get_resourcesbyresultsetid"),
    _Route("POST", (BASE, "resourcelog"), "_post_resourcelog", body="required"),
    # historical alias kept for wire compatibility with older clients
    _Route("POST", (BASE, "resourceolog"), "_post_resourcelog", body="required"),
    _Route("POST", (BASE, "updateresultset"), "_post_updateresultset",
           body="required"),
    _Route("GET", (BASE, "resourceslogbyresultsetidandaction", _i("rsid"),
                   _s("action")), "_get_resourceslog"),
    _Route("POST", (BASE, "updateviewingtimelog"), "_post_updateviewingtimelog",
           body="required"),
    _Route("POST", (BASE, "updatebatchviewingtimelog"),
           "_post_updatebatchviewingtimelog", body="required"),
    _Route("POST", (BASE, "taglist"), "_post_taglist", body="required"),
    _Route("GET", (BASE, "tagsbyresultsetid", _i("rsid")),
           "_get_tagsbyresultsetid"),
    _Route("GET", (BASE, "searchhistory", _i("userid")), "_get_searchhistory"),
    _Route("GET", (BASE, "searchhistorybydate", _i("userid")),
           "_get_searchhistorybydate"),
    _Route("GET", (BASE, "searchhistorybypages", _i("userid"), _i("offset"),
                   _i("limit")), "_get_searchhistorybypages"),
    _Route("GET", (BASE, "searchhistorybyquery", _s("query")),
           "_get_searchhistorybyquery"),
    _Route("POST", (BASE, "shareresultset", _i("userx"), _i("usery"),
                    _i("rsid")), "_post_shareresultset", body="optional"),
    _Route("GET", (BASE, "sharedresultsetsbyuserid", _i("userid")),
           "_get_sharedresultsetsbyuserid"),
)


def _match(pattern: tuple, segments: list[str]) -> dict[str, Any] | None:
    if len(pattern) != len(segments):
        return None
    params: dict[str, Any] = {}
    for part, segment in zip(pattern, segments):
        if isinstance(part, _Param):
            if not part.match(segment):
                return None
            decoded = unquote(segment)
            params[part.name] = int(decoded) if part.kind == "int" else decoded
        elif part != segment:
            return None
    return params


@dataclass(slots=True)
class _Ctx:
    caller: int | None
    params: dict[str, Any]
    body: Any
    query: Mapping[str, str]


def _now_ms() -> int:
    return int(time.time() * 1000)


# ---------------------------------------------------------------- the service


class SearchLogService:
    """Request dispatcher; holds the store, an optional corpus and a clock."""

    def __init__(self, store: Store, corpus: Corpus | None = None,
                 now_ms: Callable[[], int] = _now_ms):
        self.store = store
        self.corpus = corpus
        self.now_ms = now_ms

    # -------------------------------------------------------- dispatch

    def handle(self, request: HttpRequest) -> HttpResponse:
        try:
            return self._dispatch(request)
        except _BadRequest as exc:
            return self._error(400, str(exc))
        except (InvalidQuery, InvalidComment, RankConflict, DuplicateUrl,
                SelfShare, EmptyQuery) as exc:
            return self._error(400, str(exc))
        except (AccessDenied, NotOwner) as exc:
            return self._error(403, str(exc))
        except (UnknownResultSet, UnknownResource) as exc:
            return self._error(404, str(exc))
        except StorageFailure as exc:
            log.error("storage failure: %s", exc)
            return self._error(500, str(exc))
        except TrackerError as exc:  # any stray domain error is a bad request
            return self._error(400, str(exc))
        except Exception:
            log.exception("unhandled error for %s %s", request.method,
                          request.path)
            return self._error(500, REASON_INTERNAL)

    def _dispatch(self, request: HttpRequest) -> HttpResponse:
        segments = [s for s in request.path.split("/") if s]
        matched_methods: set[str] = set()
        route = None
        params: dict[str, Any] = {}
        for candidate in _ROUTES:
            found = _match(candidate.pattern, segments)
            if found is None:
                continue
            matched_methods.add(candidate.method)
            if candidate.method == request.method.upper() and route is None:
                route, params = candidate, found
        if not matched_methods:
            return self._error(404, REASON_NOT_FOUND)
        if route is None:
            response = self._error(405, REASON_METHOD)
            response.headers["Allow"] = ", ".join(sorted(matched_methods))
            return response

        caller: int | None = None
        if not route.public:
            raw = request.header("X-User-Id")
            if raw is None or not raw.strip().isdigit() or int(raw.strip()) < 1:
                return self._error(401, REASON_AUTH)
            caller = int(raw.strip())

        body: Any = None
        if route.body == "required" or (route.body == "optional" and request.body):
            content_type = (request.header("Content-Type") or "")
            if content_type.split(";")[0].strip().lower() != "application/json":
                return self._error(415, REASON_MEDIA_TYPE)
            if not request.body:
                raise _BadRequest("request body is required")
            try:
                body = json.loads(request.body)
            except ValueError as exc:
                raise _BadRequest(f"request body is not valid JSON: {exc}") from exc

        ctx = _Ctx(caller=caller, params=params, body=body,
                   query=request.query_params)
        handler = getattr(self, route.handler)
        return handler(ctx)

    # -------------------------------------------------------- helpers

    @staticmethod
    def _json(status: int, payload: Any) -> HttpResponse:
        return HttpResponse(status=status, body=dump_json(payload))

    @classmethod
    def _error(cls, code: int, reason: str) -> HttpResponse:
        return cls._json(code, {"code": code, "reason": reason})

    @classmethod
    def _updated(cls, returnid: int) -> HttpResponse:
        return cls._json(200, {"message": UPDATED_MESSAGE, "returnid": returnid})

    def _authorize(self, caller: int, result_set_id: int, mode: str) -> None:
        # raises UnknownResultSet (404) before any ownership judgement
        if not self.store.can_access(caller, result_set_id, mode):
            raise AccessDenied(
                f"user {caller} may not {mode} result set {result_set_id}")

    def _require_self(self, ctx: _Ctx, user_id: int) -> None:
        if user_id != ctx.caller:
            raise AccessDenied("search history is private to its user")

    # -------------------------------------------------------- handlers

    def _get_healthz(self, ctx: _Ctx) -> HttpResponse:
        return self._json(200, {"status": "ok"})

    def _get_search(self, ctx: _Ctx) -> HttpResponse:
        search_type = ctx.query.get("type", "text")
        if search_type not in SEARCH_TYPES:
            raise _BadRequest(f"type must be one of {SEARCH_TYPES}")
        raw_limit = ctx.query.get("limit", "20")
        if not raw_limit.isdigit() or int(raw_limit) < 1:
            raise _BadRequest("limit must be a positive integer")
        query = ctx.query.get("q", "")
        if not normalize_query(query):
            raise _BadRequest("q must be nonempty")
        if self.corpus is None:
            return self._json(200, [])
        results = self.corpus.search(query, search_type, int(raw_limit))
        return self._json(200, [{"url": r.url, "title": r.title,
                                 "source": r.source, "media_type": r.media_type}
                                for r in results])

    def _post_querylog(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        user_id = _get_int(body, "user_id", minimum=1)
        if user_id != ctx.caller:
            raise AccessDenied("query log user_id must match the caller")
        rsid = self.store.put_query(
            user_id=user_id,
            group_id=_get_int(body, "group_id", minimum=0, default=NO_GROUP),
            session_id=_get_str(body, "session_id"),
            query=_get_str(body, "query"),
            search_type=_get_str(body, "search_type"),
            timestamp=_get_int(body, "timestamp", minimum=1),
        )
        return self._updated(rsid)

    def _get_filterqueriesbytime(self, ctx: _Ctx) -> HttpResponse:
        start, end = ctx.params["start"], ctx.params["end"]
        if start > end:
            raise _BadRequest("start must be <= end")
        entries = self.store.fetch_history(
            HistoryQuery.time_range(ctx.caller, start, end))
        return self._json(200, [wire_history_entry(e) for e in entries])

    def _delete_deleteuserqueries(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        ids = body.get("result_set_ids")
        if (not isinstance(ids, list)
                or any(not isinstance(i, int) or isinstance(i, bool)
                       for i in ids)):
            raise _BadRequest("field 'result_set_ids' must be a list of integers")
        self.store.delete_result_sets(ctx.caller, ids)
        return self._json(200, {"message": DELETED_MESSAGE, "returnid": -1})

    def _post_searchcomment(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        rsid = _get_int(body, "result_set_id", minimum=1)
        text = _get_str(body, "text")
        timestamp = _get_int(body, "timestamp", minimum=1)
        self._authorize(ctx.caller, rsid, ANNOTATE)
        comment_id = self.store.put_comment(rsid, ctx.caller, text, timestamp)
        return self._updated(comment_id)

    def _get_commentsbyresultsetid(self, ctx: _Ctx) -> HttpResponse:
        rsid = ctx.params["rsid"]
        self._authorize(ctx.caller, rsid, READ)
        view = self.store.fetch_result_set(rsid)
        return self._json(200, [_wire_comment(c) for c in view.comments])

    def _post_xmlresultsetlog(self, ctx: _Ctx) -> HttpResponse:
        rsid, item = _resource_item(_expect_object(ctx.body))
        self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.put_resource_single(rsid, item)
        return self._updated(-1)

    def _post_xmlbatchresultsetlog(self, ctx: _Ctx) -> HttpResponse:
        raw = _expect_array(ctx.body)
        if not raw:
            raise _BadRequest("resource batch must not be empty")
        parsed = [_resource_item(obj) for obj in raw]
        rsids = {rsid for rsid, _ in parsed}
        if len(rsids) != 1:
            raise _BadRequest("batch must target a single result_set_id")
        rsid = rsids.pop()
        self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.put_resources(rsid, [item for _, item in parsed])
        return self._updated(-1)

    def _get_resourceurlsbyresultsetid(self, ctx: _Ctx) -> HttpResponse:
        rsid = ctx.params["rsid"]
        self._authorize(ctx.caller, rsid, READ)
        return self._json(200, self.store.fetch_resource_urls(rsid))

    def _get_resourcesbyresultsetid(self, ctx: _Ctx) -> HttpResponse:
        rsid = ctx.params["rsid"]
        self._authorize(ctx.caller, rsid, READ)
        view = self.store.fetch_result_set(rsid)
        return self._json(200, [_wire_resource(r) for r in view.resources])

    def _post_resourcelog(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        rsid = _get_int(body, "result_set_id", minimum=1)
        url = _get_str(body, "url")
        action = _get_str(body, "action")
        if action not in ACTION_KINDS:
            raise _BadRequest(f"action must be one of {ACTION_KINDS}")
        timestamp = _get_int(body, "timestamp", minimum=1)
        group_id = _get_int(body, "group_id", minimum=0, default=NO_GROUP)
        self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.put_resource_action(rsid, url, action, ctx.caller,
                                       timestamp, group_id)
        return self._updated(-1)

    def _post_updateresultset(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        rsid = _get_int(body, "result_set_id", minimum=1)
        url = _get_str(body, "url")
        group_id = _get_int(body, "group_id", minimum=0, default=NO_GROUP)
        self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.mark_resource_saved(rsid, url, group_id)
        return self._updated(-1)

    def _get_resourceslog(self, ctx: _Ctx) -> HttpResponse:
        rsid = ctx.params["rsid"]
        action = ctx.params["action"]
        if action not in RESULT_SET_FILTERS:
            raise _BadRequest(f"action must be one of {RESULT_SET_FILTERS}")
        self._authorize(ctx.caller, rsid, READ)
        view = self.store.fetch_result_set(rsid, action)
        return self._json(200, {
            "resources": [_wire_resource(r) for r in view.resources],
            "actions": [_wire_action(a) for a in view.actions],
            "viewing_times": [_wire_viewing(v) for v in view.viewing_times],
            "tags": list(view.tags),
            "comments": [_wire_comment(c) for c in view.comments],
        })

    def _post_updateviewingtimelog(self, ctx: _Ctx) -> HttpResponse:
        entry = _viewing_item(_expect_object(ctx.body))
        self._authorize(ctx.caller, entry["result_set_id"], ANNOTATE)
        self.store.put_viewing_times([entry])
        return self._updated(-1)

    def _post_updatebatchviewingtimelog(self, ctx: _Ctx) -> HttpResponse:
        raw = _expect_array(ctx.body)
        if not raw:
            raise _BadRequest("viewing time batch must not be empty")
        entries = [_viewing_item(obj) for obj in raw]
        for rsid in {e["result_set_id"] for e in entries}:
            self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.put_viewing_times(entries)
        return self._updated(-1)

    def _post_taglist(self, ctx: _Ctx) -> HttpResponse:
        body = _expect_object(ctx.body)
        rsid = _get_int(body, "result_set_id", minimum=1)
        tags = body.get("tags")
        if not isinstance(tags, list) or any(not isinstance(t, str) for t in tags):
            raise _BadRequest("field 'tags' must be a list of strings")
        self._authorize(ctx.caller, rsid, ANNOTATE)
        self.store.put_tags(rsid, tags)
        return self._updated(-1)

    def _get_tagsbyresultsetid(self, ctx: _Ctx) -> HttpResponse:
        rsid = ctx.params["rsid"]
        self._authorize(ctx.caller, rsid, READ)
        return self._json(200, {"result_set_id": rsid,
                                "tags": self.store.fetch_tags(rsid)})

    def _get_searchhistory(self, ctx: _Ctx) -> HttpResponse:
        self._require_self(ctx, ctx.params["userid"])
        entries = self.store.fetch_history(HistoryQuery.all(ctx.params["userid"]))
        return self._json(200, [wire_history_entry(e) for e in entries])

    def _get_searchhistorybydate(self, ctx: _Ctx) -> HttpResponse:
        self._require_self(ctx, ctx.params["userid"])
        groups = self.store.fetch_history(
            HistoryQuery.by_date(ctx.params["userid"]))
        return self._json(200, [
            {"date": day.isoformat(),
             "entries": [wire_history_entry(e) for e in entries]}
            for day, entries in groups])

    def _get_searchhistorybypages(self, ctx: _Ctx) -> HttpResponse:
        self._require_self(ctx, ctx.params["userid"])
        if ctx.params["limit"] < 1:
            raise _BadRequest("limit must be >= 1")
        entries = self.store.fetch_history(HistoryQuery.paged(
            ctx.params["userid"], ctx.params["offset"], ctx.params["limit"]))
        return self._json(200, [wire_history_entry(e) for e in entries])

    def _get_searchhistorybyquery(self, ctx: _Ctx) -> HttpResponse:
        exclude: int | None = None
        raw_exclude = ctx.query.get("exclude")
        if raw_exclude is not None:
            if not raw_exclude.isdigit():
                raise _BadRequest("exclude must be a result set id")
            exclude = int(raw_exclude)
        entries = analysis.similar_queries(self.store, ctx.caller,
                                           ctx.params["query"], exclude)
        return self._json(200, [wire_history_entry(e) for e in entries])

    def _post_shareresultset(self, ctx: _Ctx) -> HttpResponse:
        userx, usery = ctx.params["userx"], ctx.params["usery"]
        rsid = ctx.params["rsid"]
        if userx != ctx.caller:
            raise AccessDenied("only the owner may initiate a share")
        timestamp = self.now_ms()
        if ctx.body is not None:
            timestamp = _get_int(_expect_object(ctx.body), "timestamp",
                                 minimum=1, default=timestamp)
        # ownership (OWN mode) is checked inside put_share via NotOwner
        self.store.put_share(userx, usery, rsid, timestamp)
        return self._updated(-1)

    def _get_sharedresultsetsbyuserid(self, ctx: _Ctx) -> HttpResponse:
        self._require_self(ctx, ctx.params["userid"])
        shared = self.store.fetch_shared_with(ctx.params["userid"])
        return self._json(200, [{"grant": _wire_grant(g),
                                 "entry": wire_history_entry(e)}
                                for g, e in shared])
