"""Embedded durable store backed by a single append-only JSON-lines log.

Every acknowledged mutation is one line in ``events.jsonl`` under the root
directory, flushed (and fsynced unless disabled) before the call returns.
Opening a store replays the log to rebuild state, so close + reopen yields
identical reads. Deletes are themselves log records: assigned ids survive in
the log and the id counters never move backwards, even across deletions.

A single lock serializes writers; readers take the same lock and therefore
only ever observe fully committed state.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .model import (
    ACTION_KINDS,
    MEDIA_TYPES,
    NO_GROUP,
    SEARCH_TYPES,
    Comment,
    DuplicateUrl,
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
    UnknownResource,
    UnknownResultSet,
    ViewingTime,
    local_date_of,
    normalize_query,
    normalize_tags,
    normalize_url,
)

log = logging.getLogger(__name__)

_LOG_NAME = "events.jsonl"

# access modes understood by can_access
READ = "read"
ANNOTATE = "annotate"
OWN = "own"


@dataclass(slots=True)
class ResultSetView:
    """Everything recorded against one result set, resources pre-filtered."""

    resources: list[Resource]
    actions: list[ResourceActionEntry]
    viewing_times: list[ViewingTime]
    tags: list[str]
    comments: list[Comment]


def _now_ms() -> int:
    return int(time.time() * 1000)


class Store:
    """Single-node store for query logs and everything hanging off them."""

    def __init__(self, root: str | Path, *, fsync: bool = True):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._path = self.root / _LOG_NAME
        self._fsync = fsync
        self._lock = threading.RLock()

        self._queries: dict[int, QueryLog] = {}
        self._resources: dict[int, list[Resource]] = {}
        self._url_index: dict[int, dict[str, int]] = {}  # rsid -> url key -> list index
        self._actions: dict[int, list[ResourceActionEntry]] = {}
        self._viewings: dict[int, list[ViewingTime]] = {}
        self._tags: dict[int, list[str]] = {}
        self._comments: dict[int, list[Comment]] = {}
        self._shares: dict[tuple[int, int, int], ShareGrant] = {}
        self._user_result_sets: dict[int, list[int]] = {}
        self._next_result_set_id = 1
        self._next_comment_id = 1

        self._replay()
        try:
            self._fh = open(self._path, "ab")
        except OSError as exc:
            raise StorageFailure(f"cannot open log for append: {exc}") from exc

    # ------------------------------------------------------------- lifecycle

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None  # type: ignore[assignment]

    def __enter__(self) -> Store:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    # ------------------------------------------------------------- log plumbing

    def _replay(self) -> None:
        """Rebuild state from the log, discarding a torn trailing write."""
        if not self._path.exists():
            return
        data = self._path.read_bytes()
        good_end = 0
        while True:
            newline = data.find(b"\n", good_end)
            if newline == -1:
                break  # no terminated line left; anything remaining is torn
            line = data[good_end:newline]
            try:
                record = json.loads(line)
            except ValueError:
                break  # corrupt from here on; keep the clean prefix
            self._apply(record)
            good_end = newline + 1
        if good_end != len(data):
            log.warning("truncating %d bytes of torn log tail in %s",
                        len(data) - good_end, self._path)
            with open(self._path, "r+b") as fh:
                fh.truncate(good_end)

    def _append(self, record: dict) -> None:
        """Durably append one record; state must be mutated only afterwards."""
        line = json.dumps(record, separators=(",", ":"), sort_keys=True)
        try:
            self._fh.write(line.encode("utf-8") + b"\n")
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
        except (OSError, ValueError, AttributeError) as exc:
            raise StorageFailure(f"append failed: {exc}") from exc

    # ------------------------------------------------------------- replay/apply
    # _apply functions trust the record: validation happened before append.

    def _apply(self, record: dict) -> None:
        kind = record["op"]
        if kind == "query":
            q = QueryLog(
                result_set_id=record["result_set_id"],
                user_id=record["user_id"],
                group_id=record["group_id"],
                session_id=record["session_id"],
                query=record["query"],
                search_type=record["search_type"],
                timestamp=record["timestamp"],
            )
            rsid = q.result_set_id
            self._queries[rsid] = q
            self._resources[rsid] = []
            self._url_index[rsid] = {}
            self._actions[rsid] = []
            self._viewings[rsid] = []
            self._tags[rsid] = []
            self._comments[rsid] = []
            self._user_result_sets.setdefault(q.user_id, []).append(rsid)
            self._next_result_set_id = max(self._next_result_set_id, rsid + 1)
        elif kind == "resources":
            rsid = record["result_set_id"]
            for item in record["batch"]:
                resource = Resource(result_set_id=rsid, **item)
                self._url_index[rsid][normalize_url(resource.url)] = \
                    len(self._resources[rsid])
                self._resources[rsid].append(resource)
        elif kind == "action":
            entry = ResourceActionEntry(
                result_set_id=record["result_set_id"],
                url=record["url"],
                action=record["action"],
                acting_user_id=record["acting_user_id"],
                timestamp=record["timestamp"],
                group_id=record["group_id"],
            )
            self._actions[entry.result_set_id].append(entry)
        elif kind == "save":
            rsid = record["result_set_id"]
            index = self._url_index[rsid][normalize_url(record["url"])]
            self._resources[rsid][index].saved = True
            self._resources[rsid][index].saved_group_id = record["group_id"]
        elif kind == "viewings":
            for item in record["batch"]:
                vt = ViewingTime(**item)
                self._viewings[vt.result_set_id].append(vt)
        elif kind == "tags":
            self._tags[record["result_set_id"]] = list(record["tags"])
        elif kind == "comment":
            comment = Comment(
                comment_id=record["comment_id"],
                result_set_id=record["result_set_id"],
                author_id=record["author_id"],
                text=record["text"],
                timestamp=record["timestamp"],
            )
            self._comments[comment.result_set_id].append(comment)
            self._next_comment_id = max(self._next_comment_id,
                                        comment.comment_id + 1)
        elif kind == "share":
            grant = ShareGrant(
                owner_id=record["owner_id"],
                grantee_id=record["grantee_id"],
                result_set_id=record["result_set_id"],
                timestamp=record["timestamp"],
            )
            key = (grant.owner_id, grant.grantee_id, grant.result_set_id)
            self._shares[key] = grant
        elif kind == "delete":
            for rsid in record["result_set_ids"]:
                self._drop_result_set(rsid)
        else:  # unknown op in the log means a newer writer produced it
            raise StorageFailure(f"unknown log record op {kind!r}")

    def _drop_result_set(self, rsid: int) -> None:
        query = self._queries.pop(rsid, None)
        if query is None:
            return
        self._resources.pop(rsid, None)
        self._url_index.pop(rsid, None)
        self._actions.pop(rsid, None)
        self._viewings.pop(rsid, None)
        self._tags.pop(rsid, None)
        self._comments.pop(rsid, None)
        self._user_result_sets[query.user_id].remove(rsid)
        for key in [k for k in self._shares if k[2] == rsid]:
            del self._shares[key]

    # ------------------------------------------------------------- writes

    def put_query(self, user_id: int, group_id: int, session_id: str,
                  query: str, search_type: str, timestamp: int) -> int:
        """Record one search and return its fresh result set id."""
        if not isinstance(query, str) or not query.strip():
            raise InvalidQuery("query must be nonempty after trimming")
        if not isinstance(user_id, int) or user_id < 1:
            raise InvalidQuery("user_id must be a positive integer")
        if not isinstance(group_id, int) or group_id < 0:
            raise InvalidQuery("group_id must be >= 0")
        if not isinstance(session_id, str) or not session_id:
            raise InvalidQuery("session_id must be nonempty")
        if search_type not in SEARCH_TYPES:
            raise InvalidQuery(f"search_type must be one of {SEARCH_TYPES}")
        if not isinstance(timestamp, int) or timestamp <= 0:
            raise InvalidQuery("timestamp must be positive epoch milliseconds")
        with self._lock:
            rsid = self._next_result_set_id
            self._write({"op": "query", "result_set_id": rsid,
                         "user_id": user_id, "group_id": group_id,
                         "session_id": session_id, "query": query,
                         "search_type": search_type, "timestamp": timestamp})
            return rsid

    def put_resources(self, result_set_id: int,
                      batch: list[dict]) -> int:
        """Append a batch of displayed resources; all-or-nothing.

        Each batch item carries rank/url/title/source/media_type and may
        carry saved/saved_group_id. Ranks must be unique and contiguous
        starting at (current max rank) + 1; urls must be new for the set.
        """
        with self._lock:
            self._require_result_set(result_set_id)
            existing = self._resources[result_set_id]
            next_rank = (existing[-1].rank + 1) if existing else 1
            seen_urls = set(self._url_index[result_set_id])
            cleaned = sorted((self._clean_resource_item(item) for item in batch),
                             key=lambda r: r["rank"])
            clean_batch: list[dict] = []
            expected = next_rank
            for clean in cleaned:
                if clean["rank"] != expected:
                    raise RankConflict(
                        f"rank {clean['rank']} breaks contiguity, "
                        f"expected {expected}")
                expected += 1
                key = normalize_url(clean["url"])
                if key in seen_urls:
                    raise DuplicateUrl(f"url already in result set: {clean['url']}")
                seen_urls.add(key)
                clean_batch.append(clean)
            if not clean_batch:
                return 0
            self._write({"op": "resources", "result_set_id": result_set_id,
                         "batch": clean_batch})
            return len(clean_batch)

    def put_resource_single(self, result_set_id: int, item: dict) -> int:
        """Single-resource convenience wrapper over put_resources."""
        return self.put_resources(result_set_id, [item])

    @staticmethod
    def _clean_resource_item(item: dict) -> dict:
        url = str(item.get("url", "")).strip()
        if not url:
            raise InvalidQuery("resource url must be nonempty")
        rank = item.get("rank")
        if not isinstance(rank, int) or rank < 1:
            raise RankConflict("rank must be a positive integer")
        media_type = item.get("media_type")
        if media_type not in MEDIA_TYPES:
            raise InvalidQuery(f"media_type must be one of {MEDIA_TYPES}")
        saved = bool(item.get("saved", False))
        group = item.get("saved_group_id", NO_GROUP)
        if not isinstance(group, int) or group < 0:
            raise InvalidQuery("saved_group_id must be >= 0")
        if not saved:
            group = NO_GROUP  # saved_group_id is meaningful only when saved
        return {"rank": rank, "url": url,
                "title": str(item.get("title", "")),
                "source": str(item.get("source", "")),
                "media_type": media_type,
                "saved": saved, "saved_group_id": group}

    def put_resource_action(self, result_set_id: int, url: str, action: str,
                            acting_user_id: int, timestamp: int,
                            group_id: int = NO_GROUP) -> None:
        """Append one click/save event. Repeated events are all retained."""
        if action not in ACTION_KINDS:
            raise InvalidQuery(f"action must be one of {ACTION_KINDS}")
        if not isinstance(timestamp, int) or timestamp <= 0:
            raise InvalidQuery("timestamp must be positive epoch milliseconds")
        if not isinstance(group_id, int) or group_id < 0:
            raise InvalidQuery("group_id must be >= 0")
        with self._lock:
            self._require_resource(result_set_id, url)
            self._write({"op": "action", "result_set_id": result_set_id,
                         "url": url.strip(), "action": action,
                         "acting_user_id": acting_user_id,
                         "timestamp": timestamp, "group_id": group_id})

    def mark_resource_saved(self, result_set_id: int, url: str,
                            group_id: int = NO_GROUP) -> None:
        """Flip a stored resource to saved; idempotent."""
        if not isinstance(group_id, int) or group_id < 0:
            raise InvalidQuery("group_id must be >= 0")
        with self._lock:
            self._require_resource(result_set_id, url)
            self._write({"op": "save", "result_set_id": result_set_id,
                         "url": url.strip(), "group_id": group_id})

    def put_viewing_times(self, batch: list[dict]) -> int:
        """Insert viewing durations; the whole batch is validated first."""
        with self._lock:
            clean: list[dict] = []
            for item in batch:
                rsid = item.get("result_set_id")
                url = str(item.get("url", "")).strip()
                opened_at = item.get("opened_at")
                duration = item.get("duration_ms")
                if not isinstance(opened_at, int) or opened_at <= 0:
                    raise InvalidQuery("opened_at must be positive epoch ms")
                if not isinstance(duration, int) or duration < 0:
                    raise InvalidQuery("duration_ms must be >= 0")
                self._require_resource(rsid, url)
                clean.append({"result_set_id": rsid, "url": url,
                              "opened_at": opened_at, "duration_ms": duration})
            if not clean:
                return 0
            self._write({"op": "viewings", "batch": clean})
            return len(clean)

    def put_tags(self, result_set_id: int, tags: list[str]) -> list[str]:
        """Replace the whole tag set; returns the normalized list stored."""
        if not isinstance(tags, list) or any(not isinstance(t, str) for t in tags):
            raise InvalidQuery("tags must be a list of strings")
        with self._lock:
            self._require_result_set(result_set_id)
            normalized = normalize_tags(tags)
            self._write({"op": "tags", "result_set_id": result_set_id,
                         "tags": normalized})
            return normalized

    def put_comment(self, result_set_id: int, author_id: int, text: str,
                    timestamp: int) -> int:
        """Append a comment and return its fresh comment id."""
        if not isinstance(text, str) or not text.strip():
            raise InvalidComment("comment text must be nonempty after trimming")
        if not isinstance(timestamp, int) or timestamp <= 0:
            raise InvalidComment("timestamp must be positive epoch milliseconds")
        with self._lock:
            self._require_result_set(result_set_id)
            comment_id = self._next_comment_id
            self._write({"op": "comment", "comment_id": comment_id,
                         "result_set_id": result_set_id,
                         "author_id": author_id, "text": text,
                         "timestamp": timestamp})
            return comment_id

    def put_share(self, owner_id: int, grantee_id: int, result_set_id: int,
                  timestamp: int | None = None) -> None:
        """Grant read+annotate on a result set; idempotent per triple."""
        if owner_id == grantee_id:
            raise SelfShare("cannot share a result set with its owner")
        if not isinstance(grantee_id, int) or grantee_id < 1:
            raise InvalidQuery("grantee user id must be a positive integer")
        with self._lock:
            query = self._require_result_set(result_set_id)
            if query.user_id != owner_id:
                raise NotOwner(f"user {owner_id} does not own result set "
                               f"{result_set_id}")
            key = (owner_id, grantee_id, result_set_id)
            if key in self._shares:
                return  # idempotent re-grant
            self._write({"op": "share", "owner_id": owner_id,
                         "grantee_id": grantee_id,
                         "result_set_id": result_set_id,
                         "timestamp": timestamp if timestamp is not None
                         else _now_ms()})

    def delete_result_sets(self, user_id: int, result_set_ids: list[int]) -> int:
        """Cascade-delete the caller's result sets; returns how many existed.

        Ids that no longer exist are skipped. If any existing id belongs to a
        different user the whole request is rejected and nothing is deleted.
        """
        with self._lock:
            present = [rsid for rsid in dict.fromkeys(result_set_ids)
                       if rsid in self._queries]
            for rsid in present:
                if self._queries[rsid].user_id != user_id:
                    raise NotOwner(f"user {user_id} does not own result set {rsid}")
            if not present:
                return 0
            self._write({"op": "delete", "result_set_ids": present})
            return len(present)

    def _write(self, record: dict) -> None:
        self._append(record)
        self._apply(record)

    # ------------------------------------------------------------- reads

    def has_result_set(self, result_set_id: int) -> bool:
        with self._lock:
            return result_set_id in self._queries

    def get_query(self, result_set_id: int) -> QueryLog:
        with self._lock:
            return replace(self._require_result_set(result_set_id))

    def can_access(self, user_id: int, result_set_id: int, mode: str) -> bool:
        """Owner passes every mode; grantees pass read and annotate only."""
        with self._lock:
            query = self._require_result_set(result_set_id)
            if query.user_id == user_id:
                return True
            if mode == OWN:
                return False
            return (query.user_id, user_id, result_set_id) in self._shares

    def fetch_result_set(self, result_set_id: int,
                         action_filter: str = "all") -> ResultSetView:
        """All data for a result set, resources filtered by click/save state."""
        with self._lock:
            self._require_result_set(result_set_id)
            resources = [replace(r) for r in self._resources[result_set_id]]
            if action_filter not in ("all", "clicked", "not_clicked", "saved"):
                raise InvalidQuery(f"unknown result set filter {action_filter!r}")
            if action_filter != "all":
                clicked_urls = {normalize_url(a.url)
                                for a in self._actions[result_set_id]
                                if a.action == "clicked"}
                if action_filter == "clicked":
                    resources = [r for r in resources
                                 if normalize_url(r.url) in clicked_urls]
                elif action_filter == "not_clicked":
                    resources = [r for r in resources
                                 if normalize_url(r.url) not in clicked_urls]
                else:
                    resources = [r for r in resources if r.saved]
            comments = sorted(self._comments[result_set_id],
                              key=lambda c: (c.timestamp, c.comment_id))
            return ResultSetView(
                resources=resources,
                actions=[replace(a) for a in self._actions[result_set_id]],
                viewing_times=[replace(v) for v in self._viewings[result_set_id]],
                tags=list(self._tags[result_set_id]),
                comments=[replace(c) for c in comments],
            )

    def fetch_resource_urls(self, result_set_id: int) -> list[str]:
        """Urls of the result set in rank order; empty list is valid."""
        with self._lock:
            self._require_result_set(result_set_id)
            return [r.url for r in self._resources[result_set_id]]

    def fetch_tags(self, result_set_id: int) -> list[str]:
        with self._lock:
            self._require_result_set(result_set_id)
            return list(self._tags[result_set_id])

    def fetch_history(self, hq: HistoryQuery):
        """Resolve a history query.

        Returns a list of SearchHistoryEntry for every variant except
        by_date, which returns a list of (date, entries) pairs with dates
        descending. An unknown user yields an empty result, not an error.
        """
        with self._lock:
            entries = [self._history_entry(rsid)
                       for rsid in self._user_result_sets.get(hq.user_id, [])]
            entries.sort(key=lambda e: (e.query_log.timestamp,
                                        e.query_log.result_set_id),
                         reverse=True)
            if hq.variant == "all":
                return entries
            if hq.variant == "paged":
                return entries[hq.offset:hq.offset + hq.limit]
            if hq.variant == "time_range":
                return [e for e in entries
                        if hq.start <= e.query_log.timestamp <= hq.end]
            if hq.variant == "by_query":
                return [e for e in entries
                        if normalize_query(e.query_log.query) == hq.query
                        and e.query_log.result_set_id != hq.exclude_result_set_id]
            if hq.variant == "by_date":
                grouped: dict = {}
                for entry in entries:  # already newest-first
                    day = local_date_of(entry.query_log.timestamp)
                    grouped.setdefault(day, []).append(entry)
                return sorted(grouped.items(), key=lambda kv: kv[0], reverse=True)
            raise ValueError(f"unknown history variant {hq.variant!r}")

    def fetch_shared_with(self, user_id: int) -> list[tuple[ShareGrant, SearchHistoryEntry]]:
        """Grants naming the user, each with the owner's history entry."""
        with self._lock:
            out = []
            for grant in self._shares.values():
                if grant.grantee_id == user_id:
                    out.append((replace(grant),
                                self._history_entry(grant.result_set_id)))
            return out

    def _history_entry(self, rsid: int) -> SearchHistoryEntry:
        clicked_urls: set[str] = set()
        event_ts: dict[str, int] = {}
        for action in self._actions[rsid]:
            key = normalize_url(action.url)
            if action.action == "clicked":
                clicked_urls.add(key)
            stored = self._resource_by_key(rsid, key)
            if stored is not None:
                prev = event_ts.get(stored.url, 0)
                event_ts[stored.url] = max(prev, action.timestamp)
        clicked = [replace(r) for r in self._resources[rsid]
                   if normalize_url(r.url) in clicked_urls]
        saved = [replace(r) for r in self._resources[rsid] if r.saved]
        return SearchHistoryEntry(query_log=replace(self._queries[rsid]),
                                  clicked=clicked, saved=saved,
                                  event_timestamps=event_ts)

    def _resource_by_key(self, rsid: int, key: str) -> Resource | None:
        index = self._url_index[rsid].get(key)
        if index is None:
            return None
        return self._resources[rsid][index]

    # ------------------------------------------------------------- guards

    def _require_result_set(self, result_set_id) -> QueryLog:
        if not isinstance(result_set_id, int) or result_set_id not in self._queries:
            raise UnknownResultSet(f"unknown result set {result_set_id}")
        return self._queries[result_set_id]

    def _require_resource(self, result_set_id, url: str) -> Resource:
        self._require_result_set(result_set_id)
        resource = self._resource_by_key(result_set_id, normalize_url(url))
        if resource is None:
            raise UnknownResource(
                f"url not in result set {result_set_id}: {url}")
        return resource
