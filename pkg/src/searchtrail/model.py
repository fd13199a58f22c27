"""Shared vocabulary for the tracker: record types, domain errors, normalization.

Every layer (store, service, client, analysis) speaks in these types. All
timestamps are integer epoch milliseconds, UTC. Identifiers are positive
integers assigned by the store, starting at 1, never reused.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from urllib.parse import urlsplit, urlunsplit

SEARCH_TYPES = ("text", "image", "video")
MEDIA_TYPES = ("text", "image", "video")
ACTION_KINDS = ("clicked", "saved")
RESULT_SET_FILTERS = ("all", "clicked", "not_clicked", "saved")

# group id 0 means "no group" / personal capture
NO_GROUP = 0

_EPOCH = date(1970, 1, 1)
_MS_PER_DAY = 86_400_000


# ---------------------------------------------------------------- errors


class TrackerError(Exception):
    """Base class for every domain-level failure."""


class InvalidQuery(TrackerError):
    """Query log rejected (empty query, bad user id, bad search type...)."""


class InvalidComment(TrackerError):
    """Comment rejected (empty text after trimming)."""


class UnknownResultSet(TrackerError):
    """No result set with that id exists."""


class UnknownResource(TrackerError):
    """The referenced url is not part of the referenced result set."""


class DuplicateUrl(TrackerError):
    """A url already present in the result set was inserted again."""


class RankConflict(TrackerError):
    """Batch ranks are not unique and contiguous from the current max."""


class NotOwner(TrackerError):
    """Operation requires ownership of the result set."""


class SelfShare(TrackerError):
    """Owner and grantee of a share must differ."""


class EmptyQuery(TrackerError):
    """A query argument normalized to the empty string."""


class AccessDenied(TrackerError):
    """Caller is neither owner nor grantee for the requested mode."""


class StorageFailure(TrackerError):
    """The persistence layer could not durably record a write."""


# ---------------------------------------------------------------- records


@dataclass(slots=True)
class QueryLog:
    """One issued search: who, what, when, in which session."""

    result_set_id: int
    user_id: int
    group_id: int
    session_id: str
    query: str
    search_type: str
    timestamp: int


@dataclass(slots=True)
class Resource:
    """One displayed result, identified within its set by normalized url.

    rank is 1-based display position; (result_set_id, rank) and
    (result_set_id, normalized url) are both unique. saved_group_id is
    meaningful only while saved is true.
    """

    result_set_id: int
    rank: int
    url: str
    title: str
    source: str
    media_type: str
    saved: bool = False
    saved_group_id: int = NO_GROUP


@dataclass(slots=True)
class ResourceActionEntry:
    """Append-only click/save event against a stored resource."""

    result_set_id: int
    url: str
    action: str
    acting_user_id: int
    timestamp: int
    group_id: int = NO_GROUP


@dataclass(slots=True)
class ViewingTime:
    """How long a resource was kept open; duration_ms of 0 is legal."""

    result_set_id: int
    url: str
    opened_at: int
    duration_ms: int


@dataclass(slots=True)
class Comment:
    comment_id: int
    result_set_id: int
    author_id: int
    text: str
    timestamp: int


@dataclass(slots=True)
class TagSet:
    """Ordered distinct tags (trimmed, case-folded) for one result set."""

    result_set_id: int
    tags: list[str] = field(default_factory=list)


@dataclass(slots=True)
class ShareGrant:
    owner_id: int
    grantee_id: int
    result_set_id: int
    timestamp: int


@dataclass(slots=True)
class SearchHistoryEntry:
    """A query log joined with its clicked/saved resources for display."""

    query_log: QueryLog
    clicked: list[Resource] = field(default_factory=list)
    saved: list[Resource] = field(default_factory=list)
    # url -> latest click/save timestamp observed for that url
    event_timestamps: dict[str, int] = field(default_factory=dict)


@dataclass(slots=True)
class ServiceResponse:
    """Body of every successful mutating service call."""

    message: str
    returnid: int = -1


# ---------------------------------------------------------------- history queries


@dataclass(slots=True)
class HistoryQuery:
    """Selector for fetch_history; build via the classmethod constructors."""

    user_id: int
    variant: str = "all"
    offset: int = 0
    limit: int = 0
    start: int = 0
    end: int = 0
    query: str = ""
    exclude_result_set_id: int | None = None

    @classmethod
    def all(cls, user_id: int) -> HistoryQuery:
        return cls(user_id=user_id, variant="all")

    @classmethod
    def by_date(cls, user_id: int) -> HistoryQuery:
        return cls(user_id=user_id, variant="by_date")

    @classmethod
    def paged(cls, user_id: int, offset: int, limit: int) -> HistoryQuery:
        if offset < 0:
            raise ValueError("offset must be >= 0")
        if limit < 1:
            raise ValueError("limit must be >= 1")
        return cls(user_id=user_id, variant="paged", offset=offset, limit=limit)

    @classmethod
    def time_range(cls, user_id: int, start: int, end: int) -> HistoryQuery:
        if start > end:
            raise ValueError("start must be <= end")
        return cls(user_id=user_id, variant="time_range", start=start, end=end)

    @classmethod
    def by_query(cls, user_id: int, query: str,
                 exclude_result_set_id: int | None = None) -> HistoryQuery:
        normalized = normalize_query(query)
        if not normalized:
            raise EmptyQuery("query normalizes to the empty string")
        return cls(user_id=user_id, variant="by_query", query=normalized,
                   exclude_result_set_id=exclude_result_set_id)


# ---------------------------------------------------------------- normalization


def normalize_query(query: str) -> str:
    """Trim, collapse internal whitespace runs to one space, case-fold.

    Idempotent; all-whitespace input yields "".
    """
    return " ".join(query.split()).casefold()


def normalize_tags(tags: list[str]) -> list[str]:
    """Trim and case-fold each tag, drop empties, keep first of duplicates."""
    out: list[str] = []
    seen: set[str] = set()
    for tag in tags:
        cleaned = tag.strip().casefold()
        if cleaned and cleaned not in seen:
            seen.add(cleaned)
            out.append(cleaned)
    return out


def normalize_url(url: str) -> str:
    """Identity form of a url: trimmed, scheme and host lowercased.

    Used as the uniqueness key for resources within a result set. Relative
    or unparseable strings are just trimmed.
    """
    cleaned = url.strip()
    try:
        parts = urlsplit(cleaned)
    except ValueError:
        return cleaned
    if not parts.scheme:
        return cleaned
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(),
                       parts.path, parts.query, parts.fragment))


def comparison_key(url: str) -> str:
    """Membership key for result-set diffing: identity form, trailing slash stripped."""
    normalized = normalize_url(url)
    return normalized.rstrip("/")


def local_date_of(timestamp_ms: int) -> date:
    """UTC calendar date containing the instant. 1 ms -> 1970-01-01."""
    if timestamp_ms < 0:
        raise ValueError("timestamps are positive epoch milliseconds")
    return _EPOCH + timedelta(days=timestamp_ms // _MS_PER_DAY)


_HOST_PORT = re.compile(r"^(?P<host>[^:]+|\[[^\]]+\]):(?P<port>\d+)$")


def split_listen_address(listen: str) -> tuple[str, int]:
    """Parse HOST:PORT; raises ValueError on anything else."""
    match = _HOST_PORT.match(listen.strip())
    if not match:
        raise ValueError(f"expected HOST:PORT, got {listen!r}")
    return match.group("host").strip("[]"), int(match.group("port"))
