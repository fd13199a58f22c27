"""Read-side analysis over stored history: similar queries, diff over time.

Similarity is exact match on the normalized query string, scoped to the
caller's own history. The diff compares the first n current results (n =
size of the stored past set) against the past set by membership, so a
result is "new" exactly when its comparison key is absent from the past.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    AccessDenied,
    HistoryQuery,
    SearchHistoryEntry,
    comparison_key,
)
from .store import READ, Store


@dataclass(slots=True)
class ComparisonItem:
    url: str
    title: str
    is_new: bool


@dataclass(slots=True)
class ComparisonResult:
    past_result_set_id: int
    depth: int  # number of resources stored for the past set
    items: list[ComparisonItem] = field(default_factory=list)


def similar_queries(store: Store, caller: int, query: str,
                    exclude_result_set_id: int | None = None
                    ) -> list[SearchHistoryEntry]:
    """Caller's past searches whose normalized query equals this one.

    Newest first; the entry identified by exclude_result_set_id (usually
    the search being served right now) is left out. Raises EmptyQuery when
    the query normalizes to "".
    """
    hq = HistoryQuery.by_query(caller, query, exclude_result_set_id)
    return store.fetch_history(hq)


def compare_over_time(store: Store, caller: int,
                      current: list[tuple[str, str]],
                      past_result_set_id: int) -> ComparisonResult:
    """Flag which of the first n current results are new versus a past set.

    current is the ranked (url, title) list being displayed; n is the size
    of the past result set, capped by the current length. An empty past set
    yields depth 0 and no items.
    """
    if not store.can_access(caller, past_result_set_id, READ):
        raise AccessDenied(f"user {caller} may not read result set "
                           f"{past_result_set_id}")
    past_urls = store.fetch_resource_urls(past_result_set_id)
    past_keys = {comparison_key(url) for url in past_urls}
    depth = len(past_urls)
    items = [ComparisonItem(url=url, title=title,
                            is_new=comparison_key(url) not in past_keys)
             for url, title in current[:depth]]
    return ComparisonResult(past_result_set_id=past_result_set_id,
                            depth=depth, items=items)
