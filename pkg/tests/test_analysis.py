from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from searchtrail.analysis import compare_over_time, similar_queries
from searchtrail.model import AccessDenied, EmptyQuery, UnknownResultSet

OWNER = 10
GRANTEE = 11
STRANGER = 12


def _seed_query(store, user=OWNER, query="harbor lights", ts=1_000):
    return store.put_query(user, 0, "s1", query, "text", ts)


def _seed_set(store, urls, user=OWNER, query="harbor lights", ts=1_000):
    rsid = _seed_query(store, user=user, query=query, ts=ts)
    batch = [{"rank": i, "url": url, "title": f"t{i}", "source": "src",
              "media_type": "text"} for i, url in enumerate(urls, start=1)]
    if batch:
        store.put_resources(rsid, batch)
    return rsid


class TestSimilarQueries:
    def test_exact_normalized_match_newest_first(self, store):
        a = _seed_query(store, query="Harbor  Lights", ts=100)
        b = _seed_query(store, query="harbor lights", ts=200)
        _seed_query(store, query="pier view", ts=300)
        _seed_query(store, user=STRANGER, query="harbor lights", ts=400)

        entries = similar_queries(store, OWNER, "HARBOR LIGHTS")
        assert [e.query_log.result_set_id for e in entries] == [b, a]

    def test_exclude_leaves_out_the_current_search(self, store):
        a = _seed_query(store, query="harbor lights", ts=100)
        b = _seed_query(store, query="harbor lights", ts=200)
        entries = similar_queries(store, OWNER, "harbor lights",
                                  exclude_result_set_id=b)
        assert [e.query_log.result_set_id for e in entries] == [a]

    def test_blank_query_rejected(self, store):
        with pytest.raises(EmptyQuery):
            similar_queries(store, OWNER, "   ")

    def test_no_match_is_empty(self, store):
        _seed_query(store, query="harbor lights")
        assert similar_queries(store, OWNER, "stone arch") == []


class TestCompareOverTime:
    def test_membership_example(self, store):
        past = _seed_set(store, ["https://e/a", "https://e/b", "https://e/c"])
        current = [("https://e/c", "C"), ("https://e/d", "D"),
                   ("https://e/e", "E"), ("https://e/f", "F")]
        result = compare_over_time(store, OWNER, current, past)
        assert result.past_result_set_id == past
        assert result.depth == 3
        assert [(i.url, i.is_new) for i in result.items] == [
            ("https://e/c", False), ("https://e/d", True),
            ("https://e/e", True)]

    def test_identical_lists_flag_nothing(self, store):
        urls = [f"https://e/{n}" for n in range(5)]
        past = _seed_set(store, urls)
        result = compare_over_time(store, OWNER,
                                   [(u, "t") for u in urls], past)
        assert result.depth == 5
        assert all(not item.is_new for item in result.items)

    def test_empty_past_set_yields_no_items(self, store):
        past = _seed_set(store, [])
        result = compare_over_time(store, OWNER, [("https://e/a", "A")], past)
        assert result.depth == 0
        assert result.items == []

    def test_short_current_list_caps_items_not_depth(self, store):
        past = _seed_set(store, ["https://e/a", "https://e/b", "https://e/c"])
        result = compare_over_time(store, OWNER, [("https://e/z", "Z")], past)
        assert result.depth == 3
        assert len(result.items) == 1
        assert result.items[0].is_new

    def test_matching_ignores_host_case_and_trailing_slash(self, store):
        past = _seed_set(store, ["HTTPS://E.example/Path"])
        current = [("https://e.example/Path/", "same"),
                   ("https://e.example/path", "differs in path case")]
        result = compare_over_time(store, OWNER, current, past)
        assert [i.is_new for i in result.items] == [False]

    def test_titles_pass_through_untouched(self, store):
        past = _seed_set(store, ["https://e/a"])
        result = compare_over_time(store, OWNER,
                                   [("https://e/b", "Fog Rolling In")], past)
        assert result.items[0].title == "Fog Rolling In"


class TestCompareAccess:
    def test_grantee_may_compare(self, store):
        past = _seed_set(store, ["https://e/a"])
        store.put_share(OWNER, GRANTEE, past, timestamp=1_000)
        result = compare_over_time(store, GRANTEE, [("https://e/a", "t")],
                                   past)
        assert result.items[0].is_new is False

    def test_stranger_is_denied(self, store):
        past = _seed_set(store, ["https://e/a"])
        with pytest.raises(AccessDenied):
            compare_over_time(store, STRANGER, [("https://e/a", "t")], past)

    def test_unknown_past_set_raises(self, store):
        with pytest.raises(UnknownResultSet):
            compare_over_time(store, OWNER, [("https://e/a", "t")], 99)


_URLS = st.lists(
    st.integers(min_value=0, max_value=60).map(lambda n: f"https://e/{n}"),
    max_size=50, unique=True)


class TestCompareProperties:
    @settings(max_examples=60, deadline=None)
    @given(past=_URLS, current=_URLS)
    def test_flags_equal_bruteforce_membership(self, tmp_path_factory,
                                               past, current):
        from searchtrail.store import Store

        store = Store(tmp_path_factory.mktemp("cmp"), fsync=False)
        try:
            rsid = _seed_set(store, past)
            pairs = [(url, "t") for url in current]
            result = compare_over_time(store, OWNER, pairs, rsid)
            assert result.depth == len(past)
            assert len(result.items) == min(len(past), len(current))
            past_set = set(past)
            for item in result.items:
                assert item.is_new == (item.url not in past_set)
        finally:
            store.close()
