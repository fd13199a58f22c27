from __future__ import annotations

import pytest

from searchtrail.service import HttpRequest, SearchLogService, dump_json
from searchtrail.store import Store


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "store")
    yield s
    s.close()


@pytest.fixture
def service(store):
    # fixed clock keeps share timestamps deterministic
    return SearchLogService(store, now_ms=lambda: 1_700_000_000_000)


@pytest.fixture
def call(service):
    """Shorthand for driving the dispatcher without a socket."""

    def _call(method, path, *, user=None, body=None, raw_body=None,
              content_type="application/json", query=None):
        headers = {}
        if user is not None:
            headers["X-User-Id"] = str(user)
        data = b""
        if raw_body is not None:
            data = raw_body
            headers["Content-Type"] = content_type
        elif body is not None:
            data = dump_json(body)
            headers["Content-Type"] = content_type
        return service.handle(HttpRequest(method=method, path=path,
                                          headers=headers, body=data,
                                          query_params=query or {}))

    return _call


# ----------------------------------------------------------------
# The acceptance suite reports one line per criterion after the run.

_ACCEPTANCE_ORDER = [
    ("test_flush_triggers",
     "flush triggers (query change / 600000 ms timeout / session end) "
     "+ no-loss over 1000 interleavings"),
    ("test_wire_contract_goldens",
     "wire goldens: byte-exact ServiceResponse and full status-code matrix"),
    ("test_comparison_matches_bruteforce",
     "comparison-over-time equals brute force on 200 randomized pairs"),
    ("test_pagination_reconstruction",
     "paged history reconstructs full history for 100 random histories"),
    ("test_access_control_matrix",
     "authorization matrix over every endpoint x {owner,grantee,stranger,anonymous}"),
    ("test_cascade_delete",
     "cascade delete leaves no orphans and keyed fetches answer 404"),
    ("test_tag_carry_forward",
     "tag carry-forward across a three-query session, cleared at session end"),
    ("test_durability_reopen",
     "close/reopen yields identical reads across 50 randomized trials"),
    ("test_end_to_end_simulate",
     "cli serve + simulate + export-history round trip on the demo script"),
]

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_results[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.failed:
        _acceptance_results[name] = "FAIL"
    elif report.when == "setup" and report.skipped:
        _acceptance_results[name] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, description in _ACCEPTANCE_ORDER:
        outcome = _acceptance_results.get(name, "not run")
        terminalreporter.write_line(f"  {outcome}: {description}")
