"""CLI behavior: script validation, replay determinism, live round-trips.

The live tests bind an ephemeral port, serve from a daemon thread, and run
the real commands through main(), so they exercise the same HTTP path as a
deployed service.
"""

from __future__ import annotations

import json
import socket
from pathlib import Path

import pytest

from searchtrail.cli import ScriptError, _validate_script, main, replay_script
from searchtrail.client import InProcessTransport, SessionRecorder
from searchtrail.httpd import make_server, run_in_thread
from searchtrail.service import SearchLogService
from searchtrail.store import Store

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DEMO = FIXTURES / "demo_session.json"
CORPUS = FIXTURES / "corpus.jsonl"

EXPECTED_DEMO = {
    "queries_posted": 3,
    "resources_sent": 9,
    "actions_sent": 3,
    "viewings_sent": 2,
    "comments_posted": 1,
    "flushes": 4,
    "result_set_ids": [1, 2, 3],
}


def _script(steps, user_id=5, session_id="s"):
    return {"user_id": user_id, "session_id": session_id, "steps": steps}


def _display(at, *urls):
    return {"action": "display", "at": at,
            "results": [{"url": u, "title": "t", "source": "s",
                         "media_type": "text"} for u in urls]}


@pytest.fixture
def live_server(tmp_path):
    store = Store(tmp_path / "live-store")
    server = make_server("127.0.0.1", 0, SearchLogService(store))
    thread = run_in_thread(server)
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        store.close()
        thread.join(timeout=5)


def _closed_port_url() -> str:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    return f"http://127.0.0.1:{port}"


class TestScriptValidation:
    def test_demo_fixture_is_valid(self):
        script = json.loads(DEMO.read_text(encoding="utf-8"))
        assert len(_validate_script(script)) == len(script["steps"])

    @pytest.mark.parametrize("script", [
        [],
        _script([], user_id=0),
        _script([], user_id="5"),
        _script([], session_id=""),
        _script("not a list"),
        _script([{"action": "hover", "at": 1}]),
        _script([{"action": "tick"}]),
        _script([{"action": "tick", "at": 0}]),
        _script([{"action": "begin_search", "at": 5, "query": "q"},
                 {"action": "tick", "at": 4}]),
        _script([{"action": "begin_search", "at": 1, "query": "  "}]),
        _script([{"action": "begin_search", "at": 1, "query": "q",
                  "search_type": "audio"}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "display", "at": 2, "results": []}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "display", "at": 2,
                  "results": [{"title": "no url", "media_type": "text"}]}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "display", "at": 2,
                  "results": [{"url": "https://a", "media_type": "flash"}]}]),
        _script([_display(1, "https://a")]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "click", "at": 2, "url": "https://ghost"}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 _display(2, "https://a"),
                 {"action": "open_view", "at": 3, "url": "https://a"},
                 {"action": "open_view", "at": 4, "url": "https://a"}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 _display(2, "https://a"),
                 {"action": "close_view", "at": 3, "url": "https://a"}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "set_tags", "at": 2, "tags": "solo"}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "set_tags", "at": 2, "tags": ["ok", 3]}]),
        _script([{"action": "begin_search", "at": 1, "query": "q"},
                 {"action": "comment", "at": 2, "text": "  "}]),
    ])
    def test_bad_scripts_are_rejected(self, script):
        with pytest.raises(ScriptError):
            _validate_script(script)

    def test_urls_reset_between_searches(self):
        script = _script([
            {"action": "begin_search", "at": 1, "query": "one"},
            _display(2, "https://a"),
            {"action": "begin_search", "at": 3, "query": "two"},
            {"action": "click", "at": 4, "url": "https://a"},
        ])
        with pytest.raises(ScriptError):
            _validate_script(script)


def _replay_fresh(root: Path, name: str) -> dict:
    script = json.loads(DEMO.read_text(encoding="utf-8"))
    with Store(root / name) as store:
        recorder = SessionRecorder(InProcessTransport(SearchLogService(store)),
                                   user_id=script["user_id"],
                                   session_id=script["session_id"])
        return replay_script(script, recorder)


class TestReplayDeterminism:
    def test_demo_summary_is_frozen(self, tmp_path):
        assert _replay_fresh(tmp_path, "a") == EXPECTED_DEMO

    def test_fresh_stores_replay_identically(self, tmp_path):
        assert _replay_fresh(tmp_path, "a") == _replay_fresh(tmp_path, "b")

    def test_same_store_shifts_only_the_ids(self, tmp_path):
        script = json.loads(DEMO.read_text(encoding="utf-8"))
        with Store(tmp_path / "shared") as store:
            service = SearchLogService(store)

            def run():
                recorder = SessionRecorder(
                    InProcessTransport(service),
                    user_id=script["user_id"],
                    session_id=script["session_id"])
                return replay_script(script, recorder)

            first, second = run(), run()
        assert first == EXPECTED_DEMO
        assert second["result_set_ids"] == [4, 5, 6]
        for key in ("queries_posted", "resources_sent", "actions_sent",
                    "viewings_sent", "comments_posted", "flushes"):
            assert second[key] == first[key]


class TestSimulateCommand:
    def test_demo_against_live_service(self, live_server, capsys):
        assert main(["simulate", str(DEMO), "--service", live_server]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        pairs = dict(line.split("=", 1) for line in lines)
        assert pairs == {
            "queries_posted": "3", "resources_sent": "9",
            "actions_sent": "3", "viewings_sent": "2",
            "comments_posted": "1", "flushes": "4",
            "result_set_ids": "1,2,3"}

    def test_missing_script_file_is_usage_error(self, tmp_path, capsys):
        code = main(["simulate", str(tmp_path / "nope.json"),
                     "--service", "http://127.0.0.1:9"])
        assert code == 2
        assert "cannot read script" in capsys.readouterr().err

    def test_malformed_json_is_usage_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{truncated", encoding="utf-8")
        assert main(["simulate", str(path),
                     "--service", "http://127.0.0.1:9"]) == 2

    def test_invalid_script_fails_before_any_request(self, tmp_path, capsys):
        path = tmp_path / "invalid.json"
        path.write_text(json.dumps(_script(
            [{"action": "begin_search", "at": 1, "query": "q"},
             {"action": "click", "at": 2, "url": "https://ghost"}])),
            encoding="utf-8")
        assert main(["simulate", str(path),
                     "--service", "http://127.0.0.1:9"]) == 2
        assert "invalid script" in capsys.readouterr().err

    def test_unreachable_service_is_runtime_error(self, tmp_path, capsys):
        path = tmp_path / "tiny.json"
        path.write_text(json.dumps(_script(
            [{"action": "begin_search", "at": 1, "query": "q"}])),
            encoding="utf-8")
        assert main(["simulate", str(path),
                     "--service", _closed_port_url()]) == 1
        assert "replay failed" in capsys.readouterr().err


class TestExportCommand:
    def test_round_trip_after_simulate(self, live_server, tmp_path, capsys):
        assert main(["simulate", str(DEMO), "--service", live_server]) == 0
        out = tmp_path / "history.json"
        assert main(["export-history", "8638", "--service", live_server,
                     "--out", str(out)]) == 0
        text = out.read_text(encoding="utf-8")
        assert text.endswith("\n")
        payload = json.loads(text)
        assert [e["query_log"]["query"] for e in payload] == [
            "bridge video tour", "stone arch bridge", "suspension bridge"]

        again = tmp_path / "history2.json"
        assert main(["export-history", "8638", "--service", live_server,
                     "--out", str(again)]) == 0
        assert again.read_bytes() == out.read_bytes()

    def test_unknown_user_exports_empty_list(self, live_server, tmp_path):
        out = tmp_path / "empty.json"
        assert main(["export-history", "4242", "--service", live_server,
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8")) == []

    def test_unreachable_service_fails(self, tmp_path, capsys):
        assert main(["export-history", "8638",
                     "--service", _closed_port_url(),
                     "--out", str(tmp_path / "x.json")]) == 1
        assert "cannot reach service" in capsys.readouterr().err

    def test_rejected_identity_fails(self, live_server, tmp_path, capsys):
        assert main(["export-history", "0", "--service", live_server,
                     "--out", str(tmp_path / "x.json")]) == 1
        assert "service answered 401" in capsys.readouterr().err


class TestServeErrors:
    def test_bad_listen_address(self, tmp_path, capsys):
        assert main(["serve", "--listen", "nonsense",
                     "--store", str(tmp_path / "s"),
                     "--corpus", str(CORPUS)]) == 2

    def test_missing_corpus_file(self, tmp_path, capsys):
        assert main(["serve", "--listen", "127.0.0.1:0",
                     "--store", str(tmp_path / "s"),
                     "--corpus", str(tmp_path / "nope.jsonl")]) == 2
        assert "cannot load corpus" in capsys.readouterr().err

    def test_corrupt_corpus_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"doc_id": 1}\nnot json\n', encoding="utf-8")
        assert main(["serve", "--listen", "127.0.0.1:0",
                     "--store", str(tmp_path / "s"),
                     "--corpus", str(bad)]) == 2

    def test_port_already_in_use(self, tmp_path, capsys):
        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            sock.listen(1)
            port = sock.getsockname()[1]
            code = main(["serve", "--listen", f"127.0.0.1:{port}",
                         "--store", str(tmp_path / "s"),
                         "--corpus", str(CORPUS)])
        assert code == 2
        assert "cannot listen" in capsys.readouterr().err


class TestStaticHosting:
    @pytest.fixture
    def ui_server(self, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html>shell</html>", encoding="utf-8")
        (ui / "app.js").write_text("console.log('hi')", encoding="utf-8")
        (tmp_path / "secret.txt").write_text("keep out", encoding="utf-8")
        store = Store(tmp_path / "store")
        server = make_server("127.0.0.1", 0, SearchLogService(store), ui)
        thread = run_in_thread(server)
        try:
            yield f"http://127.0.0.1:{server.server_address[1]}"
        finally:
            server.shutdown()
            server.server_close()
            store.close()
            thread.join(timeout=5)

    def test_files_routes_and_api_coexist(self, ui_server):
        import requests

        root = requests.get(ui_server + "/", timeout=5)
        assert root.status_code == 200
        assert root.text == "<html>shell</html>"
        js = requests.get(ui_server + "/app.js", timeout=5)
        assert js.status_code == 200
        assert "javascript" in js.headers["Content-Type"]
        # extension-less paths are client-side routes; serve the app shell
        spa = requests.get(ui_server + "/history/8638", timeout=5)
        assert spa.status_code == 200
        assert spa.text == "<html>shell</html>"
        missing = requests.get(ui_server + "/missing.png", timeout=5)
        assert missing.status_code == 404
        health = requests.get(ui_server + "/healthz", timeout=5)
        assert health.json() == {"status": "ok"}

    def test_traversal_cannot_escape_the_ui_dir(self, ui_server):
        import http.client
        from urllib.parse import urlsplit

        netloc = urlsplit(ui_server).netloc
        host, port = netloc.split(":")
        conn = http.client.HTTPConnection(host, int(port), timeout=5)
        try:
            conn.request("GET", "/../secret.txt")
            response = conn.getresponse()
            body = response.read()
        finally:
            conn.close()
        assert b"keep out" not in body
