"""Command line entry points: serve, simulate, export-history.

serve hosts the HTTP service over a store directory and a search corpus.
simulate replays a recorded session script through the real client against
a running service, driving time from the script's own timestamps. export-
history writes one user's full history as stable, sorted-key JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
from pathlib import Path

import requests

from .client import HttpTransport, SessionRecorder, TrackerRequestError
from .httpd import make_server
from .model import MEDIA_TYPES, SEARCH_TYPES, TrackerError, split_listen_address
from .provider import CorpusError, load_corpus
from .service import SearchLogService
from .store import Store

log = logging.getLogger(__name__)

DEFAULT_LISTEN = "127.0.0.1:8765"

_STEP_KINDS = ("begin_search", "display", "click", "save", "open_view",
               "close_view", "set_tags", "comment", "tick", "end_session")


class ScriptError(Exception):
    """Session script rejected during validation, before any request."""


# ---------------------------------------------------------------- serve


def _cmd_serve(args: argparse.Namespace) -> int:
    try:
        host, port = split_listen_address(args.listen)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        corpus = load_corpus(args.corpus)
    except (CorpusError, OSError) as exc:
        print(f"error: cannot load corpus: {exc}", file=sys.stderr)
        return 2
    store = Store(args.store)
    service = SearchLogService(store, corpus)
    try:
        server = make_server(host, port, service, args.ui_dir)
    except OSError as exc:
        print(f"error: cannot listen on {args.listen}: {exc}", file=sys.stderr)
        store.close()
        return 2

    def _terminate(_signum, _frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, _terminate)
    print(f"serving on http://{host}:{port} "
          f"(store={args.store}, corpus={args.corpus})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
        store.close()
    return 0


# ---------------------------------------------------------------- simulate


def _validate_script(script: dict) -> list[dict]:
    """Static validation mirroring the recorder's runtime rules."""
    if not isinstance(script, dict):
        raise ScriptError("script must be a JSON object")
    user_id = script.get("user_id")
    if not isinstance(user_id, int) or user_id < 1:
        raise ScriptError("user_id must be a positive integer")
    session_id = script.get("session_id")
    if not isinstance(session_id, str) or not session_id:
        raise ScriptError("session_id must be a nonempty string")
    steps = script.get("steps", [])
    if not isinstance(steps, list):
        raise ScriptError("steps must be a list")

    last_at = 0
    search_open = False
    known_urls: set[str] = set()
    open_views: set[str] = set()
    for index, step in enumerate(steps):
        where = f"step {index}"
        if not isinstance(step, dict):
            raise ScriptError(f"{where}: steps must be objects")
        kind = step.get("action")
        if kind not in _STEP_KINDS:
            raise ScriptError(f"{where}: unknown action {kind!r}")
        at = step.get("at")
        if not isinstance(at, int) or at < 1:
            raise ScriptError(f"{where}: 'at' must be positive epoch ms")
        if at < last_at:
            raise ScriptError(f"{where}: timestamps must be non-decreasing")
        last_at = at

        if kind == "begin_search":
            query = step.get("query")
            if not isinstance(query, str) or not query.strip():
                raise ScriptError(f"{where}: query must be nonempty")
            if step.get("search_type", "text") not in SEARCH_TYPES:
                raise ScriptError(f"{where}: bad search_type")
            search_open = True
            known_urls = set()
            open_views = set()
        elif kind == "tick":
            continue
        elif kind == "end_session":
            search_open = False
            known_urls = set()
            open_views = set()
        else:
            if not search_open:
                raise ScriptError(f"{where}: no search is open")
            if kind == "display":
                results = step.get("results")
                if not isinstance(results, list) or not results:
                    raise ScriptError(f"{where}: display needs results")
                for item in results:
                    if not isinstance(item, dict) or not item.get("url"):
                        raise ScriptError(f"{where}: each result needs a url")
                    if item.get("media_type") not in MEDIA_TYPES:
                        raise ScriptError(f"{where}: bad media_type")
                    known_urls.add(item["url"])
            elif kind in ("click", "save", "open_view", "close_view"):
                url = step.get("url")
                if url not in known_urls:
                    raise ScriptError(
                        f"{where}: url not introduced by a prior display: {url}")
                if kind == "open_view":
                    if url in open_views:
                        raise ScriptError(f"{where}: view already open: {url}")
                    open_views.add(url)
                if kind == "close_view":
                    if url not in open_views:
                        raise ScriptError(f"{where}: view not open: {url}")
                    open_views.discard(url)
            elif kind == "set_tags":
                tags = step.get("tags")
                if not isinstance(tags, list) or \
                        any(not isinstance(t, str) for t in tags):
                    raise ScriptError(f"{where}: tags must be a list of strings")
            elif kind == "comment":
                text = step.get("text")
                if not isinstance(text, str) or not text.strip():
                    raise ScriptError(f"{where}: comment text must be nonempty")
    return steps


def replay_script(script: dict, recorder: SessionRecorder) -> dict:
    """Drive the recorder through validated steps; returns summary counters."""
    summary = {"queries_posted": 0, "resources_sent": 0, "actions_sent": 0,
               "viewings_sent": 0, "comments_posted": 0, "flushes": 0,
               "result_set_ids": []}

    def _absorb(report) -> None:
        if report is None:
            return
        summary["flushes"] += 1
        summary["resources_sent"] += report.resources_sent
        summary["actions_sent"] += report.actions_sent
        summary["viewings_sent"] += report.viewings_sent

    for step in script["steps"]:
        kind, at = step["action"], step["at"]
        if kind == "begin_search":
            # begin_search flushes internally; count what it pushes out
            before = recorder.current_result_set_id
            if before is not None:
                _absorb(recorder.flush("query_change", at=at))
            rsid = recorder.begin_search(step["query"],
                                         step.get("search_type", "text"),
                                         step.get("group_id", 0), at=at)
            summary["queries_posted"] += 1
            summary["result_set_ids"].append(rsid)
        elif kind == "display":
            results = [(r["url"], r.get("title", ""), r.get("source", ""),
                        r["media_type"]) for r in step["results"]]
            recorder.record_displayed(results, at=at)
        elif kind == "click":
            recorder.record_click(step["url"], at=at)
        elif kind == "save":
            recorder.record_save(step["url"], step.get("group_id", 0), at=at)
        elif kind == "open_view":
            recorder.open_view(step["url"], at=at)
        elif kind == "close_view":
            recorder.close_view(step["url"], at=at)
        elif kind == "set_tags":
            recorder.set_tags(step["tags"], at=at)
        elif kind == "comment":
            recorder.add_comment(step["text"], at=at)
            summary["comments_posted"] += 1
        elif kind == "tick":
            _absorb(recorder.tick(step["at"]))
        elif kind == "end_session":
            _absorb(recorder.end_session(at=at))
    if recorder.current_result_set_id is not None:
        _absorb(recorder.end_session(at=script["steps"][-1]["at"]
                                     if script["steps"] else None))
    return summary


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        script = json.loads(Path(args.script).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"error: cannot read script: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: script is not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        _validate_script(script)
    except ScriptError as exc:
        print(f"error: invalid script: {exc}", file=sys.stderr)
        return 2

    recorder = SessionRecorder(HttpTransport(args.service),
                               user_id=script["user_id"],
                               session_id=script["session_id"])
    try:
        summary = replay_script(script, recorder)
    except (TrackerRequestError, TrackerError,
            requests.exceptions.RequestException) as exc:
        print(f"error: replay failed: {exc}", file=sys.stderr)
        return 1
    for key in ("queries_posted", "resources_sent", "actions_sent",
                "viewings_sent", "comments_posted", "flushes"):
        print(f"{key}={summary[key]}")
    ids = ",".join(str(i) for i in summary["result_set_ids"])
    print(f"result_set_ids={ids}")
    return 0


# ---------------------------------------------------------------- export


def _cmd_export_history(args: argparse.Namespace) -> int:
    url = f"{args.service.rstrip('/')}/searchlog/searchhistory/{args.user_id}"
    try:
        response = requests.get(url, headers={"X-User-Id": str(args.user_id)},
                                timeout=10.0)
    except requests.exceptions.RequestException as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return 1
    if response.status_code != 200:
        print(f"error: service answered {response.status_code}: "
              f"{response.text}", file=sys.stderr)
        return 1
    payload = response.json()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # stable byte-for-byte output: sorted keys, fixed indentation
    out.write_text(json.dumps(payload, sort_keys=True, indent=2,
                              ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="searchtrail",
        description="Search-context tracker service and session tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP tracker service")
    serve.add_argument("--listen",
                       default=os.environ.get("SEARCHTRAIL_LISTEN",
                                              DEFAULT_LISTEN),
                       help="HOST:PORT to bind (env SEARCHTRAIL_LISTEN)")
    serve.add_argument("--store",
                       default=os.environ.get("SEARCHTRAIL_STORE"),
                       required="SEARCHTRAIL_STORE" not in os.environ,
                       help="store directory (env SEARCHTRAIL_STORE)")
    serve.add_argument("--corpus",
                       default=os.environ.get("SEARCHTRAIL_CORPUS"),
                       required="SEARCHTRAIL_CORPUS" not in os.environ,
                       help="corpus JSONL file (env SEARCHTRAIL_CORPUS)")
    serve.add_argument("--ui-dir", default=os.environ.get("SEARCHTRAIL_UI_DIR"),
                       help="optional static web UI directory")
    serve.set_defaults(func=_cmd_serve)

    simulate = sub.add_parser("simulate",
                              help="replay a session script against a service")
    simulate.add_argument("script", help="session script JSON file")
    simulate.add_argument("--service", required=True,
                          help="service base url, e.g. http://127.0.0.1:8765")
    simulate.set_defaults(func=_cmd_simulate)

    export = sub.add_parser("export-history",
                            help="write one user's history as stable JSON")
    export.add_argument("user_id", type=int)
    export.add_argument("--service", required=True)
    export.add_argument("--out", required=True)
    export.set_defaults(func=_cmd_export_history)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SEARCHTRAIL_LOG", "WARNING"))
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
