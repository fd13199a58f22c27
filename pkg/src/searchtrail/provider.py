"""Deterministic local search over a line-delimited JSON corpus.

Scoring is plain term frequency: each query term contributes twice its
occurrence count in the title plus its occurrence count in the body.
Ordering is score descending with doc_id ascending as the tie break, so a
given corpus and query always produce the same ranking.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .model import MEDIA_TYPES, SEARCH_TYPES, EmptyQuery, normalize_query

_WORD = re.compile(r"\w+")


class CorpusError(Exception):
    """Corpus file rejected; str() includes the offending line number."""


@dataclass(frozen=True, slots=True)
class CorpusDocument:
    doc_id: int
    url: str
    title: str
    body: str
    source: str
    media_type: str


@dataclass(frozen=True, slots=True)
class SearchResult:
    url: str
    title: str
    source: str
    media_type: str


def _tokens(text: str) -> list[str]:
    return _WORD.findall(text.casefold())


class Corpus:
    """Immutable document collection with deterministic ranked search."""

    def __init__(self, documents: list[CorpusDocument]):
        self.documents = sorted(documents, key=lambda d: d.doc_id)
        # token counts are precomputed; corpora are desk-scale
        self._title_tokens = {d.doc_id: _tokens(d.title) for d in self.documents}
        self._body_tokens = {d.doc_id: _tokens(d.body) for d in self.documents}

    def __len__(self) -> int:
        return len(self.documents)

    def search(self, query: str, search_type: str = "text",
               limit: int = 20) -> list[SearchResult]:
        """Ranked results for the query, filtered by media type.

        search_type "text" matches every document; "image"/"video" match
        only documents of that media type. Documents scoring 0 are dropped.
        """
        if search_type not in SEARCH_TYPES:
            raise ValueError(f"search_type must be one of {SEARCH_TYPES}")
        if limit < 1:
            raise ValueError("limit must be >= 1")
        terms = normalize_query(query).split()
        if not terms:
            raise EmptyQuery("search query normalizes to the empty string")
        scored: list[tuple[int, int, CorpusDocument]] = []
        for doc in self.documents:
            if search_type != "text" and doc.media_type != search_type:
                continue
            title = self._title_tokens[doc.doc_id]
            body = self._body_tokens[doc.doc_id]
            score = sum(2 * title.count(term) + body.count(term)
                        for term in terms)
            if score > 0:
                scored.append((-score, doc.doc_id, doc))
        scored.sort()
        return [SearchResult(url=d.url, title=d.title, source=d.source,
                             media_type=d.media_type)
                for _, _, d in scored[:limit]]


def load_corpus(path: str | Path) -> Corpus:
    """Parse a JSONL corpus file; an empty file is a valid empty corpus."""
    documents: list[CorpusDocument] = []
    seen_ids: set[int] = set()
    seen_urls: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except ValueError as exc:
                raise CorpusError(f"line {lineno}: not valid JSON: {exc}") from exc
            if not isinstance(raw, dict):
                raise CorpusError(f"line {lineno}: expected a JSON object")
            try:
                doc = CorpusDocument(
                    doc_id=int(raw["doc_id"]),
                    url=str(raw["url"]),
                    title=str(raw["title"]),
                    body=str(raw["body"]),
                    source=str(raw["source"]),
                    media_type=str(raw["media_type"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"line {lineno}: bad document: {exc}") from exc
            if doc.media_type not in MEDIA_TYPES:
                raise CorpusError(
                    f"line {lineno}: media_type must be one of {MEDIA_TYPES}")
            if doc.doc_id in seen_ids:
                raise CorpusError(f"line {lineno}: duplicate doc_id {doc.doc_id}")
            if doc.url in seen_urls:
                raise CorpusError(f"line {lineno}: duplicate url {doc.url}")
            seen_ids.add(doc.doc_id)
            seen_urls.add(doc.url)
            documents.append(doc)
    return Corpus(documents)
