"""Web search client returning typed snippets, behind record/replay.

The live transport speaks the common answer-box / knowledge-graph /
organic page shape. Snippets are ordered answer box first, then knowledge
graph, then organic results, truncated and capped to keep the downstream
verification prompt bounded.
"""

from __future__ import annotations

import logging
import time
from typing import Callable, Optional

import requests

from .fixtures import FixtureStore, Mode
from .models import SearchQuery, SearchSnippet, SnippetSource

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_URL = "https://google.serper.dev/search"
EVIDENCE_CAP = 10
SNIPPET_MAX_CHARS = 400
TRANSPORT_RETRIES = 3


class SearchTransportError(RuntimeError):
    pass


def _default_http_post(url: str, headers: dict, body: dict, timeout: float) -> dict:
    response = requests.post(url, headers=headers, json=body, timeout=timeout)
    response.raise_for_status()
    return response.json()


def parse_search_page(page: dict, claim_id: str, cap: int = EVIDENCE_CAP) -> list[SearchSnippet]:
    """Flatten a search response page into ordered, truncated snippets."""
    snippets: list[SearchSnippet] = []

    answer_box = page.get("answerBox") or {}
    text = answer_box.get("answer") or answer_box.get("snippet") or ""
    if text:
        snippets.append(
            SearchSnippet(
                claim_id=claim_id,
                text=text[:SNIPPET_MAX_CHARS],
                source=SnippetSource.ANSWER_BOX,
                url=answer_box.get("link"),
            )
        )

    graph = page.get("knowledgeGraph") or {}
    description = graph.get("description") or ""
    if description:
        title = graph.get("title") or ""
        text = f"{title}: {description}" if title else description
        snippets.append(
            SearchSnippet(
                claim_id=claim_id,
                text=text[:SNIPPET_MAX_CHARS],
                source=SnippetSource.KNOWLEDGE_GRAPH,
                url=graph.get("descriptionLink"),
            )
        )

    for item in page.get("organic") or []:
        text = item.get("snippet") or ""
        if not text:
            continue
        snippets.append(
            SearchSnippet(
                claim_id=claim_id,
                text=text[:SNIPPET_MAX_CHARS],
                source=SnippetSource.ORGANIC,
                url=item.get("link"),
            )
        )

    return snippets[:cap]


class SearchClient:
    def __init__(
        self,
        store: FixtureStore,
        api_key: Optional[str] = None,
        base_url: str = DEFAULT_SEARCH_URL,
        http_post: Callable[..., dict] = _default_http_post,
        timeout: float = 20.0,
        evidence_cap: int = EVIDENCE_CAP,
        backoff_base: float = 0.5,
        rate_limiter=None,
    ):
        self.store = store
        self.api_key = api_key
        self.base_url = base_url
        self.http_post = http_post
        self.timeout = timeout
        self.evidence_cap = evidence_cap
        self.backoff_base = backoff_base
        self.rate_limiter = rate_limiter

    def _call_live(self, query_text: str) -> dict:
        if not self.api_key:
            raise SearchTransportError("live search requires SEARCH_API_KEY")
        last: Exception | None = None
        for attempt in range(TRANSPORT_RETRIES):
            try:
                if self.rate_limiter is not None:
                    self.rate_limiter.acquire()
                page = self.http_post(
                    self.base_url,
                    headers={"X-API-KEY": self.api_key, "Content-Type": "application/json"},
                    body={"q": query_text},
                    timeout=self.timeout,
                )
                return {"response": page}
            except Exception as exc:  # noqa: BLE001
                last = exc
                logger.warning("search transport failure (attempt %d): %s", attempt + 1, exc)
                if attempt + 1 < TRANSPORT_RETRIES:
                    time.sleep(self.backoff_base * (2**attempt))
        raise SearchTransportError(f"search failed after {TRANSPORT_RETRIES} attempts: {last}")

    def search(self, query: SearchQuery) -> list[SearchSnippet]:
        """Snippets for one query; transport failure degrades to no evidence."""
        request = {"q": query.text}
        try:
            payload = self.store.fetch("search", request, lambda: self._call_live(query.text))
        except SearchTransportError as exc:
            if self.store.mode == Mode.REPLAY:
                raise
            logger.warning("search returned no evidence for %r: %s", query.text, exc)
            return []
        return parse_search_page(payload["response"], query.claim_id, cap=self.evidence_cap)
