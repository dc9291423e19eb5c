"""Scholar lookup client: paper title -> (title, authors, year) record.

The assumption mirrors how citation checking works downstream: if the
paper exists, it is the first search result for its own title.
"""

from __future__ import annotations

import logging
import time
from typing import Callable

import requests

from .fixtures import FixtureStore
from .models import ScholarRecord

logger = logging.getLogger(__name__)

DEFAULT_SCHOLAR_URL = "https://api.semanticscholar.org/graph/v1"
TRANSPORT_RETRIES = 3


class ScholarNotFound(LookupError):
    def __init__(self, title: str):
        super().__init__(f"no scholar result for title: {title!r}")
        self.title = title


class ScholarTransportError(RuntimeError):
    pass


def _default_http_get(url: str, params: dict, timeout: float) -> dict:
    response = requests.get(url, params=params, timeout=timeout)
    response.raise_for_status()
    return response.json()


class ScholarClient:
    def __init__(
        self,
        store: FixtureStore,
        base_url: str = DEFAULT_SCHOLAR_URL,
        http_get: Callable[..., dict] = _default_http_get,
        timeout: float = 20.0,
        backoff_base: float = 0.5,
        rate_limiter=None,
    ):
        self.store = store
        self.base_url = base_url.rstrip("/")
        self.http_get = http_get
        self.timeout = timeout
        self.backoff_base = backoff_base
        self.rate_limiter = rate_limiter

    def _call_live(self, title: str) -> dict:
        params = {"query": title, "fields": "title,authors,year", "limit": 1}
        url = f"{self.base_url}/paper/search"
        last: Exception | None = None
        for attempt in range(TRANSPORT_RETRIES):
            try:
                if self.rate_limiter is not None:
                    self.rate_limiter.acquire()
                return {"response": self.http_get(url, params=params, timeout=self.timeout)}
            except Exception as exc:  # noqa: BLE001
                last = exc
                logger.warning("scholar transport failure (attempt %d): %s", attempt + 1, exc)
                if attempt + 1 < TRANSPORT_RETRIES:
                    time.sleep(self.backoff_base * (2**attempt))
        raise ScholarTransportError(f"scholar lookup failed after retries: {last}")

    def lookup(self, title: str, claim_id: str) -> ScholarRecord:
        """First search result for the title; ScholarNotFound when there is none."""
        payload = self.store.fetch("scholar", {"query": title}, lambda: self._call_live(title))
        data = payload["response"].get("data") or []
        if not data:
            raise ScholarNotFound(title)
        first = data[0]
        authors = tuple(
            a["name"] if isinstance(a, dict) else str(a) for a in first.get("authors") or []
        )
        if not authors or first.get("year") is None:
            raise ScholarNotFound(title)
        return ScholarRecord(
            claim_id=claim_id,
            title=str(first.get("title") or ""),
            authors=authors,
            year=int(first["year"]),
        )
