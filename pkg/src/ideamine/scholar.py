"""Semantic Scholar search client with recorded fixtures and rate limiting.

Every live response is cached into the fixture store (keyed by the sha256
of the query), so a run can be replayed offline and the public API is hit
at most once per distinct query.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

from .errors import PreconditionError, ScholarUnavailable
from .storage import dump_json, load_json

SEARCH_URL = "https://api.semanticscholar.org/graph/v1/paper/search"
FIELDS = "title,abstract,year,externalIds"
API_KEY_ENV = "S2_API_KEY"


@dataclass
class PaperHit:
    title: str
    year: int | None = None
    abstract: str | None = None
    external_id: str = ""

    def __post_init__(self):
        if not self.title.strip():
            raise PreconditionError("paper hit needs a non-empty title")

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "year": self.year,
            "abstract": self.abstract,
            "external_id": self.external_id,
        }


class _RateLimiter:
    """Global min-interval gate shared by all client instances."""

    def __init__(self):
        self._lock = threading.Lock()
        self._last: float | None = None

    def acquire(self, min_interval: float, sleep=time.sleep, clock=time.monotonic) -> None:
        with self._lock:
            now = clock()
            if self._last is not None:
                wait = self._last + min_interval - now
                if wait > 0:
                    sleep(wait)
                    now = clock()
            self._last = now


_GLOBAL_LIMITER = _RateLimiter()


def query_key(query: str) -> str:
    return hashlib.sha256(query.encode("utf-8")).hexdigest()


def _parse_records(records: list, limit: int) -> list[PaperHit]:
    hits = []
    for r in records or []:
        title = (r.get("title") or "").strip()
        if not title:
            continue
        external = r.get("paperId") or ""
        if not external:
            ids = r.get("externalIds") or {}
            external = str(next(iter(ids.values()), ""))
        hits.append(
            PaperHit(
                title=title,
                year=r.get("year"),
                abstract=r.get("abstract"),
                external_id=external,
            )
        )
        if len(hits) >= limit:
            break
    return hits


class ScholarClient:
    def __init__(
        self,
        fixtures_dir: str | Path = "fixtures/scholar",
        offline: bool = False,
        requests_per_second: float = 1.0,
        max_retries: int = 2,
        transport: httpx.BaseTransport | None = None,
        sleep=time.sleep,
    ):
        self.fixtures_dir = Path(fixtures_dir)
        self.offline = offline
        self.min_interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
        self.max_retries = max_retries
        self._sleep = sleep
        self._client = httpx.Client(timeout=20.0, transport=transport)

    def _fixture_path(self, query: str) -> Path:
        return self.fixtures_dir / f"{query_key(query)}.json"

    def search(self, query: str, limit: int = 10) -> list[PaperHit]:
        if not query.strip():
            raise PreconditionError("query must be non-empty")
        if not (1 <= limit <= 100):
            raise PreconditionError("limit must be in [1, 100]")

        fixture = self._fixture_path(query)
        if fixture.exists():
            data = load_json(fixture)
            return _parse_records(data.get("data", []), limit)
        if self.offline:
            raise ScholarUnavailable(
                f"offline mode and no recorded fixture for query {query!r}"
            )
        data = self._fetch(query, limit)
        dump_json(fixture, {"query": query, "data": data.get("data", [])})
        return _parse_records(data.get("data", []), limit)

    def _fetch(self, query: str, limit: int) -> dict:
        headers = {}
        key = os.environ.get(API_KEY_ENV)
        if key:
            headers["x-api-key"] = key
        params = {"query": query, "limit": limit, "fields": FIELDS}
        delay = 1.0
        last_error = ""
        for _ in range(self.max_retries + 1):
            _GLOBAL_LIMITER.acquire(self.min_interval, sleep=self._sleep)
            try:
                resp = self._client.get(SEARCH_URL, params=params, headers=headers)
            except httpx.HTTPError as e:
                last_error = str(e)
            else:
                if resp.status_code == 200:
                    return resp.json()
                last_error = f"HTTP {resp.status_code}"
                if resp.status_code not in (429,) and resp.status_code < 500:
                    break  # permanent client error; retrying will not help
            self._sleep(delay)
            delay *= 2
        raise ScholarUnavailable(f"search failed for {query!r}: {last_error}")


def scholar_search(keywords: list[str], limit: int, client: ScholarClient) -> list[PaperHit]:
    """Search with the keywords joined into one space-separated query."""
    if not keywords or not any(k.strip() for k in keywords):
        raise PreconditionError("keywords must be non-empty")
    return client.search(" ".join(k.strip() for k in keywords if k.strip()), limit)
