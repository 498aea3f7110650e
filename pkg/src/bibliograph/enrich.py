"""Knowledge-graph enrichment: batch DOI lookups against an HTTP works
endpoint with rate limiting, retries, and an on-disk response cache, plus
corpus-level application of the returned entities.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import requests

from .corpus import BibRecord, Corpus
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

API_BASE_ENV = "BIBLIOGRAPH_API_BASE"
CACHE_DIR_ENV = "BIBLIOGRAPH_CACHE_DIR"

REASON_NO_DOI = "no-doi"
REASON_NOT_FOUND = "not-found"
REASON_API_ERROR = "api-error"

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass
class ClientPolicy:
    max_in_flight: int = 4
    requests_per_second: float = 10.0
    max_retries: int = 3
    backoff_base: float = 0.5  # seconds; doubles per retry

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.requests_per_second <= 0:
            raise ValueError("requests_per_second must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backoff_base <= 0:
            raise ValueError("backoff_base must be positive")


@dataclass
class DoiLookup:
    status: str  # "ok" | "not-found" | "api-error"
    payload: dict | None = None
    retries: int = 0
    detail: str = ""


@dataclass
class EnrichmentReport:
    submitted: int = 0
    matched: int = 0
    missing: list[tuple[str, str]] = field(default_factory=list)  # (record_id, reason)

    def to_dict(self) -> dict:
        return {
            "submitted": self.submitted,
            "matched": self.matched,
            "missing": [{"record_id": r, "reason": why} for r, why in self.missing],
        }


class _RateLimiter:
    """Serializes request starts to at most requests_per_second."""

    def __init__(self, rps: float):
        self.interval = 1.0 / rps
        self.lock = threading.Lock()
        self.next_at = 0.0

    def wait(self) -> None:
        with self.lock:
            now = time.monotonic()
            delay = self.next_at - now
            self.next_at = max(now, self.next_at) + self.interval
        if delay > 0:
            time.sleep(delay)


def _cache_path(cache_dir: Path, doi: str) -> Path:
    return cache_dir / (urllib.parse.quote(doi, safe="") + ".json")


def _parse_payload(data: dict) -> dict:
    """Normalize a works payload to authors/affiliations/countries/fos.

    Accepts both the engine's plain shape and an OpenAlex-style shape with
    authorships/concepts.
    """
    if "authorships" in data or "concepts" in data:
        authors, affiliations, countries = [], [], []
        for authorship in data.get("authorships", []):
            name = (authorship.get("author") or {}).get("display_name")
            if name and name not in authors:
                authors.append(name)
            for inst in authorship.get("institutions", []):
                iname = inst.get("display_name")
                if iname and iname not in affiliations:
                    affiliations.append(iname)
                country = inst.get("country") or inst.get("country_code")
                if country and country not in countries:
                    countries.append(country)
        fos = [
            (c["display_name"], int(c.get("level", 0)))
            for c in data.get("concepts", [])
            if c.get("display_name")
        ]
        return {
            "authors": authors,
            "affiliations": affiliations,
            "countries": countries,
            "fos": fos,
        }
    fos = []
    for entry in data.get("fos") or []:
        if isinstance(entry, dict):
            fos.append((entry["tag"], int(entry.get("level", 0))))
        else:
            tag, level = entry
            fos.append((tag, int(level)))
    return {
        "authors": list(data.get("authors") or []),
        "affiliations": list(data.get("affiliations") or []),
        "countries": list(data.get("countries") or []),
        "fos": fos,
    }


def _fetch_one(
    session: requests.Session,
    base_url: str,
    doi: str,
    policy: ClientPolicy,
    limiter: _RateLimiter,
) -> DoiLookup:
    url = f"{base_url.rstrip('/')}/works/doi:{urllib.parse.quote(doi, safe='/')}"
    retries = 0
    detail = ""
    while True:
        limiter.wait()
        try:
            response = session.get(url, timeout=30)
        except requests.RequestException as exc:
            detail = f"request failed: {exc}"
            response = None
        if response is not None:
            if response.status_code == 200:
                try:
                    payload = _parse_payload(response.json())
                except (ValueError, KeyError, TypeError) as exc:
                    return DoiLookup(REASON_API_ERROR, retries=retries,
                                     detail=f"malformed payload: {exc}")
                return DoiLookup("ok", payload=payload, retries=retries)
            if response.status_code == 404:
                return DoiLookup(REASON_NOT_FOUND, retries=retries)
            detail = f"http {response.status_code}"
            if response.status_code not in _RETRYABLE_STATUS:
                return DoiLookup(REASON_API_ERROR, retries=retries, detail=detail)
        if retries >= policy.max_retries:
            return DoiLookup(REASON_API_ERROR, retries=retries, detail=detail)
        time.sleep(policy.backoff_base * (2 ** retries))
        retries += 1


def lookup_by_doi_batch(
    dois: list[str],
    policy: ClientPolicy | None = None,
    base_url: str | None = None,
    cache_dir: str | os.PathLike | None = None,
    session: requests.Session | None = None,
) -> dict[str, DoiLookup]:
    """Resolve each DOI to an entity payload, a not-found, or an api-error.

    Lookups run on a bounded worker pool under a shared rate limiter;
    transient failures retry with exponential backoff. Successful and
    not-found responses are cached on disk (one JSON file per DOI) so reruns
    are offline-reproducible.
    """
    policy = policy or ClientPolicy()
    if not dois:
        return {}
    base_url = base_url or os.environ.get(API_BASE_ENV)
    cache_dir = cache_dir or os.environ.get(CACHE_DIR_ENV)
    cache = Path(cache_dir) if cache_dir else None
    if cache:
        cache.mkdir(parents=True, exist_ok=True)

    results: dict[str, DoiLookup] = {}
    todo: list[str] = []
    for doi in sorted(set(dois)):
        hit = _cache_path(cache, doi) if cache else None
        if hit and hit.exists():
            stored = json.loads(hit.read_text(encoding="utf-8"))
            payload = stored.get("payload")
            if payload and "fos" in payload:
                payload["fos"] = [(t, int(l)) for t, l in payload["fos"]]
            results[doi] = DoiLookup(stored["status"], payload=payload)
        else:
            todo.append(doi)

    if todo:
        if not base_url:
            raise ConfigurationError(
                f"no API base url configured (argument or ${API_BASE_ENV})"
            )
        own_session = session is None
        session = session or requests.Session()
        limiter = _RateLimiter(policy.requests_per_second)
        try:
            with ThreadPoolExecutor(max_workers=policy.max_in_flight) as pool:
                fetched = pool.map(
                    lambda doi: (doi, _fetch_one(session, base_url, doi, policy, limiter)),
                    todo,
                )
                for doi, result in fetched:
                    results[doi] = result
                    if cache and result.status in ("ok", REASON_NOT_FOUND):
                        blob = {"status": result.status, "payload": result.payload}
                        _cache_path(cache, doi).write_text(
                            json.dumps(blob, ensure_ascii=False, sort_keys=True),
                            encoding="utf-8",
                        )
        finally:
            if own_session:
                session.close()
    return {doi: results[doi] for doi in sorted(results)}


def enrich_corpus(
    corpus: Corpus,
    policy: ClientPolicy | None = None,
    base_url: str | None = None,
    cache_dir: str | os.PathLike | None = None,
    drop_unmatched: bool = False,
    session: requests.Session | None = None,
) -> tuple[Corpus, EnrichmentReport]:
    """Attach authors/affiliations/countries/field tags to matched records.

    Unmatched records are kept (flagged in the report) unless
    ``drop_unmatched``; no other fields are ever modified.
    """
    report = EnrichmentReport(submitted=len(corpus))
    dois = sorted({r.doi for r in corpus if r.doi})
    lookups = lookup_by_doi_batch(dois, policy, base_url, cache_dir, session=session)

    enriched: list[BibRecord] = []
    for record in corpus:
        if not record.doi:
            report.missing.append((record.record_id, REASON_NO_DOI))
            if not drop_unmatched:
                enriched.append(record)
            continue
        result = lookups[record.doi]
        if result.status != "ok":
            reason = REASON_NOT_FOUND if result.status == REASON_NOT_FOUND else REASON_API_ERROR
            report.missing.append((record.record_id, reason))
            if not drop_unmatched:
                enriched.append(record)
            continue
        payload = result.payload or {}
        enriched.append(
            replace(
                record,
                authors=list(payload.get("authors", record.authors)),
                affiliations=list(payload.get("affiliations", record.affiliations)),
                countries=list(payload.get("countries", record.countries)),
                fos_tags=[(t, int(l)) for t, l in payload.get("fos", record.fos_tags)],
            )
        )
        report.matched += 1
    return Corpus(enriched), report
