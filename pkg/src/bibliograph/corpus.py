"""Bibliographic corpus handling: parsing, DOI normalization, merge/dedup,
cohort filtering, and search-string generation.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field

from .errors import ConfigurationError, InputFormatError

logger = logging.getLogger(__name__)

SOURCE_SCOPUS = "scopus-like"
SOURCE_WOS = "wos-like"
SOURCES = (SOURCE_SCOPUS, SOURCE_WOS)

VENUE_TYPES = ("journal", "conference", "unknown")
DOC_TYPES = ("article", "proceedings-paper", "other")

MIN_YEAR = 1900

# Search-string skeleton: responsibility-principle stems joined with OR.
DEFAULT_QUERY_STEMS = [
    "responsib*",
    "accountab*",
    "explainab*",
    "transparan*",
    "fair*",
    "intelligib*",
    "bias",
    "discriminat*",
    "reliab*",
    "safety",
    "privacy",
    "security",
    "inclusive*",
    "accessib*",
]


@dataclass
class BibRecord:
    """One publication. ``fos_tags`` holds (tag, level) pairs from a
    hierarchical field-of-study system; ``source_dbs`` records provenance."""

    record_id: str
    title: str
    doi: str | None = None
    abstract: str | None = None
    author_keywords: list[str] = field(default_factory=list)
    year: int | None = None
    venue: str = ""
    venue_type: str = "unknown"
    doc_type: str = "other"
    authors: list[str] = field(default_factory=list)
    affiliations: list[str] = field(default_factory=list)
    countries: list[str] = field(default_factory=list)
    fos_tags: list[tuple[str, int]] = field(default_factory=list)
    source_dbs: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        d = {
            "record_id": self.record_id,
            "title": self.title,
            "doi": self.doi,
            "abstract": self.abstract,
            "author_keywords": list(self.author_keywords),
            "year": self.year,
            "venue": self.venue,
            "venue_type": self.venue_type,
            "doc_type": self.doc_type,
            "authors": list(self.authors),
            "affiliations": list(self.affiliations),
            "countries": list(self.countries),
            "fos_tags": [[t, l] for t, l in self.fos_tags],
            "source_dbs": sorted(self.source_dbs),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BibRecord":
        return cls(
            record_id=d["record_id"],
            title=d["title"],
            doi=d.get("doi"),
            abstract=d.get("abstract"),
            author_keywords=list(d.get("author_keywords", [])),
            year=d.get("year"),
            venue=d.get("venue", ""),
            venue_type=d.get("venue_type", "unknown"),
            doc_type=d.get("doc_type", "other"),
            authors=list(d.get("authors", [])),
            affiliations=list(d.get("affiliations", [])),
            countries=list(d.get("countries", [])),
            fos_tags=[(t, int(l)) for t, l in d.get("fos_tags", [])],
            source_dbs=frozenset(d.get("source_dbs", [])),
        )


@dataclass
class Corpus:
    """An immutable-by-convention collection of deduplicated records."""

    records: list[BibRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by_id(self, record_id: str) -> BibRecord:
        for r in self.records:
            if r.record_id == record_id:
                return r
        raise KeyError(record_id)

    def to_dict(self) -> dict:
        return {"records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d: dict) -> "Corpus":
        return cls([BibRecord.from_dict(r) for r in d.get("records", [])])

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "Corpus":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class IngestReport:
    raw_counts: dict[str, int] = field(default_factory=dict)
    merged_count: int = 0
    duplicate_pairs: int = 0
    missing_doi: int = 0

    def to_dict(self) -> dict:
        return {
            "raw_counts": dict(sorted(self.raw_counts.items())),
            "merged_count": self.merged_count,
            "duplicate_pairs": self.duplicate_pairs,
            "missing_doi": self.missing_doi,
        }


@dataclass
class ParseResult:
    """Parsed records plus the rows that could not be used."""

    records: list[BibRecord]
    skipped: list[dict]

    def skip_report(self) -> dict:
        return {"parsed": len(self.records), "skipped": self.skipped}


# ---------------------------------------------------------------------------
# DOI normalization

_DOI_PREFIX_RE = re.compile(
    r"^(?:https?://)?(?:dx\.)?doi\.org/|^doi:\s*", re.IGNORECASE
)
_DOI_SHAPE_RE = re.compile(r"^10\.\d+/\S+$")


def normalize_doi(raw: str | None) -> str | None:
    """Canonical lowercase DOI, or None when the input has no DOI shape."""
    if not raw:
        return None
    doi = _DOI_PREFIX_RE.sub("", raw.strip()).strip().casefold()
    if not _DOI_SHAPE_RE.match(doi):
        return None
    return doi


# ---------------------------------------------------------------------------
# Parsing

# Column maps for the two CSV dialects. Keys are our field names, values the
# export's header names; unknown columns in a file are ignored.
SCOPUS_CSV_COLUMNS = {
    "title": "Title",
    "abstract": "Abstract",
    "keywords": "Author Keywords",
    "year": "Year",
    "venue": "Source title",
    "doi": "DOI",
    "authors": "Authors",
    "affiliations": "Affiliations",
    "doc_type": "Document Type",
}

WOS_CSV_COLUMNS = {
    "title": "TI",
    "abstract": "AB",
    "keywords": "DE",
    "year": "PY",
    "venue": "SO",
    "doi": "DI",
    "authors": "AU",
    "affiliations": "C1",
    "doc_type": "DT",
}

LIST_SEPARATOR = ";"

DIALECTS = ("scopus-like-csv", "wos-like-csv", "jsonl")

_CONFERENCE_HINTS = ("conference", "proceeding", "symposium", "workshop")


def _classify_doc_type(raw: str) -> tuple[str, str]:
    """(doc_type, venue_type) inferred from an export's document-type text."""
    low = (raw or "").casefold()
    if any(h in low for h in _CONFERENCE_HINTS):
        return "proceedings-paper", "conference"
    if "article" in low or "journal" in low:
        return "article", "journal"
    return "other", "unknown"


def _clean_year(value) -> int | None:
    try:
        year = int(str(value).strip())
    except (TypeError, ValueError):
        return None
    if year < MIN_YEAR or year > datetime.date.today().year + 1:
        return None
    return year


def _split_list(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [part.strip() for part in raw.split(LIST_SEPARATOR) if part.strip()]


def _record_from_json_obj(obj: dict, record_id: str) -> BibRecord:
    title = obj.get("title")
    if not title:
        raise ValueError("missing title")
    source = obj.get("source", SOURCE_SCOPUS)
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}")
    venue_type = obj.get("venue_type", "unknown")
    if venue_type not in VENUE_TYPES:
        venue_type = "unknown"
    doc_type = obj.get("doc_type", "other")
    if doc_type not in DOC_TYPES:
        doc_type = "other"
    return BibRecord(
        record_id=record_id,
        title=str(title),
        doi=normalize_doi(obj.get("doi")),
        abstract=obj.get("abstract") or None,
        author_keywords=[str(k) for k in obj.get("keywords") or []],
        year=_clean_year(obj.get("year")),
        venue=str(obj.get("venue") or ""),
        venue_type=venue_type,
        doc_type=doc_type,
        authors=[str(a) for a in obj.get("authors") or []],
        affiliations=[str(a) for a in obj.get("affiliations") or []],
        countries=[str(c) for c in obj.get("countries") or []],
        fos_tags=[(str(t["tag"]), int(t["level"])) for t in obj.get("fos") or []],
        source_dbs=frozenset([source]),
    )


def _record_from_csv_row(row: dict, columns: dict, source: str, record_id: str) -> BibRecord:
    def col(name):
        return row.get(columns[name]) or None

    title = col("title")
    if not title:
        raise ValueError("missing title")
    doc_type, venue_type = _classify_doc_type(col("doc_type") or "")
    return BibRecord(
        record_id=record_id,
        title=title.strip(),
        doi=normalize_doi(col("doi")),
        abstract=col("abstract"),
        author_keywords=_split_list(col("keywords")),
        year=_clean_year(col("year")),
        venue=(col("venue") or "").strip(),
        venue_type=venue_type,
        doc_type=doc_type,
        authors=_split_list(col("authors")),
        affiliations=_split_list(col("affiliations")),
        source_dbs=frozenset([source]),
    )


def parse_records(path, dialect: str) -> ParseResult:
    """Parse one export file into records.

    Unparseable rows are collected in the result's skip list instead of
    aborting; the file is rejected with :class:`InputFormatError` only when
    more than half of its data rows are unusable.
    """
    if dialect not in DIALECTS:
        raise ConfigurationError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")

    records: list[BibRecord] = []
    skipped: list[dict] = []
    stem = hashlib.sha1(str(path).encode("utf-8")).hexdigest()[:8]

    if dialect == "jsonl":
        with open(path, encoding="utf-8") as fh:
            rows = [line for line in fh]
        n_data = 0
        for i, line in enumerate(rows, start=1):
            if not line.strip():
                continue
            n_data += 1
            try:
                obj = json.loads(line)
                records.append(_record_from_json_obj(obj, f"{stem}-{i}"))
            except (ValueError, KeyError, TypeError) as exc:
                skipped.append({"line": i, "reason": str(exc)})
    else:
        source = SOURCE_SCOPUS if dialect == "scopus-like-csv" else SOURCE_WOS
        columns = SCOPUS_CSV_COLUMNS if dialect == "scopus-like-csv" else WOS_CSV_COLUMNS
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            n_data = 0
            for i, row in enumerate(reader, start=2):  # header is line 1
                n_data += 1
                try:
                    records.append(_record_from_csv_row(row, columns, source, f"{stem}-{i}"))
                except (ValueError, KeyError, TypeError) as exc:
                    skipped.append({"line": i, "reason": str(exc)})

    if n_data and len(skipped) * 2 > n_data:
        raise InputFormatError(
            f"{path}: {len(skipped)}/{n_data} rows unparseable; wrong dialect?"
        )
    return ParseResult(records, skipped)


# ---------------------------------------------------------------------------
# Merge / dedup

def _dedup_key(record: BibRecord) -> tuple[str, str]:
    if record.doi:
        return ("doi", record.doi)
    return ("title-year", f"{record.title.casefold().strip()}|{record.year}")


def _canonical_sort_key(record: BibRecord) -> str:
    # Batch-order-independent ordering of a duplicate group's members, so the
    # field-merge below is insensitive to which batch arrived first.
    d = record.to_dict()
    d.pop("record_id")
    return json.dumps(d, sort_keys=True, ensure_ascii=False)


def _merged_record_id(key: tuple[str, str]) -> str:
    return "b" + hashlib.sha1("|".join(key).encode("utf-8")).hexdigest()[:12]


def _union(lists: list[list]) -> list:
    out, seen = [], set()
    for lst in lists:
        for item in lst:
            marker = item if not isinstance(item, list) else tuple(item)
            if marker not in seen:
                seen.add(marker)
                out.append(item)
    return out


def _merge_group(key: tuple[str, str], group: list[BibRecord]) -> BibRecord:
    group = sorted(group, key=_canonical_sort_key)
    first = group[0]
    years = [r.year for r in group if r.year is not None]
    if len(set(years)) > 1:
        logger.warning(
            "year conflict for %s: %s; keeping earliest", key[1], sorted(set(years))
        )
    abstract = max(
        (r.abstract for r in group if r.abstract), key=lambda a: (len(a), a), default=None
    )
    scalar = lambda vals, absent: next((v for v in vals if v and v != absent), absent)
    return BibRecord(
        record_id=_merged_record_id(key),
        title=first.title,
        doi=first.doi,
        abstract=abstract,
        author_keywords=_union([r.author_keywords for r in group]),
        year=min(years) if years else None,
        venue=scalar([r.venue for r in group], ""),
        venue_type=scalar([r.venue_type for r in group], "unknown"),
        doc_type=scalar([r.doc_type for r in group], "other"),
        authors=_union([r.authors for r in group]),
        affiliations=_union([r.affiliations for r in group]),
        countries=_union([r.countries for r in group]),
        fos_tags=_union([r.fos_tags for r in group]),
        source_dbs=frozenset().union(*[r.source_dbs for r in group]),
    )


def merge_dedup(batches: list[list[BibRecord]]) -> tuple[Corpus, IngestReport]:
    """Fold parsed batches into one deduplicated corpus.

    Records sharing a normalized DOI merge; records without a DOI merge on an
    exact (casefolded title, year) match. Merged ids derive from the dedup
    key, so the result is stable across batch permutations.
    """
    raw_counts: dict[str, int] = {}
    groups: dict[tuple[str, str], list[BibRecord]] = {}
    total = 0
    for batch in batches:
        for record in batch:
            total += 1
            source = min(record.source_dbs) if record.source_dbs else "unknown"
            raw_counts[source] = raw_counts.get(source, 0) + 1
            groups.setdefault(_dedup_key(record), []).append(record)

    merged = [_merge_group(key, group) for key, group in groups.items()]
    merged.sort(key=lambda r: (_dedup_key(r), r.record_id))
    report = IngestReport(
        raw_counts=raw_counts,
        merged_count=len(merged),
        duplicate_pairs=total - len(merged),
        missing_doi=sum(1 for r in merged if r.doi is None),
    )
    return Corpus(merged), report


# ---------------------------------------------------------------------------
# Cohort filtering and search strings

def filter_core_cohort(corpus: Corpus, phrases: list[str]) -> Corpus:
    """Records whose title, abstract, or any keyword contains one of the
    phrases as a case-insensitive contiguous substring."""
    if not phrases:
        raise ValueError("phrases must be non-empty")
    needles = [p.casefold() for p in phrases]

    def matches(record: BibRecord) -> bool:
        haystacks = [record.title, record.abstract or "", *record.author_keywords]
        return any(n in h.casefold() for n in needles for h in haystacks)

    return Corpus([r for r in corpus.records if matches(r)])


DEFAULT_COHORT_PHRASES = ["responsible artificial intelligence", "responsible ai"]


def build_search_query(principle_stems: list[str] | None = None) -> str:
    """OR-joined search skeleton over responsibility-principle stems."""
    stems = DEFAULT_QUERY_STEMS if principle_stems is None else principle_stems
    if not stems:
        raise ValueError("stems must be non-empty")
    return " OR ".join(stems)
