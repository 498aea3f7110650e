"""Descriptive portraits: responsibility-principle tagging, entity rankings,
publication trends, principle-by-technique interplay, and keyphrase
extraction for core-cohort co-term maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import BibRecord, Corpus
from .textutil import ngrams_within_stopword_boundaries, tokenize

# The thirteen responsibility principles with their match stems. Stems match
# case-insensitively at the start of a token, mirroring the wildcard search
# skeleton (note the retained "transparan" spelling alongside "transparen").
DEFAULT_PRINCIPLES: list[tuple[str, list[str]]] = [
    ("accountability", ["accountab"]),
    ("explainability", ["explainab"]),
    ("transparency", ["transparan", "transparen"]),
    ("fairness", ["fair"]),
    ("intelligibility", ["intelligib"]),
    ("unbiased", ["bias", "unbiased"]),
    ("non-discrimination", ["discriminat"]),
    ("reliability", ["reliab"]),
    ("safety", ["safety"]),
    ("privacy", ["privacy"]),
    ("security", ["security"]),
    ("inclusiveness", ["inclusive"]),
    ("accessibility", ["accessib"]),
]


@dataclass
class PrincipleLexicon:
    principles: list[tuple[str, list[str]]] = field(
        default_factory=lambda: [(n, list(s)) for n, s in DEFAULT_PRINCIPLES]
    )

    def __post_init__(self):
        names = [n for n, _ in self.principles]
        if len(set(names)) != len(names):
            raise ValueError("principle names must be unique")
        if any(not stems for _, stems in self.principles):
            raise ValueError("every principle needs at least one stem")

    def names(self) -> list[str]:
        return [n for n, _ in self.principles]

    def with_overrides(self, overrides: dict[str, list[str]]) -> "PrincipleLexicon":
        merged = [(n, overrides.get(n, stems)) for n, stems in self.principles]
        for name, stems in overrides.items():
            if name not in dict(merged):
                merged.append((name, stems))
        return PrincipleLexicon(merged)


def tag_principles(
    record: BibRecord,
    lexicon: PrincipleLexicon | None = None,
    include_abstract: bool = False,
) -> set[str]:
    """Principles whose stems prefix-match a token of the title or any
    keyword (and the abstract when ``include_abstract``)."""
    lexicon = lexicon or PrincipleLexicon()
    texts = [record.title, *record.author_keywords]
    if include_abstract and record.abstract:
        texts.append(record.abstract)
    tokens = {t for text in texts for t in tokenize(text)}
    found = set()
    for name, stems in lexicon.principles:
        if any(tok.startswith(stem) for stem in stems for tok in tokens):
            found.add(name)
    return found


# ---------------------------------------------------------------------------
# Rankings and trends

RANK_KINDS = ("country", "institution", "venue", "author", "fos")


@dataclass
class RankTable:
    kind: str
    rows: list[tuple[str, int]]
    shares: list[float]  # per-row share of all entity mentions

    def to_rows(self) -> list[dict]:
        return [
            {"rank": i + 1, "name": name, "count": count, "share": share}
            for i, ((name, count), share) in enumerate(zip(self.rows, self.shares))
        ]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rows": [[n, c] for n, c in self.rows],
                "shares": list(self.shares)}

    @classmethod
    def from_dict(cls, d: dict) -> "RankTable":
        return cls(d["kind"], [(n, int(c)) for n, c in d["rows"]], list(d["shares"]))


def _entities(record: BibRecord, kind: str) -> set[str]:
    if kind == "country":
        return set(record.countries)
    if kind == "institution":
        return set(record.affiliations)
    if kind == "venue":
        return {record.venue} if record.venue else set()
    if kind == "author":
        return set(record.authors)
    if kind == "fos":
        return {t.casefold() for t, _ in record.fos_tags}
    raise ValueError(f"unknown rank kind {kind!r}; expected one of {RANK_KINDS}")


def rank_entities(corpus: Corpus | list[BibRecord], kind: str, top_n: int | None = None) -> RankTable:
    """Most productive entities by full counting (a document credits each of
    its entities once). Shares are fractions of all entity mentions, so a
    table's shares always sum to at most 1."""
    counts: dict[str, int] = {}
    for record in corpus:
        for entity in _entities(record, kind):
            counts[entity] = counts.get(entity, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if top_n is not None:
        ranked = ranked[:top_n]
    total = sum(counts.values())
    shares = [count / total if total else 0.0 for _, count in ranked]
    return RankTable(kind, ranked, shares)


def publication_trend(corpus: Corpus | list[BibRecord]) -> list[tuple[int, int]]:
    """Yearly publication counts, zero-filled between the corpus min and max
    year; records without a year are not counted."""
    counts: dict[int, int] = {}
    for record in corpus:
        if record.year is not None:
            counts[record.year] = counts.get(record.year, 0) + 1
    if not counts:
        return []
    lo, hi = min(counts), max(counts)
    return [(year, counts.get(year, 0)) for year in range(lo, hi + 1)]


# ---------------------------------------------------------------------------
# Principle x technique interplay

@dataclass
class InterplayMatrix:
    principles: list[str]
    techniques: list[str]
    counts: list[list[int]]
    row_shares: list[list[float]]

    def cell(self, principle: str, technique: str) -> tuple[int, float]:
        i = self.principles.index(principle)
        j = self.techniques.index(technique)
        return self.counts[i][j], self.row_shares[i][j]

    def chord_rows(self) -> list[dict]:
        """(source, target, value) rows for circular-plot tools."""
        out = []
        for i, principle in enumerate(self.principles):
            for j, technique in enumerate(self.techniques):
                if self.counts[i][j]:
                    out.append(
                        {"source": principle, "target": technique, "value": self.counts[i][j]}
                    )
        return out

    def to_dict(self) -> dict:
        return {"principles": self.principles, "techniques": self.techniques,
                "counts": self.counts, "row_shares": self.row_shares}

    @classmethod
    def from_dict(cls, d: dict) -> "InterplayMatrix":
        return cls(list(d["principles"]), list(d["techniques"]),
                   [list(map(int, row)) for row in d["counts"]],
                   [list(map(float, row)) for row in d["row_shares"]])


def default_technique_tags(corpus: Corpus | list[BibRecord], level: int = 1) -> list[str]:
    """Technique vocabulary: the field-of-study tags at the given level that
    occur in the corpus."""
    tags = {t.casefold() for r in corpus for t, l in r.fos_tags if l == level}
    return sorted(tags)


def build_interplay(
    corpus: Corpus | list[BibRecord],
    lexicon: PrincipleLexicon | None = None,
    technique_tags: list[str] | None = None,
    include_abstract: bool = False,
) -> InterplayMatrix:
    """Cross-tabulate responsibility principles against technique tags.

    counts[i][j] = documents tagged with principle i and carrying technique
    tag j; row_shares normalizes each principle row to sum to 1 (all-zero
    rows stay zero).
    """
    lexicon = lexicon or PrincipleLexicon()
    records = list(corpus)
    if technique_tags is None:
        technique_tags = default_technique_tags(records)
    if not technique_tags:
        raise ValueError("technique_tags must be non-empty")
    techniques = [t.casefold() for t in technique_tags]
    principles = lexicon.names()
    counts = [[0] * len(techniques) for _ in principles]
    for record in records:
        tagged = tag_principles(record, lexicon, include_abstract)
        if not tagged:
            continue
        doc_tags = {t.casefold() for t, _ in record.fos_tags}
        for i, principle in enumerate(principles):
            if principle not in tagged:
                continue
            for j, technique in enumerate(techniques):
                if technique in doc_tags:
                    counts[i][j] += 1
    row_shares = []
    for row in counts:
        total = sum(row)
        row_shares.append([c / total for c in row] if total else [0.0] * len(row))
    return InterplayMatrix(principles, techniques, counts, row_shares)


# ---------------------------------------------------------------------------
# Keyphrase extraction

def _candidate_stats(records: list[BibRecord], max_n: int = 3) -> tuple[dict[str, int], list[dict[str, int]]]:
    """Document frequency and per-document term frequency of n-gram
    candidates drawn from titles and abstracts."""
    doc_tfs: list[dict[str, int]] = []
    df: dict[str, int] = {}
    for record in records:
        text = record.title
        if record.abstract:
            text = f"{text}. {record.abstract}"
        tf: dict[str, int] = {}
        for gram in ngrams_within_stopword_boundaries(text, max_n):
            tf[gram] = tf.get(gram, 0) + 1
        doc_tfs.append(tf)
        for gram in tf:
            df[gram] = df.get(gram, 0) + 1
    return df, doc_tfs


def tfidf_sum_scorer(candidates: list[str], records: list[BibRecord]) -> dict[str, float]:
    """Default corpus-statistical scorer: sum of TF-IDF over the cohort."""
    df, doc_tfs = _candidate_stats(records)
    n = len(records)
    scores = {}
    for term in candidates:
        idf = math.log((1 + n) / (1 + df.get(term, 0))) + 1
        scores[term] = sum(tf.get(term, 0) for tf in doc_tfs) * idf
    return scores


class EmbeddingScorer:
    """Scorer ranking candidates by similarity to the cohort centroid in an
    external embedding space; ``embed`` maps a list of texts to vectors."""

    def __init__(self, embed):
        self.embed = embed

    def __call__(self, candidates: list[str], records: list[BibRecord]) -> dict[str, float]:
        docs = [r.title + (" " + r.abstract if r.abstract else "") for r in records]
        doc_vecs = self.embed(docs)
        centroid = [sum(col) / len(doc_vecs) for col in zip(*doc_vecs)]
        cand_vecs = self.embed(candidates)
        scores = {}
        c_norm = math.sqrt(sum(x * x for x in centroid))
        for term, vec in zip(candidates, cand_vecs):
            norm = math.sqrt(sum(x * x for x in vec))
            if norm == 0 or c_norm == 0:
                scores[term] = 0.0
            else:
                scores[term] = sum(a * b for a, b in zip(vec, centroid)) / (norm * c_norm)
        return scores


def extract_keyphrases(
    cohort: Corpus | list[BibRecord],
    k: int,
    scorer=None,
) -> list[tuple[str, float]]:
    """Top-k 1-3 word keyphrases from cohort titles and abstracts.

    Candidates must appear in at least two documents (or one when the cohort
    is a single document); ties break on term order so results are
    deterministic under the default scorer.
    """
    records = list(cohort)
    if not records:
        raise ValueError("cohort must be non-empty")
    if k <= 0:
        raise ValueError("k must be positive")
    df, _ = _candidate_stats(records)
    min_df = min(2, len(records))
    candidates = sorted(t for t, d in df.items() if d >= min_df)
    if not candidates:
        return []
    scorer = scorer or tfidf_sum_scorer
    scores = scorer(candidates, records)
    ranked = sorted(candidates, key=lambda t: (-scores.get(t, 0.0), t))
    return [(t, float(scores.get(t, 0.0))) for t in ranked[:k]]
