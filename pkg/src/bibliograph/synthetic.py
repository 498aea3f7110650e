"""Deterministic synthetic fixtures: a small research corpus with topical
structure, planted-hierarchy networks, and drift/stationary streams. These
power the test suite, the demos, and offline end-to-end runs.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .corpus import BibRecord
from .network import CoocGraph, edge_key

FIELD_KEYWORDS = {
    "machine learning": [
        "neural networks", "deep learning", "classification", "feature learning",
        "model training", "transfer learning", "recommender systems", "image recognition",
    ],
    "data mining": [
        "information retrieval", "database systems", "data integration", "anomaly detection",
        "pattern mining", "text mining", "knowledge discovery", "stream processing",
    ],
    "computer networks": [
        "network protocols", "edge computing", "cloud computing", "distributed systems",
        "iot devices", "wireless networks", "network monitoring", "blockchain",
    ],
    "mathematics": [
        "optimization", "graph theory", "probability", "statistics",
        "linear algebra", "game theory", "numerical methods", "approximation",
    ],
}

PRINCIPLE_WORDS = [
    "privacy", "fairness", "security", "transparency", "accountability",
    "explainability", "reliability", "safety", "accessibility", "bias",
]

COUNTRIES = [
    "China", "United States", "India", "United Kingdom", "Germany",
    "Australia", "Canada", "France", "Japan", "Netherlands",
]

AFFILIATIONS = [
    "Institute of Computing", "National Research Centre", "Technical University",
    "State Key Laboratory", "School of Data Science", "Centre for AI Systems",
    "University College of Engineering", "Applied Informatics Lab",
    "Institute for Intelligent Systems", "Department of Computer Science",
    "Graduate School of Information", "Faculty of Mathematics",
]

JOURNALS = [
    "Journal of Intelligent Systems", "Knowledge Engineering Review",
    "Data Science Letters", "Computational Intelligence Quarterly",
]
CONFERENCES = [
    "International Conference on Learning Systems",
    "Symposium on Data Mining Applications",
    "Workshop on Network Intelligence",
]

_FIRST = ["Wei", "Ana", "John", "Priya", "Hiro", "Lena", "Omar", "Sofia", "Ivan", "Mary"]
_LAST = ["Zhang", "Silva", "Smith", "Patel", "Tanaka", "Weber", "Hassan", "Rossi",
         "Petrov", "Brown"]


def _authors(rng: random.Random) -> list[str]:
    n = rng.randint(1, 4)
    picks = rng.sample(range(len(_FIRST) * len(_LAST)), n)
    return [f"{_FIRST[p % len(_FIRST)]} {_LAST[p // len(_FIRST)]}" for p in picks]


def synth_rows(n: int = 500, seed: int = 13) -> list[dict]:
    """Rows in the jsonl ingestion schema for a corpus of ``n`` articles
    spread over four fields and the years 2015-2023."""
    rng = random.Random(seed)
    fields = list(FIELD_KEYWORDS)
    rows = []
    for i in range(n):
        field_name = fields[rng.randrange(len(fields))]
        pool = FIELD_KEYWORDS[field_name]
        keywords = rng.sample(pool, rng.randint(3, 5))
        principle = rng.choice(PRINCIPLE_WORDS)
        keywords.append(principle)
        # growth trend: later years more likely
        year = rng.choices(range(2015, 2024), weights=range(2, 11))[0]
        core = rng.random() < 0.08
        lead = "Responsible AI perspectives on" if core else f"A {principle} study of"
        title = f"{lead} {keywords[0]} and {keywords[1]}"
        abstract = (
            f"We investigate {keywords[0]} with {keywords[1]} in {field_name}, "
            f"addressing {principle} concerns for deployed systems."
        )
        if core:
            abstract += " Our responsible AI framework guides the design."
        conference = rng.random() < 0.4
        venue = rng.choice(CONFERENCES if conference else JOURNALS)
        fos = [
            {"tag": "computer science", "level": 0},
            {"tag": field_name, "level": 1},
            {"tag": keywords[0], "level": 2},
        ]
        rows.append(
            {
                "doi": None if rng.random() < 0.05 else f"10.5555/synth.{i:04d}",
                "title": title,
                "abstract": abstract,
                "keywords": keywords,
                "year": year,
                "venue": venue,
                "venue_type": "conference" if conference else "journal",
                "doc_type": "proceedings-paper" if conference else "article",
                "authors": _authors(rng),
                "affiliations": rng.sample(AFFILIATIONS, rng.randint(1, 2)),
                "countries": rng.sample(COUNTRIES, rng.randint(1, 2)),
                "fos": fos,
                "source": "scopus-like" if rng.random() < 0.6 else "wos-like",
            }
        )
    return rows


def write_jsonl(rows: list[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    return path


def mock_knowledge(rows: list[dict], coverage: float = 0.92, seed: int = 29) -> dict[str, dict]:
    """Works-endpoint payloads for most of the rows' DOIs, echoing each
    row's entities plus one extra affiliation so enrichment is observable."""
    rng = random.Random(seed)
    knowledge = {}
    for row in rows:
        doi = row.get("doi")
        if not doi or rng.random() > coverage:
            continue
        knowledge[doi.casefold()] = {
            "authors": row["authors"],
            "affiliations": row["affiliations"] + ["Open Knowledge Graph Consortium"],
            "countries": row["countries"],
            "fos": [{"tag": t["tag"], "level": t["level"]} for t in row["fos"]],
        }
    return knowledge


def two_source_batches(
    n_a: int = 60, n_b: int = 50, overlap: int = 15, seed: int = 7
) -> tuple[list[BibRecord], list[BibRecord]]:
    """Two parsed batches with ``overlap`` planted DOI duplicates across
    them; duplicated records differ in keyword sets so merges are visible."""
    assert overlap <= min(n_a, n_b)
    rng = random.Random(seed)
    rows = synth_rows(n_a + n_b - overlap, seed=seed)
    for i, row in enumerate(rows):
        row["doi"] = f"10.5555/dup.{i:04d}"  # every record keyed for the overlap plant

    def to_record(row: dict, source: str, ident: str) -> BibRecord:
        from .corpus import _record_from_json_obj

        row = dict(row)
        row["source"] = source
        return _record_from_json_obj(row, ident)

    batch_a = [to_record(rows[i], "scopus-like", f"a{i}") for i in range(n_a)]
    batch_b = []
    for j in range(n_b):
        if j < overlap:
            row = dict(rows[j])  # same DOI as batch A record j
            row["keywords"] = list(row["keywords"]) + [f"extra keyword {j}"]
        else:
            row = rows[n_a + j - overlap]
        batch_b.append(to_record(row, "wos-like", f"b{j}"))
    rng.shuffle(batch_b)
    return batch_a, batch_b


# ---------------------------------------------------------------------------
# Planted structures for network/tree tests

def planted_hierarchy(
    seed: int,
    supergroups: int = 2,
    subgroups: int = 2,
    group_size: int = 10,
    w_in: float = 10.0,
    w_mid: float = 3.0,
    w_out: float = 0.5,
    noise: float = 0.1,
) -> tuple[CoocGraph, dict[str, int], dict[str, int]]:
    """Complete weighted graph with a two-level community structure.

    Edge weights are w_in within a subgroup, w_mid across subgroups of the
    same supergroup, and w_out across supergroups, each jittered by a
    +-noise factor so density peaks exist. Returns the graph plus the
    planted level-1 (supergroup) and level-2 (subgroup) labels.
    """
    rng = random.Random(seed)
    labels1: dict[str, int] = {}
    labels2: dict[str, int] = {}
    nodes: dict[str, float] = {}
    for s in range(supergroups):
        for g in range(subgroups):
            for i in range(group_size):
                name = f"n{s}{g}{i:02d}"
                nodes[name] = 1.0
                labels1[name] = s
                labels2[name] = s * subgroups + g
    edges: dict[tuple[str, str], float] = {}
    names = sorted(nodes)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if labels2[a] == labels2[b]:
                base = w_in
            elif labels1[a] == labels1[b]:
                base = w_mid
            else:
                base = w_out
            edges[edge_key(a, b)] = base * rng.uniform(1 - noise, 1 + noise)
    return CoocGraph("term", nodes, edges), labels1, labels2


def two_cliques_bridge(
    clique_size: int = 10, bridge_weight: float = 0.1
) -> tuple[CoocGraph, str, str]:
    """Two unit-weight cliques joined by one weak edge; returns the graph and
    the two bridge endpoints (the designated density peaks)."""
    nodes: dict[str, float] = {}
    edges: dict[tuple[str, str], float] = {}
    for prefix in ("a", "b"):
        members = [f"{prefix}{i:02d}" for i in range(clique_size)]
        for m in members:
            nodes[m] = 1.0
        for i, x in enumerate(members):
            for y in members[i + 1 :]:
                edges[edge_key(x, y)] = 1.0
    edges[edge_key("a00", "b00")] = bridge_weight
    return CoocGraph("term", nodes, edges), "a00", "b00"


# ---------------------------------------------------------------------------
# Streams for evolution tests

def _stream_record(i: int, year: int, pool: list[str], rng: random.Random,
                   n_kw: int = 5) -> BibRecord:
    keywords = rng.sample(pool, n_kw)
    return BibRecord(
        record_id=f"s{i:04d}",
        title=f"{keywords[0]} and {keywords[1]} for applied analysis",
        doi=None,
        abstract=None,
        author_keywords=keywords,
        year=year,
        venue="Journal of Intelligent Systems",
        venue_type="journal",
        doc_type="article",
        source_dbs=frozenset(["scopus-like"]),
    )


VOCAB_A = [
    "neural networks", "deep learning", "classification", "optimization",
    "feature learning", "model training", "pattern mining", "statistics",
]
VOCAB_B = [
    "quantum circuits", "qubit mapping", "entanglement", "photonic gates",
    "superconducting devices", "quantum error", "annealing hardware", "cryogenics",
]


def stationary_stream(seed: int = 5, years: int = 4, per_year: int = 25) -> list[BibRecord]:
    """Same topical distribution every year: no novelty expected."""
    rng = random.Random(seed)
    out = []
    i = 0
    for year in range(2015, 2015 + years):
        for _ in range(per_year):
            out.append(_stream_record(i, year, VOCAB_A, rng))
            i += 1
    return out


def drift_stream(
    seed: int = 5, base_years: int = 2, per_year: int = 25, injected: int = 8
) -> tuple[list[BibRecord], int]:
    """Two stationary years followed by a year that injects ``injected``
    records from a disjoint vocabulary; returns (records, drift_year)."""
    rng = random.Random(seed)
    out = []
    i = 0
    for year in range(2015, 2015 + base_years):
        for _ in range(per_year):
            out.append(_stream_record(i, year, VOCAB_A, rng))
            i += 1
    drift_year = 2015 + base_years
    for _ in range(per_year - injected):
        out.append(_stream_record(i, drift_year, VOCAB_A, rng))
        i += 1
    for _ in range(injected):
        out.append(_stream_record(i, drift_year, VOCAB_B, rng))
        i += 1
    return out, drift_year


def random_cooc_graph(seed: int, max_nodes: int = 50, edge_prob: float = 0.3) -> CoocGraph:
    """Random weighted graph for oracle-style tests."""
    rng = random.Random(seed)
    n = rng.randint(2, max_nodes)
    names = [f"v{i:02d}" for i in range(n)]
    nodes = {v: float(rng.randint(1, 5)) for v in names}
    edges = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if rng.random() < edge_prob:
                edges[edge_key(a, b)] = rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])
    return CoocGraph("term", nodes, edges)
