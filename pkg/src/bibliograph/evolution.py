"""Topic evolution over a year-sliced document stream: each article joins its
most similar existing topic; articles too far from every centroid accumulate
into new descendant topics linked back to their predecessors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import BibRecord, Corpus
from .network import CoocGraph, edge_key, louvain_partition, Partition
from .textutil import content_tokens


@dataclass
class EvolutionParams:
    novelty_threshold: float = 0.35  # max cosine to any centroid that still counts as novel
    min_descendant_size: int = 5
    top_k_label: int = 5
    vocabulary_min_df: int = 2

    def __post_init__(self):
        if not 0 < self.novelty_threshold < 1:
            raise ValueError("novelty_threshold must be in (0, 1)")
        if self.min_descendant_size < 2:
            raise ValueError("min_descendant_size must be >= 2")


# ---------------------------------------------------------------------------
# Vectorization

def record_terms(record: BibRecord) -> list[str]:
    """Term occurrences of one record: keywords + field tags as whole
    phrases, plus stopword-filtered title unigrams."""
    terms = [k.casefold() for k in record.author_keywords]
    terms.extend(t.casefold() for t, _ in record.fos_tags)
    terms.extend(content_tokens(record.title))
    return terms


@dataclass
class Vocabulary:
    """Corpus-wide term index with inverse document frequencies frozen at
    stream start."""

    term_ids: dict[str, int]
    idf: np.ndarray

    @property
    def size(self) -> int:
        return len(self.term_ids)

    @classmethod
    def from_corpus(cls, corpus: Corpus | list[BibRecord], min_df: int = 2) -> "Vocabulary":
        df: dict[str, int] = {}
        n_docs = 0
        for record in corpus:
            n_docs += 1
            for term in set(record_terms(record)):
                df[term] = df.get(term, 0) + 1
        kept = sorted(t for t, d in df.items() if d >= min_df)
        term_ids = {t: i for i, t in enumerate(kept)}
        idf = np.array([math.log(n_docs / df[t]) for t in kept], dtype=float)
        return cls(term_ids, idf)


@dataclass
class DocVector:
    """Sparse TF-IDF vector; zero-weight entries are never stored."""

    entries: dict[int, float]
    norm: float

    @property
    def is_zero(self) -> bool:
        return self.norm == 0.0

    def dense(self, size: int) -> np.ndarray:
        v = np.zeros(size)
        for i, w in self.entries.items():
            v[i] = w
        return v


def vectorize_record(record: BibRecord, vocabulary: Vocabulary) -> DocVector:
    """TF-IDF vector of a record; out-of-vocabulary terms are ignored and a
    record with none in vocabulary yields the (flagged) zero vector."""
    tf: dict[int, float] = {}
    for term in record_terms(record):
        idx = vocabulary.term_ids.get(term)
        if idx is not None:
            tf[idx] = tf.get(idx, 0.0) + 1.0
    entries = {}
    for idx, count in tf.items():
        w = count * vocabulary.idf[idx]
        if w > 0:
            entries[idx] = float(w)
    norm = math.sqrt(sum(w * w for w in entries.values()))
    return DocVector(entries, norm)


def cosine(vec: DocVector, other: DocVector) -> float:
    if vec.is_zero or other.is_zero:
        return 0.0
    small, large = (vec, other) if len(vec.entries) <= len(other.entries) else (other, vec)
    dot = sum(w * large.entries.get(i, 0.0) for i, w in small.entries.items())
    return dot / (vec.norm * other.norm)


# ---------------------------------------------------------------------------
# Topics and the evolution graph

@dataclass
class Topic:
    topic_id: str
    members: list[str]
    birth_year: int
    centroid_sum: np.ndarray
    centroid_count: int

    @property
    def centroid(self) -> np.ndarray:
        if self.centroid_count == 0:
            return self.centroid_sum
        return self.centroid_sum / self.centroid_count

    def centroid_norm(self) -> float:
        return float(np.linalg.norm(self.centroid))

    def add_member(self, record_id: str, vector: DocVector) -> None:
        self.members.append(record_id)
        if not vector.is_zero:
            for i, w in vector.entries.items():
                self.centroid_sum[i] += w
            self.centroid_count += 1

    def label(self, vocabulary: Vocabulary, top_k: int) -> list[str]:
        c = self.centroid
        ranked = sorted(
            ((float(c[i]), t) for t, i in vocabulary.term_ids.items() if c[i] > 0),
            key=lambda p: (-p[0], p[1]),
        )
        return [t for _, t in ranked[:top_k]]


def centroid_cosine(a: Topic, b: Topic) -> float:
    na, nb = a.centroid_norm(), b.centroid_norm()
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a.centroid, b.centroid)) / (na * nb)


@dataclass
class EvolutionEdge:
    predecessor: str
    descendant: str
    weight: float


@dataclass
class EvolutionGraph:
    topics: list[Topic]
    edges: list[EvolutionEdge]
    labels: dict[str, list[str]]
    communities: Partition
    slice_stats: list[dict] = field(default_factory=list)
    excluded: list[str] = field(default_factory=list)  # records without a usable year
    vocabulary: Vocabulary | None = None

    def topic_by_id(self, topic_id: str) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)

    def to_dict(self) -> dict:
        return {
            "topics": [
                {
                    "topic_id": t.topic_id,
                    "members": list(t.members),
                    "birth_year": t.birth_year,
                    "size": len(t.members),
                    "label": self.labels.get(t.topic_id, []),
                    "community": self.communities.assignment.get(t.topic_id, 0),
                }
                for t in self.topics
            ],
            "edges": [
                {"predecessor": e.predecessor, "descendant": e.descendant, "weight": e.weight}
                for e in self.edges
            ],
            "modularity": self.communities.modularity,
            "slice_stats": self.slice_stats,
            "excluded": list(self.excluded),
        }

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Stream processing

def slice_stream(corpus: Corpus | list[BibRecord]) -> tuple[list[tuple[int, list[BibRecord]]], list[str]]:
    """Group records into ascending year slices; returns (slices, excluded
    record ids for records missing a year)."""
    by_year: dict[int, list[BibRecord]] = {}
    excluded: list[str] = []
    for record in corpus:
        if record.year is None:
            excluded.append(record.record_id)
        else:
            by_year.setdefault(record.year, []).append(record)
    slices = [(year, by_year[year]) for year in sorted(by_year)]
    return slices, excluded


def classify_record(vector: DocVector, topics: list[Topic]) -> tuple[str | None, float]:
    """Most similar topic by centroid cosine; (None, 0.0) when every
    similarity is zero (the orphan pool). Ties prefer the earlier-born,
    then lexicographically first topic."""
    if not topics:
        raise ValueError("topics must be non-empty")
    best_id, best_sim, best_key = None, 0.0, None
    for topic in topics:
        n = topic.centroid_norm()
        if n == 0 or vector.is_zero:
            sim = 0.0
        else:
            dot = sum(w * topic.centroid[i] for i, w in vector.entries.items())
            sim = dot / (vector.norm * n)
        key = (-sim, topic.birth_year, topic.topic_id)
        if best_key is None or key < best_key:
            best_id, best_sim, best_key = topic.topic_id, sim, key
    if best_sim <= 0.0:
        return None, 0.0
    return best_id, best_sim


def _threshold_clusters(
    items: list[tuple[str, DocVector]], threshold: float, seed: int
) -> list[list[str]]:
    """Cluster items by community detection on the graph connecting pairs
    with cosine >= threshold; isolated items become singleton clusters."""
    if not items:
        return []
    nodes = {rid: 1.0 for rid, _ in items}
    edges: dict[tuple[str, str], float] = {}
    for i, (rid_a, vec_a) in enumerate(items):
        for rid_b, vec_b in items[i + 1 :]:
            sim = cosine(vec_a, vec_b)
            if sim >= threshold and sim > 0:
                edges[edge_key(rid_a, rid_b)] = sim
    graph = CoocGraph("term", nodes, edges)
    partition = louvain_partition(graph, seed=seed)
    clusters: dict[int, list[str]] = {}
    for rid in sorted(partition.assignment):
        clusters.setdefault(partition.assignment[rid], []).append(rid)
    return [clusters[c] for c in sorted(clusters)]


def build_evolution_graph(
    corpus: Corpus | list[BibRecord],
    params: EvolutionParams | None = None,
    seed: int = 0,
) -> EvolutionGraph:
    """Run the year-sliced stream model over a corpus.

    The first slice bootstraps root topics by clustering its records; each
    later slice classifies records against the topics frozen at its start,
    collects sub-threshold (novel) records, clusters them, and promotes
    clusters of at least ``min_descendant_size`` to descendant topics wired
    to the predecessors their members were nearest to.
    """
    params = params or EvolutionParams()
    records = list(corpus)
    vocabulary = Vocabulary.from_corpus(records, params.vocabulary_min_df)
    vectors = {r.record_id: vectorize_record(r, vocabulary) for r in records}
    slices, excluded = slice_stream(records)

    topics: list[Topic] = []
    edges: list[EvolutionEdge] = []
    stats: list[dict] = []
    counter = 0

    def new_topic(member_ids: list[str], year: int) -> Topic:
        nonlocal counter
        counter += 1
        topic = Topic(
            topic_id=f"T{counter:04d}",
            members=[],
            birth_year=year,
            centroid_sum=np.zeros(vocabulary.size),
            centroid_count=0,
        )
        for rid in member_ids:
            topic.add_member(rid, vectors[rid])
        return topic

    def nearest_existing(vector: DocVector, pool: list[Topic]) -> str:
        # deterministic home for records orthogonal to every centroid
        tid, _ = classify_record(vector, pool)
        if tid is not None:
            return tid
        return min(pool, key=lambda t: (t.birth_year, t.topic_id)).topic_id

    for slice_index, (year, slice_records) in enumerate(slices):
        slice_records = sorted(slice_records, key=lambda r: r.record_id)
        if slice_index == 0 or not topics:
            items = [(r.record_id, vectors[r.record_id]) for r in slice_records]
            clusters = _threshold_clusters(items, params.novelty_threshold, seed)
            for cluster in clusters:
                topics.append(new_topic(cluster, year))
            stats.append(
                {"year": year, "records": len(slice_records), "novel": 0,
                 "new_topics": len(clusters)}
            )
            continue

        start_topics = list(topics)  # the frozen predecessor pool for this slice

        # classification pass against the slice-start topic set
        assigned: list[tuple[str, str]] = []  # (record_id, topic_id)
        candidates: list[tuple[str, str | None]] = []  # (record_id, nearest or None)
        for record in slice_records:
            vector = vectors[record.record_id]
            nearest, sim = classify_record(vector, start_topics)
            if nearest is None or sim < params.novelty_threshold:
                candidates.append((record.record_id, nearest))
            else:
                assigned.append((record.record_id, nearest))

        # batch update: ordinary members first
        by_topic = {t.topic_id: t for t in topics}
        for rid, tid in assigned:
            by_topic[tid].add_member(rid, vectors[rid])

        # novelty candidates cluster the same way the roots did
        nearest_of = dict(candidates)
        items = [(rid, vectors[rid]) for rid, _ in candidates]
        clusters = _threshold_clusters(items, params.novelty_threshold, seed)
        n_descendants = 0
        for cluster in clusters:
            if len(cluster) >= params.min_descendant_size:
                descendant = new_topic(cluster, year)
                predecessors = sorted(
                    {nearest_of[rid] for rid in cluster if nearest_of[rid] is not None}
                )
                if not predecessors:
                    # orphan-only cluster: wire it to the topic its centroid
                    # is closest to so the lineage stays connected
                    best_sim = max(centroid_cosine(descendant, t) for t in start_topics)
                    predecessors = [
                        min(
                            (t for t in start_topics
                             if centroid_cosine(descendant, t) == best_sim),
                            key=lambda t: (t.birth_year, t.topic_id),
                        ).topic_id
                    ]
                for pred_id in predecessors:
                    weight = centroid_cosine(descendant, by_topic[pred_id])
                    edges.append(
                        EvolutionEdge(pred_id, descendant.topic_id, max(0.0, min(1.0, weight)))
                    )
                topics.append(descendant)
                n_descendants += 1
            else:
                # fold undersized clusters back as ordinary members
                for rid in cluster:
                    tid = nearest_of[rid] or nearest_existing(vectors[rid], start_topics)
                    by_topic[tid].add_member(rid, vectors[rid])

        stats.append(
            {"year": year, "records": len(slice_records), "novel": len(candidates),
             "new_topics": n_descendants}
        )

    labels = {t.topic_id: t.label(vocabulary, params.top_k_label) for t in topics}
    communities = _topic_communities(topics, edges, seed)
    return EvolutionGraph(topics, edges, labels, communities, stats, excluded)


def _topic_communities(topics: list[Topic], edges: list[EvolutionEdge], seed: int) -> Partition:
    if not topics:
        return Partition({}, 0.0)
    nodes = {t.topic_id: float(max(1, len(t.members))) for t in topics}
    weights: dict[tuple[str, str], float] = {}
    for e in edges:
        if e.weight > 0 and e.predecessor != e.descendant:
            key = edge_key(e.predecessor, e.descendant)
            weights[key] = max(weights.get(key, 0.0), e.weight)
    graph = CoocGraph("term", nodes, weights)
    return louvain_partition(graph, seed=seed)


# ---------------------------------------------------------------------------
# View for exports

@dataclass
class EvolutionView:
    """Visual attributes: one row per topic (size proportional to member
    count, color from the community id) and one per edge."""

    nodes: list[dict]
    edges: list[dict]

    def rows(self) -> list[dict]:
        return self.nodes + self.edges


def evolution_view(graph: EvolutionGraph) -> EvolutionView:
    nodes = [
        {
            "kind": "topic",
            "id": t.topic_id,
            "label": "; ".join(graph.labels.get(t.topic_id, [])),
            "size": len(t.members),
            "color": graph.communities.assignment.get(t.topic_id, 0),
            "birth_year": t.birth_year,
        }
        for t in graph.topics
    ]
    edges = [
        {
            "kind": "edge",
            "source": e.predecessor,
            "target": e.descendant,
            "weight": e.weight,
        }
        for e in graph.edges
    ]
    return EvolutionView(nodes, edges)
