"""Weighted co-occurrence networks: construction from a corpus, shortest
topological distances, and modularity-based community detection.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, field
from itertools import combinations

from .corpus import BibRecord, Corpus
from .errors import ConfigurationError
from .textutil import content_tokens

UNITS = ("fos", "keyword", "author", "country", "venue", "term")

# Units whose labels are case-insensitive vocabulary rather than proper names.
_CASEFOLD_UNITS = {"fos", "keyword", "term"}


@dataclass
class CoocGraph:
    """Undirected weighted graph. ``nodes`` maps label -> document frequency,
    ``edges`` maps an (a, b) pair with a < b -> co-occurrence weight."""

    unit: str
    nodes: dict[str, float] = field(default_factory=dict)
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        self._adj: dict[str, dict[str, float]] | None = None

    def n_nodes(self) -> int:
        return len(self.nodes)

    def n_edges(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return sum(self.edges.values())

    def adjacency(self) -> dict[str, dict[str, float]]:
        if self._adj is None:
            adj: dict[str, dict[str, float]] = {v: {} for v in self.nodes}
            for (a, b), w in self.edges.items():
                adj[a][b] = w
                adj[b][a] = w
            self._adj = adj
        return self._adj

    def weighted_degree(self, node: str) -> float:
        return sum(self.adjacency()[node].values())

    def subgraph(self, members: set[str]) -> "CoocGraph":
        nodes = {v: f for v, f in self.nodes.items() if v in members}
        edges = {
            (a, b): w for (a, b), w in self.edges.items() if a in members and b in members
        }
        return CoocGraph(self.unit, nodes, edges)

    def to_dict(self) -> dict:
        return {
            "unit": self.unit,
            "nodes": {v: self.nodes[v] for v in sorted(self.nodes)},
            "edges": [[a, b, w] for (a, b), w in sorted(self.edges.items())],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoocGraph":
        edges = {(a, b): float(w) for a, b, w in d.get("edges", [])}
        return cls(d.get("unit", "term"), dict(d.get("nodes", {})), edges)

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "CoocGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Partition:
    assignment: dict[str, int]
    modularity: float

    def communities(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for node in sorted(self.assignment):
            out.setdefault(self.assignment[node], []).append(node)
        return out

    def to_dict(self) -> dict:
        return {
            "assignment": {v: self.assignment[v] for v in sorted(self.assignment)},
            "modularity": self.modularity,
        }


def edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# Construction

def record_units(record: BibRecord, unit: str) -> set[str]:
    """The set of unit labels one document contributes to the network."""
    if unit == "fos":
        return {t.casefold() for t, _ in record.fos_tags}
    if unit == "keyword":
        return {k.casefold() for k in record.author_keywords}
    if unit == "author":
        return set(record.authors)
    if unit == "country":
        return set(record.countries)
    if unit == "venue":
        return {record.venue} if record.venue else set()
    if unit == "term":
        terms = {k.casefold() for k in record.author_keywords}
        terms.update(t.casefold() for t, _ in record.fos_tags)
        terms.update(content_tokens(record.title))
        return terms
    raise ConfigurationError(f"unknown unit {unit!r}; expected one of {UNITS}")


def build_cooc_graph(
    corpus: Corpus | list[BibRecord],
    unit: str,
    min_node_freq: int = 1,
    min_edge_weight: float = 1,
) -> CoocGraph:
    """Document-level co-occurrence network over the chosen unit.

    Node frequency counts documents containing the unit; edge weight counts
    documents containing both endpoints. Filtering removes low-frequency
    nodes first, then light edges, then nodes orphaned by the edge removal
    (nodes that never had an edge are kept).
    """
    if unit not in UNITS:
        raise ConfigurationError(f"unknown unit {unit!r}; expected one of {UNITS}")
    freq: dict[str, float] = {}
    weight: dict[tuple[str, str], float] = {}
    for record in corpus:
        units = record_units(record, unit)
        for u in units:
            freq[u] = freq.get(u, 0) + 1
        for a, b in combinations(sorted(units), 2):
            weight[(a, b)] = weight.get((a, b), 0) + 1

    nodes = {v: f for v, f in freq.items() if f >= min_node_freq}
    kept_pairs = {e: w for e, w in weight.items() if e[0] in nodes and e[1] in nodes}
    edges = {e: w for e, w in kept_pairs.items() if w >= min_edge_weight}
    had_edge = {v for e in kept_pairs for v in e}
    lost_edge = had_edge - {v for e in edges for v in e}
    for v in lost_edge:
        del nodes[v]
    return CoocGraph(unit, nodes, edges)


def association_strength(graph: CoocGraph) -> CoocGraph:
    """Optional normalization: weight / (freq_a * freq_b)."""
    edges = {
        (a, b): w / (graph.nodes[a] * graph.nodes[b]) for (a, b), w in graph.edges.items()
    }
    return CoocGraph(graph.unit, dict(graph.nodes), edges)


# ---------------------------------------------------------------------------
# Distances

def _dijkstra(graph: CoocGraph, source: str) -> dict[str, float]:
    """Shortest-path lengths from ``source`` with per-edge length 1/weight."""
    adj = graph.adjacency()
    dist = {source: 0.0}
    done: set[str] = set()
    heap = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in adj[v].items():
            nd = d + 1.0 / w
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def topological_distance(graph: CoocGraph, a: str, b: str) -> float:
    """Shortest topological distance (strong ties are short); inf when
    disconnected."""
    if a not in graph.nodes or b not in graph.nodes:
        raise KeyError(f"node not in graph: {a if a not in graph.nodes else b}")
    if a == b:
        return 0.0
    return _dijkstra(graph, a).get(b, math.inf)


def distances_from(graph: CoocGraph, source: str) -> dict[str, float]:
    """All reachable distances from one node (single Dijkstra sweep)."""
    if source not in graph.nodes:
        raise KeyError(f"node not in graph: {source}")
    return _dijkstra(graph, source)


# ---------------------------------------------------------------------------
# Modularity and Louvain

def modularity(graph: CoocGraph, assignment: dict[str, int]) -> float:
    """Weighted Newman modularity of a node->community assignment."""
    missing = [v for v in graph.nodes if v not in assignment]
    if missing:
        raise ValueError(f"assignment does not cover nodes: {missing[:5]}")
    m = graph.total_weight()
    if m == 0:
        return 0.0
    degree = {v: graph.weighted_degree(v) for v in graph.nodes}
    internal: dict[int, float] = {}
    total: dict[int, float] = {}
    for v, c in assignment.items():
        if v in degree:
            total[c] = total.get(c, 0.0) + degree[v]
    for (a, b), w in graph.edges.items():
        if assignment[a] == assignment[b]:
            c = assignment[a]
            internal[c] = internal.get(c, 0.0) + 2 * w
    q = 0.0
    for c, tot in total.items():
        q += internal.get(c, 0.0) / (2 * m) - (tot / (2 * m)) ** 2
    return q


class _LouvainState:
    """One level of the greedy local-moving phase."""

    def __init__(self, adj: dict[str, dict[str, float]], loops: dict[str, float], m: float):
        self.adj = adj
        self.loops = loops
        self.m = m
        # degree includes self-loop weight twice (standard convention)
        self.degree = {
            v: sum(nbrs.values()) + 2 * loops.get(v, 0.0) for v, nbrs in adj.items()
        }
        self.comm = {v: i for i, v in enumerate(sorted(adj))}
        self.comm_tot = {self.comm[v]: self.degree[v] for v in adj}

    def move_phase(self, order: list[str]) -> bool:
        improved = False
        while True:
            moved = 0
            for v in order:
                current = self.comm[v]
                k_v = self.degree[v]
                self.comm_tot[current] -= k_v
                # weight from v to each neighbouring community
                links: dict[int, float] = {}
                for u, w in self.adj[v].items():
                    if u != v:
                        c = self.comm[u]
                        links[c] = links.get(c, 0.0) + w
                best_c, best_gain = current, 0.0
                base = links.get(current, 0.0) - self.comm_tot[current] * k_v / (2 * self.m)
                for c in sorted(links):
                    gain = links[c] - self.comm_tot[c] * k_v / (2 * self.m)
                    if gain - base > best_gain + 1e-12:
                        best_gain = gain - base
                        best_c = c
                self.comm[v] = best_c
                self.comm_tot[best_c] = self.comm_tot.get(best_c, 0.0) + k_v
                if best_c != current:
                    moved += 1
                    improved = True
            if moved == 0:
                return improved

    def aggregate(self) -> tuple[dict[str, dict[str, float]], dict[str, float], dict[str, str]]:
        """Collapse communities into super-nodes; returns (adj, loops, mapping)."""
        ids = sorted(set(self.comm.values()))
        rename = {c: str(i) for i, c in enumerate(ids)}
        new_adj: dict[str, dict[str, float]] = {rename[c]: {} for c in ids}
        new_loops: dict[str, float] = {}
        for v, nbrs in self.adj.items():
            cv = rename[self.comm[v]]
            for u, w in nbrs.items():
                cu = rename[self.comm[u]]
                if cv == cu:
                    # each undirected edge visited twice in adj
                    new_loops[cv] = new_loops.get(cv, 0.0) + w / 2
                else:
                    new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
        for v, w in self.loops.items():
            cv = rename[self.comm[v]]
            new_loops[cv] = new_loops.get(cv, 0.0) + w
        mapping = {v: rename[self.comm[v]] for v in self.adj}
        return new_adj, new_loops, mapping


def _louvain_once(graph: CoocGraph, rng: random.Random) -> dict[str, int]:
    """One full local-moving + aggregation run; returns node -> community."""
    adj: dict[str, dict[str, float]] = {
        v: dict(nbrs) for v, nbrs in graph.adjacency().items()
    }
    loops: dict[str, float] = {}
    m = graph.total_weight()
    membership = {v: v for v in graph.nodes}
    if m > 0:
        while len(adj) > 1:
            state = _LouvainState(adj, loops, m)
            order = sorted(adj)
            rng.shuffle(order)
            if not state.move_phase(order):
                break
            adj, loops, mapping = state.aggregate()
            membership = {v: mapping[lbl] for v, lbl in membership.items()}
    labels = sorted(set(membership.values()))
    rename = {lbl: i for i, lbl in enumerate(labels)}
    return {v: rename[lbl] for v, lbl in membership.items()}


_LOUVAIN_RESTARTS = 8


def louvain_partition(graph: CoocGraph, seed: int = 0) -> Partition:
    """Greedy modularity-maximizing partition (local moving + aggregation).

    Runs a handful of seeded restarts and keeps the best partition, which is
    deterministic for a fixed seed. Community ids are renumbered by first
    appearance in sorted-label order.
    """
    if graph.n_nodes() == 0:
        raise ValueError("graph has no nodes")
    best: tuple[dict[str, int], float] | None = None
    for restart in range(_LOUVAIN_RESTARTS):
        rng = random.Random(seed * 1_000_003 + restart)
        assignment = _louvain_once(graph, rng)
        q = modularity(graph, assignment)
        if best is None or q > best[1] + 1e-12:
            best = (assignment, q)
    assignment, q = best
    rename: dict[int, int] = {}
    for v in sorted(assignment):
        c = assignment[v]
        if c not in rename:
            rename[c] = len(rename)
    return Partition({v: rename[assignment[v]] for v in assignment}, q)
