"""Hierarchical topic tree: density-peak anchor detection on a weighted
co-occurrence network, nearest-anchor membership, and recursive subdivision
until no anchors remain.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .network import CoocGraph, distances_from

UNASSIGNED = "unassigned"


@dataclass
class TreeParams:
    density_mode: str = "weighted-degree"
    gamma_z: float = 2.0  # anchor threshold, in stdevs above the mean score
    min_community_size: int = 5
    max_depth: int = 4
    degeneracy_epsilon: float = 1e-9

    def __post_init__(self):
        if self.density_mode != "weighted-degree":
            raise ValueError(f"unsupported density_mode {self.density_mode!r}")
        if self.min_community_size < 2:
            raise ValueError("min_community_size must be >= 2")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass
class AnchorScores:
    density: dict[str, float]
    delta: dict[str, float]
    gamma: dict[str, float]


@dataclass
class TreeNode:
    anchor: str
    members: set[str]
    depth: int
    children: list["TreeNode"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor,
            "members": sorted(self.members),
            "depth": self.depth,
            "children": [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        return cls(
            anchor=d["anchor"],
            members=set(d["members"]),
            depth=d["depth"],
            children=[cls.from_dict(c) for c in d.get("children", [])],
        )


@dataclass
class TopicTree:
    """Depth-1 communities of the whole graph, each recursively subdivided.
    The root (whole graph) is implicit; an empty ``nodes`` list means the
    graph never produced anchors."""

    nodes: list[TreeNode] = field(default_factory=list)
    unassigned: set[str] = field(default_factory=set)

    def walk(self):
        stack = list(self.nodes)
        while stack:
            node = stack.pop(0)
            yield node
            stack = node.children + stack

    def level_assignment(self, depth: int) -> dict[str, str]:
        """node label -> anchor of the deepest containing community at or
        above ``depth`` (hierarchical flattening)."""
        out: dict[str, str] = {}
        for node in self.walk():
            if node.depth <= depth:
                for member in node.members:
                    out[member] = node.anchor
        return out

    def to_dict(self) -> dict:
        return {
            "communities": [n.to_dict() for n in self.nodes],
            "unassigned": sorted(self.unassigned),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TopicTree":
        return cls(
            nodes=[TreeNode.from_dict(n) for n in d.get("communities", [])],
            unassigned=set(d.get("unassigned", [])),
        )

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "TopicTree":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save_csv(self, path) -> None:
        """Flat (node, anchor, depth, parent-anchor) rows for spreadsheets."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["node", "anchor", "depth", "parent_anchor"])

            def emit(node: TreeNode, parent: str):
                for member in sorted(node.members):
                    writer.writerow([member, node.anchor, node.depth, parent])
                for child in node.children:
                    emit(child, node.anchor)

            for top in self.nodes:
                emit(top, "")


# ---------------------------------------------------------------------------
# Density-peak scores

def compute_density(graph: CoocGraph) -> dict[str, float]:
    """Local density of each node: its weighted degree."""
    return {v: graph.weighted_degree(v) for v in graph.nodes}


def _is_denser(density: dict[str, float], u: str, v: str) -> bool:
    # ties broken by label so exactly one global peak exists
    return density[u] > density[v] or (density[u] == density[v] and u < v)


def compute_delta(graph: CoocGraph, density: dict[str, float]) -> dict[str, float]:
    """Distance from each node to its nearest denser node.

    The single global density peak (and any node whose denser nodes are all
    unreachable) takes the maximum finite delta found elsewhere, so peaks
    stay anchor-eligible; 1.0 when no finite delta exists.
    """
    delta: dict[str, float] = {}
    stranded: list[str] = []
    for v in graph.nodes:
        denser = [u for u in graph.nodes if _is_denser(density, u, v)]
        if not denser:
            stranded.append(v)  # global peak
            continue
        dist = distances_from(graph, v)
        best = min((dist[u] for u in denser if u in dist), default=math.inf)
        if math.isinf(best):
            stranded.append(v)
        else:
            delta[v] = best
    finite = [d for d in delta.values() if math.isfinite(d)]
    ceiling = max(finite) if finite else 1.0
    for v in stranded:
        delta[v] = ceiling
    return delta


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi - lo == 0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def compute_anchor_scores(graph: CoocGraph) -> AnchorScores:
    density = compute_density(graph)
    delta = compute_delta(graph, density)
    order = sorted(graph.nodes)
    rho = np.array([density[v] for v in order], dtype=float)
    dlt = np.array([delta[v] for v in order], dtype=float)
    gamma = _minmax(rho) * _minmax(dlt)
    return AnchorScores(density, delta, dict(zip(order, gamma.tolist())))


def select_anchors(scores: AnchorScores, params: TreeParams, n_nodes: int) -> set[str]:
    """Nodes whose combined density-distance score stands out from the rest.

    Returns the empty set (the recursion-stop signal) for undersized or
    degenerate (score-uniform) graphs, or when fewer than two nodes pass the
    threshold.
    """
    if n_nodes < params.min_community_size:
        return set()
    order = sorted(scores.gamma)
    gamma = np.array([scores.gamma[v] for v in order], dtype=float)
    spread = float(gamma.std())
    if spread < params.degeneracy_epsilon:
        return set()
    threshold = float(gamma.mean()) + params.gamma_z * spread
    anchors = {v for v, g in scores.gamma.items() if g > threshold}
    if len(anchors) < 2:
        return set()
    return anchors


def assign_members(graph: CoocGraph, anchors: set[str]) -> dict[str, str]:
    """Assign every node to its nearest anchor (ties: denser anchor, then
    label order); unreachable nodes map to the synthetic ``unassigned``."""
    if not anchors <= set(graph.nodes):
        raise ValueError("anchors must be graph nodes")
    if len(anchors) < 2:
        raise ValueError("need at least two anchors")
    density = compute_density(graph)
    # (distance, -density of anchor, anchor label): min picks nearest, then
    # densest, then first by label
    best: dict[str, tuple[float, float, str]] = {}
    for anchor in sorted(anchors):
        dist = distances_from(graph, anchor)
        for v, d in dist.items():
            key = (d, -density[anchor], anchor)
            if v not in best or key < best[v]:
                best[v] = key
    return {
        v: (best[v][2] if v in best else UNASSIGNED) for v in graph.nodes
    }


def build_topic_tree(graph: CoocGraph, params: TreeParams | None = None) -> TopicTree:
    """Recursive density-peak partitioning of a weighted term network."""
    params = params or TreeParams()
    tree = TopicTree()

    def grow(sub: CoocGraph, depth: int, out: list[TreeNode]):
        if depth > params.max_depth or sub.n_nodes() < params.min_community_size:
            return
        anchors = select_anchors(compute_anchor_scores(sub), params, sub.n_nodes())
        if not anchors:
            return
        assignment = assign_members(sub, anchors)
        communities: dict[str, set[str]] = {a: set() for a in sorted(anchors)}
        for v, a in assignment.items():
            if a == UNASSIGNED:
                tree.unassigned.add(v)
            else:
                communities[a].add(v)
        for anchor in sorted(communities):
            members = communities[anchor]
            node = TreeNode(anchor=anchor, members=members, depth=depth)
            out.append(node)
            grow(sub.subgraph(members), depth + 1, node.children)

    grow(graph, 1, tree.nodes)
    return tree
