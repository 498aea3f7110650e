"""File exporters: GEXF (primary, Gephi-ready), GraphML (secondary), and the
CSV/JSON report tables. All writers sort their content so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .evolution import EvolutionGraph, EvolutionView, evolution_view
from .network import CoocGraph, Partition
from .portraits import InterplayMatrix, RankTable

GEXF_NS = "http://www.gexf.net/1.2draft"
VIZ_NS = "http://www.gexf.net/1.2draft/viz"
GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

# Fixed 12-color palette; community ids cycle through it so re-exports keep
# their colors.
PALETTE = [
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207), (174, 199, 232), (255, 187, 120),
]


def community_color(community: int) -> tuple[int, int, int]:
    return PALETTE[community % len(PALETTE)]


def _num(x: float) -> str:
    """Compact numeric attribute formatting (ints without trailing .0)."""
    f = float(x)
    return str(int(f)) if f.is_integer() else repr(f)


def _view_rows(obj, partition: Partition | None):
    """Normalize a CoocGraph or EvolutionView/Graph into node/edge rows."""
    if isinstance(obj, EvolutionGraph):
        obj = evolution_view(obj)
    if isinstance(obj, EvolutionView):
        nodes = [
            {
                "id": n["id"],
                "label": n["label"] or n["id"],
                "size": float(n["size"]),
                "community": int(n["color"]),
            }
            for n in obj.nodes
        ]
        edges = [
            {"source": e["source"], "target": e["target"], "weight": float(e["weight"])}
            for e in obj.edges
        ]
    elif isinstance(obj, CoocGraph):
        assignment = partition.assignment if partition else {}
        nodes = [
            {
                "id": label,
                "label": label,
                "size": float(freq),
                "community": int(assignment.get(label, 0)),
            }
            for label, freq in obj.nodes.items()
        ]
        edges = [
            {"source": a, "target": b, "weight": float(w)}
            for (a, b), w in obj.edges.items()
        ]
    else:
        raise TypeError(f"cannot export {type(obj).__name__}")
    nodes.sort(key=lambda n: n["id"])
    edges.sort(key=lambda e: (e["source"], e["target"]))
    return nodes, edges


def write_gexf(obj, path, partition: Partition | None = None) -> Path:
    """Write a graph (or evolution view) as GEXF 1.2draft with viz size and
    community colors."""
    nodes, edges = _view_rows(obj, partition)
    # re-register every call: the default prefix is a process-global slot
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("viz", VIZ_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.2"})
    graph_el = ET.SubElement(
        root, f"{{{GEXF_NS}}}graph",
        {"mode": "static", "defaultedgetype": "undirected"},
    )
    attrs = ET.SubElement(graph_el, f"{{{GEXF_NS}}}attributes", {"class": "node"})
    ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute",
                  {"id": "0", "title": "frequency", "type": "double"})
    ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute",
                  {"id": "1", "title": "community", "type": "integer"})
    nodes_el = ET.SubElement(graph_el, f"{{{GEXF_NS}}}nodes")
    for node in nodes:
        node_el = ET.SubElement(
            nodes_el, f"{{{GEXF_NS}}}node", {"id": node["id"], "label": node["label"]}
        )
        values = ET.SubElement(node_el, f"{{{GEXF_NS}}}attvalues")
        ET.SubElement(values, f"{{{GEXF_NS}}}attvalue",
                      {"for": "0", "value": _num(node["size"])})
        ET.SubElement(values, f"{{{GEXF_NS}}}attvalue",
                      {"for": "1", "value": str(node["community"])})
        ET.SubElement(node_el, f"{{{VIZ_NS}}}size", {"value": _num(node["size"])})
        r, g, b = community_color(node["community"])
        ET.SubElement(node_el, f"{{{VIZ_NS}}}color",
                      {"r": str(r), "g": str(g), "b": str(b)})
    edges_el = ET.SubElement(graph_el, f"{{{GEXF_NS}}}edges")
    for i, edge in enumerate(edges):
        ET.SubElement(
            edges_el, f"{{{GEXF_NS}}}edge",
            {"id": str(i), "source": edge["source"], "target": edge["target"],
             "weight": _num(edge["weight"])},
        )
    ET.indent(root, space="  ")
    data = ET.tostring(root, encoding="UTF-8", xml_declaration=True)
    path = Path(path)
    path.write_bytes(data + b"\n")
    return path


def read_gexf(path) -> dict:
    """Parse a GEXF file back into plain node/edge dicts (round-trip and
    fixture loading)."""
    root = ET.parse(path).getroot()
    titles = {
        a.get("id"): a.get("title")
        for a in root.iter(f"{{{GEXF_NS}}}attribute")
    }
    nodes: dict[str, dict] = {}
    for node_el in root.iter(f"{{{GEXF_NS}}}node"):
        info: dict = {"label": node_el.get("label")}
        for value in node_el.iter(f"{{{GEXF_NS}}}attvalue"):
            title = titles.get(value.get("for"), value.get("for"))
            info[title] = float(value.get("value"))
        size_el = node_el.find(f"{{{VIZ_NS}}}size")
        if size_el is not None:
            info["viz_size"] = float(size_el.get("value"))
        color_el = node_el.find(f"{{{VIZ_NS}}}color")
        if color_el is not None:
            info["viz_color"] = tuple(int(color_el.get(c)) for c in "rgb")
        nodes[node_el.get("id")] = info
    edges = {
        (e.get("source"), e.get("target")): float(e.get("weight", 1.0))
        for e in root.iter(f"{{{GEXF_NS}}}edge")
    }
    return {"nodes": nodes, "edges": edges}


def gexf_to_cooc(path, unit: str = "term") -> CoocGraph:
    """Load a GEXF file written by :func:`write_gexf` as a CoocGraph."""
    parsed = read_gexf(path)
    nodes = {nid: info.get("frequency", 1.0) for nid, info in parsed["nodes"].items()}
    edges = {
        ((a, b) if a < b else (b, a)): w for (a, b), w in parsed["edges"].items()
    }
    return CoocGraph(unit, nodes, edges)


def write_graphml(obj, path, partition: Partition | None = None) -> Path:
    """Secondary writer: the same view as GraphML."""
    nodes, edges = _view_rows(obj, partition)
    ET.register_namespace("", GRAPHML_NS)
    root = ET.Element(f"{{{GRAPHML_NS}}}graphml")
    for key_id, name, target, kind in [
        ("d0", "frequency", "node", "double"),
        ("d1", "community", "node", "int"),
        ("d2", "weight", "edge", "double"),
    ]:
        ET.SubElement(root, f"{{{GRAPHML_NS}}}key",
                      {"id": key_id, "for": target, "attr.name": name, "attr.type": kind})
    graph_el = ET.SubElement(root, f"{{{GRAPHML_NS}}}graph",
                             {"id": "G", "edgedefault": "undirected"})
    for node in nodes:
        node_el = ET.SubElement(graph_el, f"{{{GRAPHML_NS}}}node", {"id": node["id"]})
        ET.SubElement(node_el, f"{{{GRAPHML_NS}}}data", {"key": "d0"}).text = _num(node["size"])
        ET.SubElement(node_el, f"{{{GRAPHML_NS}}}data", {"key": "d1"}).text = str(node["community"])
    for i, edge in enumerate(edges):
        edge_el = ET.SubElement(
            graph_el, f"{{{GRAPHML_NS}}}edge",
            {"id": f"e{i}", "source": edge["source"], "target": edge["target"]},
        )
        ET.SubElement(edge_el, f"{{{GRAPHML_NS}}}data", {"key": "d2"}).text = _num(edge["weight"])
    ET.indent(root, space="  ")
    data = ET.tostring(root, encoding="UTF-8", xml_declaration=True)
    path = Path(path)
    path.write_bytes(data + b"\n")
    return path


# ---------------------------------------------------------------------------
# CSV / JSON report tables

def _write_csv(path, header: list[str], rows: list[list]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_rank_table_csv(table: RankTable, path) -> Path:
    rows = [
        [row["rank"], row["name"], row["count"], f"{row['share']:.6f}"]
        for row in table.to_rows()
    ]
    return _write_csv(path, ["rank", "name", "count", "share"], rows)


def write_trend_csv(series: list[tuple[int, int]], path) -> Path:
    return _write_csv(path, ["year", "count"], [[y, c] for y, c in series])


def write_interplay_csv(matrix: InterplayMatrix, path) -> Path:
    rows = []
    for i, principle in enumerate(matrix.principles):
        for j, technique in enumerate(matrix.techniques):
            rows.append(
                [principle, technique, matrix.counts[i][j], f"{matrix.row_shares[i][j]:.6f}"]
            )
    return _write_csv(path, ["principle", "technique", "count", "row_share"], rows)


def write_chord_csv(matrix: InterplayMatrix, path) -> Path:
    rows = [[r["source"], r["target"], r["value"]] for r in matrix.chord_rows()]
    return _write_csv(path, ["source", "target", "value"], rows)


def write_keyphrases_csv(phrases: list[tuple[str, float]], path) -> Path:
    return _write_csv(path, ["term", "score"], [[t, f"{s:.6f}"] for t, s in phrases])


def write_json(obj: dict, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, sort_keys=True, indent=1)
        fh.write("\n")
    return path


def write_report_tables(out_dir, *, rank_tables=None, trend=None, interplay=None,
                        keyphrases=None, tree=None, evolution=None) -> list[Path]:
    """Materialize portrait tables and tree/evolution JSON under ``out_dir``;
    returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for table in rank_tables or []:
        written.append(write_rank_table_csv(table, out / f"rank_{table.kind}.csv"))
    if trend is not None:
        written.append(write_trend_csv(trend, out / "trend.csv"))
    if interplay is not None:
        written.append(write_interplay_csv(interplay, out / "interplay.csv"))
        written.append(write_chord_csv(interplay, out / "interplay_chord.csv"))
    if keyphrases is not None:
        written.append(write_keyphrases_csv(keyphrases, out / "cohort_keyphrases.csv"))
    if tree is not None:
        tree.save_json(out / "topic_tree.json")
        written.append(out / "topic_tree.json")
        tree.save_csv(out / "topic_tree.csv")
        written.append(out / "topic_tree.csv")
    if evolution is not None:
        evolution.save_json(out / "evolution.json")
        written.append(out / "evolution.json")
    return written
