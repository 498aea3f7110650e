"""End-to-end orchestration: configuration, content-hash stage caching, and
the ingest -> dedup -> enrich -> network -> topic tree -> evolution ->
portraits -> export workflow with a run manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import (
    DEFAULT_COHORT_PHRASES,
    BibRecord,
    Corpus,
    DIALECTS,
    filter_core_cohort,
    merge_dedup,
    parse_records,
)
from .enrich import CACHE_DIR_ENV, API_BASE_ENV, ClientPolicy, enrich_corpus
from .errors import ConfigurationError, InputFormatError, StageError
from .evolution import EvolutionParams, EvolutionView, build_evolution_graph
from .exports import (
    write_gexf,
    write_graphml,
    write_json,
    write_keyphrases_csv,
    write_report_tables,
)
from .network import CoocGraph, Partition, build_cooc_graph, louvain_partition, UNITS
from .portraits import (
    InterplayMatrix,
    PrincipleLexicon,
    RANK_KINDS,
    RankTable,
    build_interplay,
    default_technique_tags,
    extract_keyphrases,
    publication_trend,
    rank_entities,
)
from .topictree import TopicTree, TreeParams, build_topic_tree

STAGES = ("ingest", "dedup", "enrich", "network", "htt", "sep", "portraits", "export")


@dataclass
class PipelineConfig:
    inputs: list[dict]  # {"path": ..., "dialect": ...}
    out_dir: str
    seed: int = 0
    enrich: bool = False
    api_base: str | None = None
    client: ClientPolicy = field(default_factory=ClientPolicy)
    drop_unmatched: bool = False
    network_unit: str = "keyword"
    min_node_freq: int = 2
    min_edge_weight: float = 1.0
    tree: TreeParams = field(default_factory=TreeParams)
    evolution: EvolutionParams = field(default_factory=EvolutionParams)
    lexicon_overrides: dict[str, list[str]] = field(default_factory=dict)
    technique_tags: list[str] | None = None
    cohort_phrases: list[str] = field(default_factory=lambda: list(DEFAULT_COHORT_PHRASES))
    include_abstract_tagging: bool = False
    keyphrase_k: int = 50
    skip_stages: list[str] = field(default_factory=list)
    cache_dir: str | None = None

    def __post_init__(self):
        paths = [i.get("path") for i in self.inputs]
        if len(set(paths)) != len(paths):
            raise ConfigurationError("input paths must be distinct")
        for item in self.inputs:
            if item.get("dialect") not in DIALECTS:
                raise ConfigurationError(
                    f"input {item.get('path')!r} has unknown dialect {item.get('dialect')!r}"
                )
        if self.network_unit not in UNITS:
            raise ConfigurationError(f"unknown network unit {self.network_unit!r}")
        for stage in self.skip_stages:
            if stage not in STAGES:
                raise ConfigurationError(f"unknown stage in skip_stages: {stage!r}")
        if self.enrich and not (self.api_base or os.environ.get(API_BASE_ENV)):
            raise ConfigurationError(
                f"enrichment enabled but no api_base configured (or ${API_BASE_ENV})"
            )

    @classmethod
    def from_dict(cls, raw: dict, overrides: dict | None = None) -> "PipelineConfig":
        raw = dict(raw)
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key] = value
        try:
            client = ClientPolicy(**raw.pop("client", {}))
            tree = TreeParams(**raw.pop("tree", {}))
            evolution = EvolutionParams(**raw.pop("evolution", {}))
            return cls(client=client, tree=tree, evolution=evolution, **raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad pipeline config: {exc}") from exc

    @classmethod
    def load_json(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw, overrides)

    def enabled_stages(self) -> list[str]:
        stages = [s for s in STAGES if s not in self.skip_stages]
        if not self.enrich and "enrich" in stages:
            stages.remove("enrich")
        return stages

    def semantic_dict(self) -> dict:
        """Config content that affects results (locations excluded)."""
        return {
            "inputs": [i["dialect"] for i in self.inputs],
            "seed": self.seed,
            "enrich": self.enrich,
            "api_base": self.api_base if self.enrich else None,
            "drop_unmatched": self.drop_unmatched,
            "network": [self.network_unit, self.min_node_freq, self.min_edge_weight],
            "tree": vars(self.tree),
            "evolution": vars(self.evolution),
            "lexicon_overrides": self.lexicon_overrides,
            "technique_tags": self.technique_tags,
            "cohort_phrases": self.cohort_phrases,
            "include_abstract_tagging": self.include_abstract_tagging,
            "keyphrase_k": self.keyphrase_k,
            "stages": self.enabled_stages(),
        }

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(__version__.encode())
        h.update(json.dumps(self.semantic_dict(), sort_keys=True).encode("utf-8"))
        for item in self.inputs:
            path = Path(item["path"])
            h.update(path.name.encode("utf-8"))
            if path.exists():
                h.update(path.read_bytes())
        return h.hexdigest()


@dataclass
class StageRun:
    name: str
    seconds: float
    outputs: list[str]
    cached: bool = False


@dataclass
class RunManifest:
    config_hash: str
    versions: dict[str, str]
    stages: list[StageRun] = field(default_factory=list)

    def output_files(self) -> list[str]:
        return [f for s in self.stages for f in s.outputs]

    def to_dict(self) -> dict:
        # cached flags stay out of the file so reruns stay byte-comparable
        return {
            "config_hash": self.config_hash,
            "versions": self.versions,
            "stages": [
                {"name": s.name, "seconds": round(s.seconds, 6), "outputs": s.outputs}
                for s in self.stages
            ],
        }


class _StageCache:
    def __init__(self, config: PipelineConfig):
        directory = config.cache_dir or os.environ.get(CACHE_DIR_ENV)
        self.dir = Path(directory) / "stages" if directory else None
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)
        self.base = config.content_hash()

    def key(self, stage: str) -> str:
        return hashlib.sha256(f"{self.base}|{stage}".encode()).hexdigest()

    def get(self, stage: str) -> dict | None:
        if not self.dir:
            return None
        path = self.dir / f"{self.key(stage)}.json"
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def put(self, stage: str, artifact: dict) -> None:
        if self.dir:
            path = self.dir / f"{self.key(stage)}.json"
            path.write_text(
                json.dumps(artifact, ensure_ascii=False, sort_keys=True), encoding="utf-8"
            )


class _Context:
    """Stage inputs: in-memory artifacts first, out-dir files second."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.artifacts: dict[str, dict] = {}

    def corpus(self) -> Corpus:
        for stage, key in (("enrich", "corpus"), ("dedup", "corpus")):
            if stage in self.artifacts:
                return Corpus.from_dict(self.artifacts[stage][key])
        for name in ("corpus_enriched.json", "corpus.json"):
            path = self.out / name
            if path.exists():
                return Corpus.load_json(path)
        raise StageError("pipeline", "no corpus available; run ingest first")

    def graph_and_partition(self) -> tuple[CoocGraph, Partition]:
        if "network" in self.artifacts:
            art = self.artifacts["network"]
            part = art["partition"]
        else:
            graph_path = self.out / "cooc_graph.json"
            comm_path = self.out / "communities.json"
            if not graph_path.exists():
                raise StageError("pipeline", "no co-occurrence graph; run network first")
            art = {"graph": json.loads(graph_path.read_text(encoding="utf-8"))}
            part = json.loads(comm_path.read_text(encoding="utf-8"))
        graph = CoocGraph.from_dict(art["graph"])
        partition = Partition(
            {k: int(v) for k, v in part["assignment"].items()}, float(part["modularity"])
        )
        return graph, partition

    def evolution_dict(self) -> dict:
        if "sep" in self.artifacts:
            return self.artifacts["sep"]["evolution"]
        path = self.out / "evolution.json"
        if not path.exists():
            raise StageError("pipeline", "no evolution graph; run sep first")
        return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Stage implementations: compute() -> JSON artifact, write() -> output files

def _stage_ingest(ctx: _Context):
    batches = []
    reports = []
    for item in ctx.config.inputs:
        result = parse_records(item["path"], item["dialect"])
        batches.append([r.to_dict() for r in result.records])
        reports.append(
            {"path": str(item["path"]), "dialect": item["dialect"],
             "parsed": len(result.records), "skipped": result.skipped}
        )
    return {"batches": batches, "reports": reports}


def _write_ingest(ctx: _Context, art: dict) -> list[Path]:
    return [write_json({"sources": art["reports"]}, ctx.out / "skip_report.json")]


def _stage_dedup(ctx: _Context):
    batches = [
        [BibRecord.from_dict(r) for r in batch]
        for batch in ctx.artifacts["ingest"]["batches"]
    ]
    corpus, report = merge_dedup(batches)
    return {"corpus": corpus.to_dict(), "report": report.to_dict()}


def _write_dedup(ctx: _Context, art: dict) -> list[Path]:
    paths = [
        write_json(art["corpus"], ctx.out / "corpus.json"),
        write_json(art["report"], ctx.out / "ingest_report.json"),
    ]
    return paths


def _stage_enrich(ctx: _Context):
    corpus = Corpus.from_dict(ctx.artifacts["dedup"]["corpus"])
    enriched, report = enrich_corpus(
        corpus,
        policy=ctx.config.client,
        base_url=ctx.config.api_base,
        cache_dir=ctx.config.cache_dir,
        drop_unmatched=ctx.config.drop_unmatched,
    )
    return {"corpus": enriched.to_dict(), "report": report.to_dict()}


def _write_enrich(ctx: _Context, art: dict) -> list[Path]:
    return [
        write_json(art["corpus"], ctx.out / "corpus_enriched.json"),
        write_json(art["report"], ctx.out / "enrichment_report.json"),
    ]


def _stage_network(ctx: _Context):
    corpus = ctx.corpus()
    graph = build_cooc_graph(
        corpus, ctx.config.network_unit, ctx.config.min_node_freq, ctx.config.min_edge_weight
    )
    if graph.n_nodes():
        partition = louvain_partition(graph, seed=ctx.config.seed)
    else:
        partition = Partition({}, 0.0)
    return {"graph": graph.to_dict(), "partition": partition.to_dict()}


def _write_network(ctx: _Context, art: dict) -> list[Path]:
    return [
        write_json(art["graph"], ctx.out / "cooc_graph.json"),
        write_json(art["partition"], ctx.out / "communities.json"),
    ]


def _stage_htt(ctx: _Context):
    graph, _ = ctx.graph_and_partition()
    tree = build_topic_tree(graph, ctx.config.tree)
    return {"tree": tree.to_dict()}


def _write_htt(ctx: _Context, art: dict) -> list[Path]:
    tree = TopicTree.from_dict(art["tree"])
    tree.save_json(ctx.out / "topic_tree.json")
    tree.save_csv(ctx.out / "topic_tree.csv")
    return [ctx.out / "topic_tree.json", ctx.out / "topic_tree.csv"]


def _stage_sep(ctx: _Context):
    corpus = ctx.corpus()
    graph = build_evolution_graph(corpus, ctx.config.evolution, seed=ctx.config.seed)
    return {"evolution": graph.to_dict()}


def _write_sep(ctx: _Context, art: dict) -> list[Path]:
    return [write_json(art["evolution"], ctx.out / "evolution.json")]


def _stage_portraits(ctx: _Context):
    corpus = ctx.corpus()
    lexicon = PrincipleLexicon().with_overrides(ctx.config.lexicon_overrides)
    tables = [rank_entities(corpus, kind, top_n=15) for kind in RANK_KINDS]
    trend = publication_trend(corpus)
    technique_tags = ctx.config.technique_tags or default_technique_tags(corpus)
    interplay = (
        build_interplay(corpus, lexicon, technique_tags, ctx.config.include_abstract_tagging)
        if technique_tags
        else None
    )
    cohort = filter_core_cohort(corpus, ctx.config.cohort_phrases)
    keyphrases = (
        extract_keyphrases(cohort, ctx.config.keyphrase_k) if len(cohort) else []
    )
    return {
        "rank_tables": [t.to_dict() for t in tables],
        "trend": [[y, c] for y, c in trend],
        "interplay": interplay.to_dict() if interplay else None,
        "cohort": cohort.to_dict(),
        "keyphrases": [[t, s] for t, s in keyphrases],
    }


def _write_portraits(ctx: _Context, art: dict) -> list[Path]:
    tables = [RankTable.from_dict(d) for d in art["rank_tables"]]
    interplay = InterplayMatrix.from_dict(art["interplay"]) if art["interplay"] else None
    written = write_report_tables(
        ctx.out,
        rank_tables=tables,
        trend=[(y, c) for y, c in art["trend"]],
        interplay=interplay,
        keyphrases=[(t, s) for t, s in art["keyphrases"]],
    )
    written.append(write_json(art["cohort"], ctx.out / "cohort.json"))
    return written


def _stage_export(ctx: _Context):
    return {}


def _write_export(ctx: _Context, art: dict) -> list[Path]:
    graph, partition = ctx.graph_and_partition()
    paths = [
        write_gexf(graph, ctx.out / "cooc_graph.gexf", partition),
        write_graphml(graph, ctx.out / "cooc_graph.graphml", partition),
    ]
    evo = ctx.evolution_dict()
    view = EvolutionView(
        nodes=[
            {
                "kind": "topic",
                "id": t["topic_id"],
                "label": "; ".join(t["label"]),
                "size": t["size"],
                "color": t["community"],
                "birth_year": t["birth_year"],
            }
            for t in evo["topics"]
        ],
        edges=[
            {"kind": "edge", "source": e["predecessor"], "target": e["descendant"],
             "weight": e["weight"]}
            for e in evo["edges"]
        ],
    )
    paths.append(write_gexf(view, ctx.out / "evolution.gexf"))
    return paths


_STAGE_FUNCS = {
    "ingest": (_stage_ingest, _write_ingest),
    "dedup": (_stage_dedup, _write_dedup),
    "enrich": (_stage_enrich, _write_enrich),
    "network": (_stage_network, _write_network),
    "htt": (_stage_htt, _write_htt),
    "sep": (_stage_sep, _write_sep),
    "portraits": (_stage_portraits, _write_portraits),
    "export": (_stage_export, _write_export),
}


def run_pipeline(config: PipelineConfig, only: list[str] | None = None) -> RunManifest:
    """Run the configured stages in order, reusing cached stage artifacts
    when the config content hash matches. Writes run_manifest.json and
    returns the manifest (with per-stage cached flags)."""
    ctx = _Context(config)
    ctx.out.mkdir(parents=True, exist_ok=True)
    cache = _StageCache(config)
    manifest = RunManifest(config_hash=cache.base, versions={"bibliograph": __version__})

    stages = config.enabled_stages()
    if only is not None:
        stages = [s for s in stages if s in only]

    for stage in stages:
        compute, write = _STAGE_FUNCS[stage]
        started = time.perf_counter()
        try:
            artifact = cache.get(stage)
            cached = artifact is not None
            if artifact is None:
                artifact = compute(ctx)
                cache.put(stage, artifact)
            ctx.artifacts[stage] = artifact
            seconds = time.perf_counter() - started
            outputs = write(ctx, artifact)
        except (StageError, OSError, InputFormatError):
            # input problems keep their type so the CLI can map exit codes
            _write_manifest(ctx, manifest)
            raise
        except Exception as exc:
            _write_manifest(ctx, manifest)
            raise StageError(stage, str(exc)) from exc
        manifest.stages.append(
            StageRun(stage, seconds, sorted(str(Path(p).name) for p in outputs), cached)
        )
    _write_manifest(ctx, manifest)
    return manifest


def _write_manifest(ctx: _Context, manifest: RunManifest) -> None:
    write_json(manifest.to_dict(), ctx.out / "run_manifest.json")


def run_cohort(config: PipelineConfig) -> list[Path]:
    """Standalone core-cohort extraction: cohort.json plus keyphrases CSV."""
    ctx = _Context(config)
    ctx.out.mkdir(parents=True, exist_ok=True)
    corpus = ctx.corpus()
    cohort = filter_core_cohort(corpus, config.cohort_phrases)
    paths = [write_json(cohort.to_dict(), ctx.out / "cohort.json")]
    if len(cohort):
        phrases = extract_keyphrases(cohort, config.keyphrase_k)
        paths.append(write_keyphrases_csv(phrases, ctx.out / "cohort_keyphrases.csv"))
    return paths
