"""Bibliometric analytics engine: multi-source corpus merging, knowledge-graph
enrichment, co-occurrence networks, hierarchical topic trees, year-sliced
topic evolution, and responsibility-principle portraits.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    BibRecord,
    Corpus,
    IngestReport,
    ParseResult,
    build_search_query,
    filter_core_cohort,
    merge_dedup,
    normalize_doi,
    parse_records,
)
from .enrich import ClientPolicy, EnrichmentReport, enrich_corpus, lookup_by_doi_batch  # noqa: F401
from .evolution import (  # noqa: F401
    DocVector,
    EvolutionGraph,
    EvolutionParams,
    Topic,
    Vocabulary,
    build_evolution_graph,
    classify_record,
    evolution_view,
    slice_stream,
    vectorize_record,
)
from .network import (  # noqa: F401
    CoocGraph,
    Partition,
    build_cooc_graph,
    louvain_partition,
    modularity,
    topological_distance,
)
from .portraits import (  # noqa: F401
    InterplayMatrix,
    PrincipleLexicon,
    RankTable,
    build_interplay,
    extract_keyphrases,
    publication_trend,
    rank_entities,
    tag_principles,
)
from .topictree import (  # noqa: F401
    AnchorScores,
    TopicTree,
    TreeParams,
    assign_members,
    build_topic_tree,
    compute_anchor_scores,
    compute_delta,
    compute_density,
    select_anchors,
)
from .exports import read_gexf, write_gexf, write_graphml, write_report_tables  # noqa: F401
from .pipeline import PipelineConfig, RunManifest, run_pipeline  # noqa: F401
