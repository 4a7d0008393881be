"""Replay-based explorer for multi-fuzzer campaign queues.

Given the saved testcase queues of two or more fuzzer configurations, this
package replays them against a shared edge-coverage target, computes
coverage-growth curves, cross-fuzzer interestingness, coverage matrices,
a 2D embedding of every testcase's coverage vector, and per-fuzzer testcase
genealogy graphs, then serves everything to an interactive dashboard.
"""

from .analysis import (
    AnalysisArtifact,
    InterestingnessMap,
    SCHEMA_VERSION,
    compute_analysis,
    filter_artifact,
    load_artifact,
    save_artifact,
)
from .campaign import (
    CampaignConfig,
    FuzzerConfig,
    TestcaseRecord,
    ingest_queue,
    load_campaign,
    parse_queue_filename,
)
from .coverage import (
    ExecutorSpec,
    HitcountVector,
    classify_counts,
    count_not_zeros,
    execute,
    merge_coverage,
)
from .embedding import (
    EmbeddingPoint,
    TsneParams,
    kl_divergence,
    pairwise_affinities,
    run_tsne,
)
from .genealogy import (
    GenerationsGraph,
    build_graph,
    filter_graph,
    overlay_interestingness,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisArtifact",
    "CampaignConfig",
    "EmbeddingPoint",
    "ExecutorSpec",
    "FuzzerConfig",
    "GenerationsGraph",
    "HitcountVector",
    "InterestingnessMap",
    "SCHEMA_VERSION",
    "TestcaseRecord",
    "TsneParams",
    "build_graph",
    "classify_counts",
    "compute_analysis",
    "count_not_zeros",
    "execute",
    "filter_artifact",
    "filter_graph",
    "ingest_queue",
    "kl_divergence",
    "load_artifact",
    "load_campaign",
    "merge_coverage",
    "overlay_interestingness",
    "pairwise_affinities",
    "parse_queue_filename",
    "run_tsne",
    "save_artifact",
    "__version__",
]
