"""Multilevel decontractible-graph engine and corpus analysis toolkit."""

from .core import (
    DecGraph,
    EMPTY_GRAPH,
    GraphBuilder,
    GraphError,
    NodeId,
    PlainGraph,
    Superedge,
    Supernode,
    complete_decontraction,
    decontract_node,
    is_contraction_of,
    natural_transform,
    reconstruct,
    weak_component_count,
)
from .features import (
    DEFAULT_CYCLE_LIMIT,
    ContractionScheme,
    Feature,
    FeatureKind,
    FeatureSet,
    detect_cliques,
    detect_sccs,
    detect_simple_cycles,
    detect_stars,
    make_scheme,
    quotient_by_features,
)
from .metrics import (
    LevelMetrics,
    contraction_percentage,
    density,
    extras,
    level_metrics,
    path_stats,
    weight_assortativity,
    weight_stats,
)
from .multilevel import MultilevelGraph, flatten_to_base
from .textpipe import (
    LemmaSequence,
    PipelineConfig,
    admit,
    build_sequence_graph,
    clean_and_lemmatize,
    lemmatize_token,
    load_lemma_overrides,
    load_stopwords,
)

__version__ = "0.1.0"

__all__ = [
    "DecGraph",
    "EMPTY_GRAPH",
    "GraphBuilder",
    "GraphError",
    "NodeId",
    "PlainGraph",
    "Superedge",
    "Supernode",
    "complete_decontraction",
    "decontract_node",
    "is_contraction_of",
    "natural_transform",
    "reconstruct",
    "weak_component_count",
    "DEFAULT_CYCLE_LIMIT",
    "ContractionScheme",
    "Feature",
    "FeatureKind",
    "FeatureSet",
    "detect_cliques",
    "detect_sccs",
    "detect_simple_cycles",
    "detect_stars",
    "make_scheme",
    "quotient_by_features",
    "LevelMetrics",
    "contraction_percentage",
    "density",
    "extras",
    "level_metrics",
    "path_stats",
    "weight_assortativity",
    "weight_stats",
    "MultilevelGraph",
    "flatten_to_base",
    "LemmaSequence",
    "PipelineConfig",
    "admit",
    "build_sequence_graph",
    "clean_and_lemmatize",
    "lemmatize_token",
    "load_lemma_overrides",
    "load_stopwords",
    "__version__",
]
