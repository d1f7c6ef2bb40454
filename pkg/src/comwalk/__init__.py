"""Community-aware random-walk embeddings for networks.

Pipeline: detect communities by modularity maximization, generate biased
random walks that occasionally jump inside the current node's community,
train skip-gram embeddings on the walk corpus, and evaluate them on
multi-label node classification or link prediction.
"""

from .community import (
    Partition,
    aggregate_graph,
    load_communities,
    local_moving_pass,
    louvain,
    modularity,
    save_communities,
)
from .errors import ComwalkError, DataError, EdgeListParseError, InternalError
from .evaluation import (
    CSV_FIELDS,
    EdgeOperator,
    EvalReport,
    LabelSet,
    auc_roc,
    classify_experiment,
    edge_features,
    linkpred_experiment,
    load_labels,
    micro_macro_f1,
    write_reports,
)
from .graph import (
    AliasSampler,
    EdgeSplit,
    Graph,
    load_edge_list,
    sample_neighbor,
    sample_non_edges,
    save_edge_list,
    save_edge_split,
    split_edges,
    weighted_degree,
)
from .skipgram import (
    EmbeddingModel,
    TrainConfig,
    init_embeddings,
    load_embeddings,
    save_embeddings,
    score,
    sgd_pair_update,
    train,
)
from .walker import WalkConfig, community_aware_walk, generate_corpus, save_walks, walk_rng

__version__ = "0.1.0"

__all__ = [
    "AliasSampler",
    "CSV_FIELDS",
    "ComwalkError",
    "DataError",
    "EdgeListParseError",
    "EdgeOperator",
    "EdgeSplit",
    "EmbeddingModel",
    "EvalReport",
    "Graph",
    "InternalError",
    "LabelSet",
    "Partition",
    "TrainConfig",
    "WalkConfig",
    "aggregate_graph",
    "auc_roc",
    "classify_experiment",
    "community_aware_walk",
    "edge_features",
    "generate_corpus",
    "init_embeddings",
    "linkpred_experiment",
    "load_communities",
    "load_edge_list",
    "load_embeddings",
    "load_labels",
    "local_moving_pass",
    "louvain",
    "micro_macro_f1",
    "modularity",
    "sample_neighbor",
    "sample_non_edges",
    "save_communities",
    "save_edge_list",
    "save_edge_split",
    "save_embeddings",
    "save_walks",
    "score",
    "sgd_pair_update",
    "split_edges",
    "train",
    "walk_rng",
    "write_reports",
    "weighted_degree",
]
