"""Training-free image clustering with transport-aligned text semantics."""

from .errors import CAEError, ConfigError, DataFormatError, NumericalStabilityError
from .estimator import CAE, MODES, SeededKMeans
from .fusion import (
    FusedRepresentation,
    FusionWeights,
    ModalityBundle,
    baseline_concat,
    baseline_sum,
    fuse,
    fusion_weights,
    prototype,
    temperature_softmax,
)
from .kmeans import KMeansConfig, KMeansResult, kmeans_fit, kmeans_pp_init
from .metrics import MetricReport, accuracy, ari, contingency, evaluate, nmi
from .pipeline import (
    ClusteringResult,
    PipelineConfig,
    run_ablation_suite,
    run_pipeline,
    write_report,
)
from .semantic import (
    SemanticSpace,
    SpaceConfig,
    assignment_probability,
    build_semantic_space,
    default_num_centers,
    select_topk,
)
from .store import (
    EmbeddingMatrix,
    cosine_similarity,
    l2_normalize,
    load_embeddings,
    load_labels,
    save_embeddings,
    save_labels,
)
from .synthetic import SynthSpec, generate_synthetic
from .transport import (
    SinkhornConfig,
    TransportPlan,
    cost_matrix,
    counterpart,
    sinkhorn,
    softmax_counterpart,
    transport_cost,
)

__version__ = "0.1.0"

__all__ = [
    "CAE",
    "CAEError",
    "ClusteringResult",
    "ConfigError",
    "DataFormatError",
    "EmbeddingMatrix",
    "FusedRepresentation",
    "FusionWeights",
    "KMeansConfig",
    "KMeansResult",
    "MODES",
    "MetricReport",
    "ModalityBundle",
    "NumericalStabilityError",
    "PipelineConfig",
    "SeededKMeans",
    "SemanticSpace",
    "SinkhornConfig",
    "SpaceConfig",
    "SynthSpec",
    "TransportPlan",
    "accuracy",
    "ari",
    "assignment_probability",
    "baseline_concat",
    "baseline_sum",
    "build_semantic_space",
    "contingency",
    "cosine_similarity",
    "cost_matrix",
    "counterpart",
    "default_num_centers",
    "evaluate",
    "fuse",
    "fusion_weights",
    "generate_synthetic",
    "kmeans_fit",
    "kmeans_pp_init",
    "l2_normalize",
    "load_embeddings",
    "load_labels",
    "nmi",
    "prototype",
    "run_ablation_suite",
    "run_pipeline",
    "save_embeddings",
    "save_labels",
    "select_topk",
    "sinkhorn",
    "softmax_counterpart",
    "temperature_softmax",
    "transport_cost",
    "write_report",
]
