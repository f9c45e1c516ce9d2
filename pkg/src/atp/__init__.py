"""Training-free visual token pruning with a prefill cost model.

Score Vision-Transformer patch tokens by a hybrid of intra-modal saliency
(final-layer CLS attention) and inter-modal relevance (cosine against a
text embedding), keep the top-K, and quantify the prefill FLOP and kv-cache
savings of the shorter visual prefix.
"""

from .container import (
    FixtureContainer,
    FixtureCorruptionError,
    FixtureError,
    FixtureFormatError,
    FixtureValidationError,
    FixtureVersionError,
    read_container,
    validate_container,
    write_container,
)
from .costmodel import CostReport, LMShape, kv_bytes, latency_speedup, prefill_flops, relative_report
from .pruner import (
    PruneConfig,
    PruneResult,
    StabilitySummary,
    apply_prune,
    atp_pipeline,
    fuse,
    jaccard,
    kept_set_stability,
    top_k,
)
from .saliency import (
    AttentionMap,
    PatchTokenSet,
    ProjectionMatrix,
    TextEmbedding,
    inter_scores,
    intra_cls,
    intra_rowsum,
)
from .synthetic import SyntheticSpec, gen_synthetic
from .vecmath import cosine, dot, l2_norm, minmax_normalize

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "CostReport",
    "FixtureContainer",
    "FixtureCorruptionError",
    "FixtureError",
    "FixtureFormatError",
    "FixtureValidationError",
    "FixtureVersionError",
    "LMShape",
    "PatchTokenSet",
    "ProjectionMatrix",
    "PruneConfig",
    "PruneResult",
    "StabilitySummary",
    "SyntheticSpec",
    "TextEmbedding",
    "apply_prune",
    "atp_pipeline",
    "cosine",
    "dot",
    "fuse",
    "gen_synthetic",
    "inter_scores",
    "intra_cls",
    "intra_rowsum",
    "jaccard",
    "kept_set_stability",
    "kv_bytes",
    "l2_norm",
    "latency_speedup",
    "minmax_normalize",
    "prefill_flops",
    "read_container",
    "relative_report",
    "top_k",
    "validate_container",
    "write_container",
]
