"""Concept-aware batch sampling engine for vision-language data pipelines.

The package buffers concept-annotated samples into superbatches, scores
them with pluggable heuristics (constant, concept-count, greedy diversity
maximization), selects top-k sub-batches deterministically, fuses
multi-resolution bounding-box annotations, runs a balanced offline
curation baseline and reports batch/dataset composition statistics.
"""

__version__ = "0.1.0"

from .analytics import (
    AdherenceReport,
    BatchComposition,
    DatasetProfile,
    WordCountStats,
    batch_composition,
    concept_adherence,
    dataset_profile,
    word_count_stats,
)
from .boxes import DetectionSet, FusedDetection, WbfConfig, iou, wbf
from .concepts import (
    BoundingBox,
    ConceptVocabulary,
    EmbeddingVector,
    SampleAnnotation,
    ingest_annotations,
    lemmatize_plural,
    normalize_name,
    semantic_dedup,
)
from .curation import CurationConfig, metaclip_curate
from .sampler import (
    BatchWriter,
    RunSummary,
    SamplerConfig,
    ScoringStrategy,
    SelectedBatch,
    Superbatch,
    read_batches,
    run_sampler,
    select_topk,
)
from .strategies import (
    DmParams,
    DmStrategy,
    FmStrategy,
    IidStrategy,
    compute_targets,
    dm_gain,
    dm_select,
    fm_score,
    iid_score,
    make_strategy,
)
from .synth import zipf_pool

__all__ = [
    "AdherenceReport",
    "BatchComposition",
    "BatchWriter",
    "BoundingBox",
    "ConceptVocabulary",
    "CurationConfig",
    "DatasetProfile",
    "DetectionSet",
    "DmParams",
    "DmStrategy",
    "EmbeddingVector",
    "FmStrategy",
    "FusedDetection",
    "IidStrategy",
    "RunSummary",
    "SampleAnnotation",
    "SamplerConfig",
    "ScoringStrategy",
    "SelectedBatch",
    "Superbatch",
    "WbfConfig",
    "WordCountStats",
    "batch_composition",
    "compute_targets",
    "concept_adherence",
    "dataset_profile",
    "dm_gain",
    "dm_select",
    "fm_score",
    "iid_score",
    "ingest_annotations",
    "iou",
    "lemmatize_plural",
    "make_strategy",
    "metaclip_curate",
    "normalize_name",
    "read_batches",
    "run_sampler",
    "select_topk",
    "semantic_dedup",
    "wbf",
    "word_count_stats",
    "zipf_pool",
]
