"""mrikit: preprocessing, quality verification, splitting and evaluation
toolkit for grayscale MRI classification experiments."""

from .dataset import (
    DatasetManifest,
    SampleRecord,
    SplitAssignment,
    materialize_split,
    scan_dataset,
    stratified_split,
)
from .enhance import (
    PipelineConfig,
    StageTrace,
    clahe,
    median_filter,
    morphological_opening,
    run_pipeline,
)
from .image import decode_image, encode_image, resize_bilinear
from .metrics import (
    AggregateStats,
    ClassStats,
    ConfusionMatrix,
    PerClassCounts,
    PredictionRecord,
    aggregate,
    build_confusion,
    class_stats,
    label_error,
    per_class_counts,
    stats_report,
)
from .quality import QualityReport, fidelity, ssim, verify_batch
from .report import (
    EpochLogEntry,
    RunSummary,
    comparison_table,
    evaluation_report,
    load_epoch_logs,
    load_summaries,
    render_curves,
)
from .transformers import (
    Clahe,
    EnhancementPipeline,
    MedianFilter,
    MorphologicalOpening,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateStats",
    "Clahe",
    "ClassStats",
    "ConfusionMatrix",
    "DatasetManifest",
    "EnhancementPipeline",
    "EpochLogEntry",
    "MedianFilter",
    "MorphologicalOpening",
    "PerClassCounts",
    "PipelineConfig",
    "PredictionRecord",
    "QualityReport",
    "RunSummary",
    "SampleRecord",
    "SplitAssignment",
    "StageTrace",
    "aggregate",
    "build_confusion",
    "clahe",
    "class_stats",
    "comparison_table",
    "decode_image",
    "encode_image",
    "evaluation_report",
    "fidelity",
    "label_error",
    "load_epoch_logs",
    "load_summaries",
    "materialize_split",
    "median_filter",
    "morphological_opening",
    "per_class_counts",
    "render_curves",
    "resize_bilinear",
    "run_pipeline",
    "scan_dataset",
    "ssim",
    "stats_report",
    "stratified_split",
    "verify_batch",
]
