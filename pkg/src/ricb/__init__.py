"""Rotation-corrected content-based image retrieval.

The pipeline detects how far an image is rotated from upright, corrects
it, extracts a grid-moments color descriptor, and retrieves the nearest
bank records by brute-force scan.  The evaluation harness measures how
much the orientation stage improves precision on rotation-corrupted
datasets and what it costs in per-query latency.
"""

__version__ = "0.1.0"

from .bank import (
    BankRecord,
    DatasetManifest,
    FeatureBank,
    ManifestEntry,
    build_bank,
    build_bank_from_images,
    import_embeddings,
    ingest_dataset,
    load_bank,
    sample_bank,
    save_bank,
)
from .descriptor import DescriptorConfig, FeatureVector, extract
from .errors import (
    BadMagicError,
    BankLoadFailureError,
    BindFailureError,
    ConfigInvalidError,
    CorruptImageError,
    DimMismatchError,
    EmptyBankError,
    EmptyDatasetError,
    ManifestDesyncError,
    MissingGroundTruthError,
    NonFiniteAngleError,
    PercentOutOfRangeError,
    RicbError,
    SampleTooLargeError,
    UnreadableDirectoryError,
    UnsupportedFormatError,
    VersionMismatchError,
    ZeroVectorError,
)
from .evalharness import (
    ExperimentConfig,
    LabeledQuery,
    PrecisionReport,
    PrecisionRow,
    TimingReport,
    emit_csv,
    estimate_rotated_fraction,
    improvement,
    mean_precision,
    precision_at_k,
    rotation_experiment,
    timing_benchmark,
)
from .imaging import (
    ArrowStyle,
    RasterImage,
    center_crop,
    correct_orientation,
    decode_image,
    decode_image_bytes,
    png_bytes,
    resize,
    rotate,
    save_png,
    synth_arrow,
)
from .orientation import (
    EstimatorConfig,
    GroundTruthTable,
    angular_error,
    estimate,
    load_ground_truth,
    save_ground_truth,
    wrap_deg,
)
from .search import (
    METRICS,
    Hit,
    Metric,
    RetrievalResult,
    distance,
    query_image,
    top_k,
)
from .synthetic import (
    generate_arrow_dataset,
    random_arrow_style,
    synth_cartoon,
    synth_smooth,
)

__all__ = [
    "__version__",
    "ArrowStyle",
    "BadMagicError",
    "BankLoadFailureError",
    "BankRecord",
    "BindFailureError",
    "ConfigInvalidError",
    "CorruptImageError",
    "DatasetManifest",
    "DescriptorConfig",
    "DimMismatchError",
    "EmptyBankError",
    "EmptyDatasetError",
    "EstimatorConfig",
    "ExperimentConfig",
    "FeatureBank",
    "FeatureVector",
    "GroundTruthTable",
    "Hit",
    "LabeledQuery",
    "METRICS",
    "ManifestDesyncError",
    "ManifestEntry",
    "Metric",
    "MissingGroundTruthError",
    "NonFiniteAngleError",
    "PercentOutOfRangeError",
    "PrecisionReport",
    "PrecisionRow",
    "RasterImage",
    "RetrievalResult",
    "RicbError",
    "SampleTooLargeError",
    "TimingReport",
    "UnreadableDirectoryError",
    "UnsupportedFormatError",
    "VersionMismatchError",
    "ZeroVectorError",
    "angular_error",
    "build_bank",
    "build_bank_from_images",
    "center_crop",
    "correct_orientation",
    "decode_image",
    "decode_image_bytes",
    "distance",
    "emit_csv",
    "estimate",
    "estimate_rotated_fraction",
    "extract",
    "generate_arrow_dataset",
    "import_embeddings",
    "improvement",
    "ingest_dataset",
    "load_bank",
    "load_ground_truth",
    "mean_precision",
    "precision_at_k",
    "png_bytes",
    "query_image",
    "random_arrow_style",
    "resize",
    "rotate",
    "rotation_experiment",
    "sample_bank",
    "save_bank",
    "save_ground_truth",
    "save_png",
    "synth_arrow",
    "synth_cartoon",
    "synth_smooth",
    "timing_benchmark",
    "top_k",
    "wrap_deg",
]
