"""Emotion classification pipeline for low-resource text corpora."""
from emopipe.corpus import (
    EMOTION_NAMES,
    Dataset,
    DistributionStats,
    Emotion,
    LabelVector,
    Sample,
    ValidationReport,
    class_distribution,
    load_split,
    validate,
    write_split,
)
from emopipe.encode import FeatureRecord, FeatureSet, HashTokenizer, encode_dataset, encode_text
from emopipe.labelspace import NeutralPolicy, reduce_dataset, to_dominant, to_one_hot
from emopipe.metrics import Averaging, MetricsReport, confusion_matrix, render_report, report
from emopipe.textnorm import normalize_text, preprocess_dataset

__version__ = "0.1.0"

__all__ = [
    "Averaging",
    "Dataset",
    "DistributionStats",
    "EMOTION_NAMES",
    "Emotion",
    "FeatureRecord",
    "FeatureSet",
    "HashTokenizer",
    "LabelVector",
    "MetricsReport",
    "NeutralPolicy",
    "Sample",
    "ValidationReport",
    "class_distribution",
    "confusion_matrix",
    "encode_dataset",
    "encode_text",
    "load_split",
    "normalize_text",
    "preprocess_dataset",
    "reduce_dataset",
    "render_report",
    "report",
    "to_dominant",
    "to_one_hot",
    "validate",
    "write_split",
]
