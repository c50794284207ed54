"""Supervised binary embedding: discrete-optimization training, Hamming retrieval
and evaluation, backed by the C++ core."""

from ._core import (
    CodeMatrix,
    Config,
    Dataset,
    Error,
    HammingIndex,
    MetricsReport,
    Model,
    TrainStats,
    classification_metrics,
    encode,
    evaluate_retrieval,
    load_codes,
    load_dataset,
    load_model,
    mean_average_precision,
    pack,
    precision_at_k,
    save_codes,
    save_dataset,
    split,
    synth_clusters,
    train,
)

__all__ = [
    "CodeMatrix",
    "Config",
    "Dataset",
    "Error",
    "HammingIndex",
    "MetricsReport",
    "Model",
    "TrainStats",
    "classification_metrics",
    "encode",
    "evaluate_retrieval",
    "load_codes",
    "load_dataset",
    "load_model",
    "mean_average_precision",
    "pack",
    "precision_at_k",
    "save_codes",
    "save_dataset",
    "split",
    "synth_clusters",
    "train",
]

__version__ = "0.1.0"
