"""Lightweight botnet detection on NetFlow records."""

from ._core import (
    FlowsiftError,
    Model,
    average_precision,
    evaluate,
    feature_names,
    gini,
    parse_label,
    parse_port,
    port_bucket,
    roc_auc,
    sigmoid,
    synth,
    threshold_sweep,
    train,
)

__all__ = [
    "FlowsiftError",
    "Model",
    "average_precision",
    "evaluate",
    "feature_names",
    "gini",
    "parse_label",
    "parse_port",
    "port_bucket",
    "roc_auc",
    "sigmoid",
    "synth",
    "threshold_sweep",
    "train",
]
