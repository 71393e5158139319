"""Trains message-passing networks from architecture strings and serves
fitness over a newline-delimited JSON protocol."""

from .datasets import (
    DATASETS,
    DatasetSpec,
    GraphData,
    add_self_loops,
    load_dataset,
    load_planetoid,
    planetoid_available,
    synthetic_citation,
)
from .model import (
    ACTIVATIONS,
    AGGREGATORS,
    ATTENTION_KINDS,
    GnnModel,
    MessagePassingLayer,
    build_model,
    parameter_count,
    parse_architecture,
)
from .server import SpaceDescription, main, serve
from .train import (
    GnnHyperparams,
    TrainResult,
    evaluate_architecture,
    report,
    train_model,
)

__version__ = "0.1.0"
