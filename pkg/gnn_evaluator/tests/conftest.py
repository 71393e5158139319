import os

from gnn_evaluator.datasets import DEFAULT_DATA_DIR

DATA_DIR = os.environ.get("GNN_EVALUATOR_DATA", DEFAULT_DATA_DIR)
