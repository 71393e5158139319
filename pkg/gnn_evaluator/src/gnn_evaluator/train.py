"""Optimization loop and accuracy reporting.

Fitness during search is validation accuracy after the final training
epoch; test accuracy is computed alongside but only surfaces in the report
path. A run whose loss goes non-finite stops immediately and scores zero
instead of raising, so upstream admission logic treats it like any other
bad architecture.
"""

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .datasets import GraphData, add_self_loops
from .model import build_model


@dataclass(frozen=True)
class GnnHyperparams:
    epochs: int = 300
    learning_rate: float = 0.005
    weight_decay: float = 0.0005  # L2
    dropout: float = 0.6

    def __post_init__(self):
        if self.epochs <= 0 or self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("epochs and learning rate must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout {self.dropout} outside [0, 1)")


@dataclass(frozen=True)
class TrainResult:
    val_accuracy: float
    test_accuracy: float
    diverged: bool = False
    note: str | None = None


def _accuracy(logits, y, mask) -> float:
    pred = logits[mask].argmax(dim=1)
    return float((pred == y[mask]).float().mean().item())


def train_model(model, data: GraphData, hyper: GnnHyperparams) -> TrainResult:
    """Adam + cross-entropy on the train split; accuracies from the last epoch."""
    optimizer = torch.optim.Adam(
        model.parameters(), lr=hyper.learning_rate, weight_decay=hyper.weight_decay
    )
    x, edge_index, y = data.x, data.edge_index, data.y
    for epoch in range(hyper.epochs):
        model.train()
        optimizer.zero_grad()
        logits = model(x, edge_index)
        loss = F.cross_entropy(logits[data.train_mask], y[data.train_mask])
        if not torch.isfinite(loss):
            return TrainResult(0.0, 0.0, diverged=True,
                               note=f"non-finite loss at epoch {epoch}")
        loss.backward()
        optimizer.step()

    model.eval()
    with torch.no_grad():
        logits = model(x, edge_index)
    if not torch.isfinite(logits).all():
        return TrainResult(0.0, 0.0, diverged=True, note="non-finite logits")
    return TrainResult(
        val_accuracy=_accuracy(logits, y, data.val_mask),
        test_accuracy=_accuracy(logits, y, data.test_mask),
    )


def evaluate_architecture(
    text: str,
    data: GraphData,
    hyper: GnnHyperparams = GnnHyperparams(),
    seed: int = 0,
    layers=None,
) -> TrainResult:
    """Seed, build the model for ``text``, train, score.

    Seeding precedes construction so parameter initialization is part of
    the reproducible run. Self-loops are added here as training prep.
    """
    torch.manual_seed(seed)
    prepared = add_self_loops(data)
    model = build_model(
        text, prepared.num_features, prepared.num_classes,
        layers=layers, dropout=hyper.dropout,
    )
    return train_model(model, prepared, hyper)


def report(text: str, data: GraphData, hyper: GnnHyperparams = GnnHyperparams(),
           repeats: int = 20):
    """Re-train ``repeats`` times over seeds 0..repeats-1; mean and spread
    of test accuracy."""
    results = [evaluate_architecture(text, data, hyper, seed=s) for s in range(repeats)]
    accs = torch.tensor([r.test_accuracy for r in results])
    std = float(accs.std().item()) if repeats > 1 else 0.0
    return float(accs.mean().item()), std, results
