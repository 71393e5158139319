"""Citation-network loading and a synthetic stand-in graph.

The real benchmarks (cora, citeseer, pubmed) are read from the standard
eight-file pickle layout (``ind.<name>.x`` and friends) out of a local
directory; nothing is downloaded. The synthetic generator produces a
deterministic homophilous graph with the same tensor layout so everything
downstream can be exercised without the benchmark files.
"""

import os
import pickle
import sys
from dataclasses import dataclass

import numpy as np
import torch


@dataclass(frozen=True)
class DatasetSpec:
    """Published statistics for one citation benchmark, used for validation."""

    name: str
    nodes: int
    edges: int
    features: int
    classes: int
    train_size: int
    val_size: int
    test_size: int


DATASETS = {
    "cora": DatasetSpec("cora", 2708, 5429, 1433, 7, 140, 500, 1000),
    "citeseer": DatasetSpec("citeseer", 3327, 4732, 3703, 6, 120, 500, 1000),
    "pubmed": DatasetSpec("pubmed", 19717, 44338, 500, 3, 60, 500, 1000),
}

DEFAULT_DATA_DIR = os.environ.get("GNN_EVALUATOR_DATA", "data")

_PLANETOID_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")


@dataclass
class GraphData:
    """One graph with node features, labels, and fixed split masks."""

    x: torch.Tensor  # (N, F) float
    edge_index: torch.Tensor  # (2, E) long, directed pairs
    y: torch.Tensor  # (N,) long
    train_mask: torch.Tensor
    val_mask: torch.Tensor
    test_mask: torch.Tensor

    @property
    def num_nodes(self):
        return self.x.shape[0]

    @property
    def num_features(self):
        return self.x.shape[1]

    @property
    def num_classes(self):
        return int(self.y.max().item()) + 1


def planetoid_available(name: str, data_dir: str = DEFAULT_DATA_DIR) -> bool:
    files = [f"ind.{name}.{part}" for part in _PLANETOID_PARTS]
    files.append(f"ind.{name}.test.index")
    return all(os.path.exists(os.path.join(data_dir, f)) for f in files)


def _read_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def load_planetoid(name: str, data_dir: str = DEFAULT_DATA_DIR) -> GraphData:
    """Load one benchmark from the eight-file pickle layout.

    File semantics: ``x``/``y`` hold the labeled training nodes, ``allx``/
    ``ally`` additionally cover validation and unlabeled nodes, ``tx``/``ty``
    hold the test nodes whose positions come from ``test.index``, and
    ``graph`` is an adjacency dict. Validation is the block of spec.val_size
    nodes right after the training block, matching the published splits.
    """
    if name not in DATASETS:
        raise ValueError(f"unknown dataset {name!r}, expected one of {sorted(DATASETS)}")
    spec = DATASETS[name]
    if not planetoid_available(name, data_dir):
        raise FileNotFoundError(
            f"benchmark files for {name!r} not found under {data_dir!r}; "
            f"expected ind.{name}.x .y .tx .ty .allx .ally .graph test.index"
        )

    parts = {
        part: _read_pickle(os.path.join(data_dir, f"ind.{name}.{part}"))
        for part in _PLANETOID_PARTS
    }
    with open(os.path.join(data_dir, f"ind.{name}.test.index")) as f:
        test_idx = np.array([int(line.strip()) for line in f if line.strip()])

    allx = parts["allx"].toarray()
    tx = parts["tx"].toarray()
    ally = np.asarray(parts["ally"])
    ty = np.asarray(parts["ty"])

    # test rows sit after allx; test.index is shuffled, so scatter tx rows
    # to their node ids instead of assuming file order
    if test_idx.min() != allx.shape[0]:
        raise ValueError(
            f"{name}: test ids start at {test_idx.min()}, expected {allx.shape[0]}"
        )
    span = test_idx.max() - test_idx.min() + 1  # citeseer has gaps in the span
    num_nodes = allx.shape[0] + span

    features = np.zeros((num_nodes, allx.shape[1]), dtype=np.float32)
    features[: allx.shape[0]] = allx
    features[test_idx] = tx

    # nodes in neither file (citeseer gap ids) keep an all-zero row and
    # argmax to class 0; they appear in no split mask
    onehot = np.zeros((num_nodes, ally.shape[1]), dtype=np.float32)
    onehot[: ally.shape[0]] = ally
    onehot[test_idx] = ty
    labels = onehot.argmax(axis=1)

    src, dst = [], []
    for node, neighbors in parts["graph"].items():
        for other in neighbors:
            src.append(node)
            dst.append(other)
    edge_index = torch.tensor([src, dst], dtype=torch.long)
    edge_index = _symmetrize(edge_index)

    train_idx = np.arange(parts["y"].shape[0])
    val_idx = np.arange(parts["y"].shape[0], parts["y"].shape[0] + spec.val_size)
    test_idx = test_idx[:spec.test_size]

    if len(train_idx) != spec.train_size:
        print(
            f"warning: {name} train split has {len(train_idx)} nodes, "
            f"expected {spec.train_size}",
            file=sys.stderr,
        )

    def mask(indices):
        m = torch.zeros(num_nodes, dtype=torch.bool)
        m[torch.as_tensor(indices, dtype=torch.long)] = True
        return m

    return GraphData(
        x=torch.from_numpy(features),
        edge_index=edge_index,
        y=torch.from_numpy(labels).long(),
        train_mask=mask(train_idx),
        val_mask=mask(val_idx),
        test_mask=mask(test_idx),
    )


def _symmetrize(edge_index):
    both = torch.cat([edge_index, edge_index.flip(0)], dim=1)
    return torch.unique(both, dim=1)


def add_self_loops(data: GraphData) -> GraphData:
    """Append one i->i edge per node (deduplicated); standard training prep."""
    n = data.num_nodes
    loops = torch.arange(n, dtype=torch.long).repeat(2, 1)
    merged = torch.unique(torch.cat([data.edge_index, loops], dim=1), dim=1)
    return GraphData(
        x=data.x,
        edge_index=merged,
        y=data.y,
        train_mask=data.train_mask,
        val_mask=data.val_mask,
        test_mask=data.test_mask,
    )


def synthetic_citation(
    seed: int = 0,
    nodes: int = 400,
    features: int = 32,
    classes: int = 4,
    intra_degree: int = 5,
    inter_degree: int = 1,
) -> GraphData:
    """Deterministic homophilous graph shaped like a small citation network.

    Each node gets a noisy copy of its class prototype and mostly
    same-class edges, so message passing genuinely helps. Splits follow the
    benchmark convention: a small labeled block first (15 per class), then
    a validation block, the remainder is the test block.
    """
    gen = torch.Generator().manual_seed(seed)

    y = torch.arange(nodes) % classes  # round-robin so every block is balanced
    prototypes = torch.randn(classes, features, generator=gen)
    x = prototypes[y] + torch.randn(nodes, features, generator=gen) * 1.5

    src, dst = [], []
    members = [torch.nonzero(y == c).flatten() for c in range(classes)]
    for node in range(nodes):
        own = members[y[node]]
        picks = own[torch.randint(len(own), (intra_degree,), generator=gen)]
        for other in picks.tolist():
            if other != node:
                src.append(node)
                dst.append(other)
        strangers = torch.randint(nodes, (inter_degree,), generator=gen)
        for other in strangers.tolist():
            if other != node:
                src.append(node)
                dst.append(other)
    edge_index = _symmetrize(torch.tensor([src, dst], dtype=torch.long))

    train_size = 15 * classes
    val_size = (nodes - train_size) // 2

    def mask(lo, hi):
        m = torch.zeros(nodes, dtype=torch.bool)
        m[lo:hi] = True
        return m

    return GraphData(
        x=x,
        edge_index=edge_index,
        y=y,
        train_mask=mask(0, train_size),
        val_mask=mask(train_size, train_size + val_size),
        test_mask=mask(train_size + val_size, nodes),
    )


def load_dataset(name: str, data_dir: str = DEFAULT_DATA_DIR, seed: int = 0) -> GraphData:
    """Dispatch by name; "synthetic" never touches the filesystem."""
    if name == "synthetic":
        return synthetic_citation(seed=seed)
    return load_planetoid(name, data_dir)
