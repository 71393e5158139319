"""GNN architecture search space: encoding, sampling, enumeration.

An architecture is a fixed-length vector of value indices, one per component
position.  A layer contributes five positions in the order
(attention, aggregation, activation, head count, hidden dimension), and a
space with ``l`` layers therefore has ``5*l`` positions.  Value labels are
stored as strings, including the numeric ones, so the canonical text encoding
is unambiguous; numeric consumers parse them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .rng import SplitMix64

__all__ = [
    "ComponentSpec",
    "SearchSpace",
    "Architecture",
    "ArchitectureParseError",
    "default_space",
    "space_size",
    "sample_uniform",
    "encode_arch",
    "decode_arch",
    "enumerate_space",
    "COMPONENT_ORDER",
]

COMPONENT_ORDER = ("att", "agg", "act", "head", "dim")

ATTENTION_VALUES = ("gat", "gcn", "cos", "const", "sym-gat", "linear", "gene-linear")
AGGREGATION_VALUES = ("mean", "max", "sum")
ACTIVATION_VALUES = (
    "tanh", "sigmoid", "relu", "linear", "softplus", "leaky_relu", "relu6", "elu",
)
HEAD_VALUES = ("1", "2", "4", "6", "8")
DIM_VALUES = ("8", "16", "32", "64", "128", "256", "512")

_DOMAINS = {
    "att": ATTENTION_VALUES,
    "agg": AGGREGATION_VALUES,
    "act": ACTIVATION_VALUES,
    "head": HEAD_VALUES,
    "dim": DIM_VALUES,
}


class ArchitectureParseError(ValueError):
    """Raised when a canonical architecture string does not decode."""


@dataclass(frozen=True)
class ComponentSpec:
    """One architecture component position and its ordered value domain."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"component {self.name!r} has an empty value domain")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"component {self.name!r} has duplicate values")


@dataclass(frozen=True)
class SearchSpace:
    """An ordered list of components, five per layer."""

    layers: int
    components: tuple[ComponentSpec, ...]

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if len(self.components) != 5 * self.layers:
            raise ValueError(
                f"expected {5 * self.layers} components for {self.layers} layers, "
                f"got {len(self.components)}"
            )

    @property
    def positions(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class Architecture:
    """Value-index vector; genes[i] indexes into components[i].values."""

    genes: tuple[int, ...]

    def __post_init__(self):
        if any(g < 0 for g in self.genes):
            raise ValueError("genes must be non-negative indices")


def default_space(layers: int) -> SearchSpace:
    """Build the standard five-component-per-layer space.

    Per-layer domain sizes are [7, 3, 8, 5, 7], so one layer spans 5,880
    architectures and the space size grows as 5,880**layers.
    """
    if layers < 1:
        raise ValueError("layers must be >= 1")
    components = []
    for layer in range(1, layers + 1):
        for base in COMPONENT_ORDER:
            components.append(ComponentSpec(name=f"{base}{layer}", values=_DOMAINS[base]))
    return SearchSpace(layers=layers, components=tuple(components))


def space_size(space: SearchSpace) -> int:
    """Exact number of architectures in the space (Python int, no overflow)."""
    size = 1
    for comp in space.components:
        size *= len(comp.values)
    return size


def validate_arch(space: SearchSpace, arch: Architecture) -> None:
    if len(arch.genes) != space.positions:
        raise ValueError(
            f"architecture has {len(arch.genes)} genes, space has {space.positions} positions"
        )
    for i, g in enumerate(arch.genes):
        if g >= len(space.components[i].values):
            raise ValueError(
                f"gene {g} out of range for component {space.components[i].name!r}"
            )


def sample_uniform(space: SearchSpace, rng: SplitMix64) -> Architecture:
    """Draw each gene independently and uniformly over its domain."""
    return Architecture(
        genes=tuple(rng.next_below(len(comp.values)) for comp in space.components)
    )


def encode_arch(space: SearchSpace, arch: Architecture) -> str:
    """Canonical string: labels comma-joined per layer, layers semicolon-joined."""
    validate_arch(space, arch)
    layers = []
    for layer in range(space.layers):
        start = 5 * layer
        labels = [
            space.components[start + j].values[arch.genes[start + j]] for j in range(5)
        ]
        layers.append(",".join(labels))
    return ";".join(layers)


def decode_arch(space: SearchSpace, text: str) -> Architecture:
    """Inverse of :func:`encode_arch`; errors name the offending position."""
    layer_texts = text.split(";")
    if len(layer_texts) != space.layers:
        raise ArchitectureParseError(
            f"expected {space.layers} layers, got {len(layer_texts)}"
        )
    genes: list[int] = []
    for layer_idx, layer_text in enumerate(layer_texts, start=1):
        fields = layer_text.split(",")
        if len(fields) != 5:
            raise ArchitectureParseError(
                f"layer {layer_idx} has {len(fields)} fields (expected 5)"
            )
        for field_idx, label in enumerate(fields):
            comp = space.components[5 * (layer_idx - 1) + field_idx]
            try:
                genes.append(comp.values.index(label))
            except ValueError:
                raise ArchitectureParseError(
                    f"unknown value {label!r} for component {comp.name!r} "
                    f"(layer {layer_idx}, field {field_idx + 1})"
                ) from None
    return Architecture(genes=tuple(genes))


def enumerate_space(space: SearchSpace, cap: int = 10**6) -> Iterator[Architecture]:
    """Yield every architecture exactly once, in lexicographic gene order.

    Refuses to enumerate spaces larger than ``cap`` so callers cannot start an
    enumeration that will never finish.
    """
    size = space_size(space)
    if size > cap:
        raise ValueError(
            f"space has {size} architectures, exceeding the enumeration cap of {cap}"
        )
    ranges = [range(len(comp.values)) for comp in space.components]
    for genes in itertools.product(*ranges):
        yield Architecture(genes=genes)
