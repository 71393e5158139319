"""Per-component information entropy and mutation-selection probabilities.

Over the current sharing population, each component position gets a Shannon
entropy (base 2) of its value-index distribution; a softmax over the entropy
vector yields the probability that a position is picked for mutation.  Low
entropy means the population agrees on a value, so that position is mutated
less; uncertain positions attract more exploration.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .space import SearchSpace

__all__ = [
    "FrequencyTable",
    "component_frequencies",
    "entropy_vector",
    "mutation_probabilities",
]


@dataclass(frozen=True)
class FrequencyTable:
    """Occurrence counts of value indices at one component position."""

    position: int
    counts: dict[int, int]
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("total must be >= 1")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts must sum to total")


def component_frequencies(population: Sequence, position: int) -> FrequencyTable:
    """Count value indices occurring at ``position`` across the population.

    ``population`` is a sequence of fitness records (anything with an ``arch``
    attribute carrying genes).
    """
    if not population:
        raise ValueError("population must be non-empty")
    counts = Counter(record.arch.genes[position] for record in population)
    return FrequencyTable(position=position, counts=dict(counts), total=len(population))


def entropy_vector(population: Sequence, space: SearchSpace) -> np.ndarray:
    """Shannon entropy in bits per component position, relative frequencies.

    A value absent from the population contributes nothing (0*log2(0) := 0),
    so each entry lies in [0, log2(domain size)].
    """
    if not population:
        raise ValueError("population must be non-empty")
    genes = np.array([record.arch.genes for record in population], dtype=np.int64)
    total = genes.shape[0]
    out = np.zeros(space.positions, dtype=np.float64)
    for i in range(space.positions):
        counts = np.bincount(genes[:, i], minlength=len(space.components[i].values))
        p = counts[counts > 0] / total
        out[i] = -np.sum(p * np.log2(p))
    return out


def mutation_probabilities(entropies: np.ndarray) -> np.ndarray:
    """Softmax (natural exponent) over the entropy vector.

    Max-subtraction keeps the exponentials bounded; entries are strictly
    positive and sum to 1.
    """
    h = np.asarray(entropies, dtype=np.float64)
    z = np.exp(h - h.max())
    return z / z.sum()
