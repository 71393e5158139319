"""Evolutionary operators: sharing population, wheel selection, mutation.

The sharing population is an append-only archive deduplicated by canonical
architecture string.  Parents are drawn fitness-proportionally from the whole
archive; children mutate a fixed number of positions chosen by the
entropy-derived probability vector; admission requires strictly beating the
mean fitness of the current top-n.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import SplitMix64
from .space import Architecture, SearchSpace, encode_arch

__all__ = [
    "FitnessRecord",
    "SharingPopulation",
    "AdmissionReport",
    "select_top_n",
    "admission_threshold",
    "wheel_select",
    "mutate",
    "merge_children",
]


@dataclass(frozen=True)
class FitnessRecord:
    """An architecture with its scalar fitness and provenance."""

    arch: Architecture
    fitness: float
    origin: str  # "init" or "child"
    worker: int
    epoch: int

    def __post_init__(self):
        if not 0.0 <= self.fitness <= 1.0:
            raise ValueError(f"fitness {self.fitness} outside [0, 1]")
        if self.origin not in ("init", "child"):
            raise ValueError(f"origin must be 'init' or 'child', got {self.origin!r}")


class SharingPopulation:
    """Append-only archive of fitness records, unique by canonical string."""

    def __init__(self, space: SearchSpace, top_n: int):
        if top_n < 1:
            raise ValueError("top_n must be >= 1")
        self.space = space
        self.top_n = top_n
        self.records: list[FitnessRecord] = []
        self._keys: set[str] = set()

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, key: str) -> bool:
        return key in self._keys

    def add(self, record: FitnessRecord, key: str | None = None) -> bool:
        """Append unless the architecture is already archived."""
        if key is None:
            key = encode_arch(self.space, record.arch)
        if key in self._keys:
            return False
        self._keys.add(key)
        self.records.append(record)
        return True

    def snapshot(self) -> tuple[FitnessRecord, ...]:
        """Immutable view for use during an epoch."""
        return tuple(self.records)


def select_top_n(archive: Sequence[FitnessRecord], n: int) -> list[FitnessRecord]:
    """The n highest-fitness records; ties keep earlier insertion order."""
    if not archive:
        raise ValueError("archive must be non-empty")
    if n < 1:
        raise ValueError("n must be >= 1")
    # sorted() is stable, so equal fitnesses stay in insertion order
    return sorted(archive, key=lambda r: -r.fitness)[:n]


def admission_threshold(archive: Sequence[FitnessRecord], n: int) -> float:
    """Mean fitness of the current top-n records."""
    top = select_top_n(archive, n)
    return sum(r.fitness for r in top) / len(top)


def wheel_select(
    population: Sequence[FitnessRecord], k: int, rng: SplitMix64
) -> list[FitnessRecord]:
    """k fitness-proportional draws with replacement (roulette wheel).

    Uses cumulative-sum inversion; an all-zero-fitness population falls back
    to uniform draws.
    """
    if not population:
        raise ValueError("population must be non-empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    total = sum(r.fitness for r in population)
    if total <= 0.0:
        return [population[rng.next_below(len(population))] for _ in range(k)]
    cumulative = []
    acc = 0.0
    for r in population:
        acc += r.fitness
        cumulative.append(acc)
    picks = []
    for _ in range(k):
        r = rng.next_float() * total
        idx = bisect_right(cumulative, r)
        if idx >= len(population):  # guard float roundoff at the top end
            idx = len(population) - 1
        picks.append(population[idx])
    return picks


def mutate(
    parent: Architecture,
    probabilities: np.ndarray,
    m: int,
    space: SearchSpace,
    rng: SplitMix64,
) -> Architecture:
    """Change exactly m genes of ``parent``.

    Positions are chosen by m sequential weighted draws without replacement
    (weights renormalized over the remaining eligible positions after each
    draw); each chosen gene is reassigned uniformly among the values different
    from its current one.  Positions with single-value domains are never
    eligible.  Draw order is fixed: all m position draws first, then one value
    draw per chosen position in selection order.
    """
    eligible = [i for i in range(space.positions) if len(space.components[i].values) >= 2]
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > len(eligible):
        raise ValueError(f"m={m} exceeds the {len(eligible)} mutable positions")
    weights = [float(probabilities[i]) for i in eligible]
    available = list(eligible)
    chosen: list[int] = []
    for _ in range(m):
        total = sum(weights)
        if total <= 0.0:
            # degenerate weights: fall back to a uniform draw
            idx = rng.next_below(len(available))
        else:
            r = rng.next_float() * total
            acc = 0.0
            idx = len(available) - 1
            for j, w in enumerate(weights):
                acc += w
                if r < acc:
                    idx = j
                    break
        chosen.append(available.pop(idx))
        weights.pop(idx)
    genes = list(parent.genes)
    for pos in chosen:
        size = len(space.components[pos].values)
        draw = rng.next_below(size - 1)
        genes[pos] = draw if draw < genes[pos] else draw + 1
    return Architecture(genes=tuple(genes))


@dataclass(frozen=True)
class AdmissionReport:
    admitted: int
    rejected: int
    duplicates: int


def merge_children(
    archive: SharingPopulation,
    children: Sequence[tuple[FitnessRecord, str]],
    threshold: float,
) -> AdmissionReport:
    """Admit children strictly above ``threshold``, skipping duplicates.

    ``children`` is an ordered sequence of (record, canonical string) pairs in
    (worker, child index) order; the order is part of the determinism
    contract.  Children duplicating an archived architecture (or an earlier
    admission from the same merge) count as duplicates regardless of fitness.
    """
    admitted = rejected = duplicates = 0
    for record, key in children:
        if key in archive:
            duplicates += 1
        elif record.fitness > threshold:
            archive.add(record, key)
            admitted += 1
        else:
            rejected += 1
    return AdmissionReport(admitted=admitted, rejected=rejected, duplicates=duplicates)
