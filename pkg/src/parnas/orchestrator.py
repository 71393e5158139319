"""The search engine: parallel initialization, entropy-guided epochs, baseline.

One run proceeds as: N workers each sample M architectures from private
seeded streams (initial population); the top-n of those seed the sharing
population; then each epoch computes the entropy/probability vectors and the
admission threshold from a snapshot of the archive, has every worker
wheel-select k parents and mutate them with its own mutation count, evaluates
all children, and merges them back at a single barrier.

Determinism contract: worker streams are derived from the run seed and
advanced only by their own worker's draws, and evaluation logging follows
request order, so histories are byte-identical regardless of how many threads
actually execute the epoch.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

from .entropy import entropy_vector, mutation_probabilities
from .evaluation import (
    EvaluationResult,
    EvaluatorConfig,
    FailedEvaluation,
    FitnessCache,
    build_evaluator,
    evaluate_batch,
)
from .evolution import (
    FitnessRecord,
    SharingPopulation,
    admission_threshold,
    merge_children,
    mutate,
    select_top_n,
    wheel_select,
)
from .rng import worker_stream
from .space import Architecture, SearchSpace, default_space, encode_arch, sample_uniform, space_size

__all__ = [
    "SearchConfig",
    "EpochReport",
    "EvalLogRow",
    "SearchHistory",
    "InitializationError",
    "run_search",
    "run_random_baseline",
    "top10_progression",
    "SeedComparison",
    "ComparisonResult",
    "compare_runs",
    "history_csv_text",
    "epoch_csv_text",
    "best_json_text",
    "comparison_csv_text",
    "summary_csv_text",
]

logger = logging.getLogger(__name__)


class InitializationError(RuntimeError):
    """No usable record survived initialization."""


@dataclass(frozen=True)
class SearchConfig:
    """Engine hyperparameters; defaults follow the standard four-worker setup."""

    seed: int = 0
    workers: int = 4
    layers: int = 2
    init_per_worker: int = 100
    sharing_top_n: int = 20
    parents_k: int = 20
    mutations_per_worker: tuple[int, ...] = (1, 2, 3, 4)
    epochs: int = 20
    evaluator: EvaluatorConfig = field(default_factory=EvaluatorConfig.synthetic)
    budget_cap: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.init_per_worker < 1:
            raise ValueError("init_per_worker must be >= 1")
        if self.sharing_top_n < 1:
            raise ValueError("sharing_top_n must be >= 1")
        if self.parents_k < 1:
            raise ValueError("parents_k must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if len(self.mutations_per_worker) != self.workers:
            raise ValueError(
                f"mutations_per_worker has length {len(self.mutations_per_worker)}, "
                f"expected one entry per worker ({self.workers})"
            )
        for m in self.mutations_per_worker:
            if not 1 <= m <= 5 * self.layers:
                raise ValueError(
                    f"mutation count {m} outside [1, {5 * self.layers}] for {self.layers} layers"
                )
        if self.budget_cap is not None and self.budget_cap < 1:
            raise ValueError("budget_cap must be >= 1 when set")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "workers": self.workers,
            "layers": self.layers,
            "init_per_worker": self.init_per_worker,
            "sharing_top_n": self.sharing_top_n,
            "parents_k": self.parents_k,
            "mutations_per_worker": list(self.mutations_per_worker),
            "epochs": self.epochs,
            "evaluator": self.evaluator.to_dict(),
            "budget_cap": self.budget_cap,
        }

    @staticmethod
    def from_dict(data: dict) -> "SearchConfig":
        """Build a config from a JSON object; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        known = {
            "seed", "workers", "layers", "init_per_worker", "sharing_top_n",
            "parents_k", "mutations_per_worker", "epochs", "evaluator", "budget_cap",
        }
        for key in data:
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")

        def _int(key: str, default: int) -> int:
            value = data.get(key, default)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"config key {key!r} must be an integer")
            return value

        mutations = data.get("mutations_per_worker", [1, 2, 3, 4])
        if not isinstance(mutations, list) or not all(
            isinstance(m, int) and not isinstance(m, bool) for m in mutations
        ):
            raise ValueError("config key 'mutations_per_worker' must be a list of integers")
        budget_cap = data.get("budget_cap")
        if budget_cap is not None and (
            isinstance(budget_cap, bool) or not isinstance(budget_cap, int)
        ):
            raise ValueError("config key 'budget_cap' must be an integer or null")
        evaluator = EvaluatorConfig.from_dict(data.get("evaluator", {"kind": "synthetic"}))
        try:
            return SearchConfig(
                seed=_int("seed", 0),
                workers=_int("workers", 4),
                layers=_int("layers", 2),
                init_per_worker=_int("init_per_worker", 100),
                sharing_top_n=_int("sharing_top_n", 20),
                parents_k=_int("parents_k", 20),
                mutations_per_worker=tuple(mutations),
                epochs=_int("epochs", 20),
                evaluator=evaluator,
                budget_cap=budget_cap,
            )
        except ValueError as exc:
            raise ValueError(f"invalid config: {exc}") from exc


@dataclass(frozen=True)
class EvalLogRow:
    index: int
    epoch: int
    worker: int
    architecture: str
    fitness: float
    cumulative_best: float
    top10_mean: float


@dataclass(frozen=True)
class EpochReport:
    epoch: int
    evaluations: int
    best_fitness: float
    top10_mean: float
    threshold: float
    entropy: tuple[float, ...]
    probabilities: tuple[float, ...]
    admitted: int
    rejected: int
    duplicates: int
    failures: int


@dataclass
class SearchHistory:
    config: dict
    epoch_reports: list[EpochReport] = field(default_factory=list)
    evaluations: list[EvalLogRow] = field(default_factory=list)
    best: FitnessRecord | None = None
    duplicate_requests: int = 0
    failed_requests: int = 0
    truncated_requests: int = 0

    @property
    def unique_evaluations(self) -> int:
        return len(self.evaluations)


class _RunningTop10:
    """Running mean of the 10 best values seen so far (all values while < 10)."""

    def __init__(self):
        self._heap: list[float] = []

    def push(self, value: float) -> None:
        if len(self._heap) < 10:
            heapq.heappush(self._heap, value)
        elif value > self._heap[0]:
            heapq.heapreplace(self._heap, value)

    @property
    def mean(self) -> float:
        return sum(self._heap) / len(self._heap)


class _RunState:
    """Per-run budget accounting and evaluation log."""

    def __init__(self, space: SearchSpace, history: SearchHistory, cap: int | None):
        self.space = space
        self.history = history
        self.cap = cap
        self.seen: set[str] = set()
        self.top10 = _RunningTop10()
        self.best_record: FitnessRecord | None = None

    @property
    def unique_count(self) -> int:
        return len(self.history.evaluations)

    def cap_reached(self) -> bool:
        return self.cap is not None and self.unique_count >= self.cap

    def record(self, record: FitnessRecord, key: str) -> None:
        self.seen.add(key)
        self.top10.push(record.fitness)
        if self.best_record is None or record.fitness > self.best_record.fitness:
            self.best_record = record
        self.history.evaluations.append(
            EvalLogRow(
                index=self.unique_count + 1,
                epoch=record.epoch,
                worker=record.worker,
                architecture=key,
                fitness=record.fitness,
                cumulative_best=self.best_record.fitness,
                top10_mean=self.top10.mean,
            )
        )


def _evaluate_capped(
    requests: Sequence[tuple[int, Architecture]],
    origin: str,
    epoch: int,
    evaluator,
    cache: FitnessCache,
    state: _RunState,
    threads: int = 1,
) -> list[tuple[int, FitnessRecord | None, str]]:
    """Evaluate requests in order, stopping once the budget cap is consumed.

    Returns (worker, record-or-None, key) per evaluated request; ``None``
    marks a failed evaluation.  Requests beyond the cap are never dispatched
    and are counted as truncated.  Chunks are sized by the remaining budget so
    a chunk can never overshoot the cap (duplicates consume none of it).
    """
    outcomes: list[tuple[int, FitnessRecord | None, str]] = []
    pos = 0
    while pos < len(requests):
        if state.cap is not None:
            remaining = state.cap - state.unique_count
            if remaining <= 0:
                break
            chunk = requests[pos : pos + remaining]
        else:
            chunk = requests[pos:]
        archs = [arch for _w, arch in chunk]
        results = evaluate_batch(archs, evaluator, cache, threads=threads)
        for (worker, arch), result in zip(chunk, results):
            key = encode_arch(state.space, arch)
            if isinstance(result, FailedEvaluation):
                state.history.failed_requests += 1
                logger.warning("evaluation failed for %s: %s", key, result.message)
                outcomes.append((worker, None, key))
                continue
            record = FitnessRecord(
                arch=arch, fitness=result.fitness, origin=origin, worker=worker, epoch=epoch
            )
            if key in state.seen:
                state.history.duplicate_requests += 1
            else:
                state.record(record, key)
            outcomes.append((worker, record, key))
        pos += len(chunk)
    state.history.truncated_requests += len(requests) - pos
    return outcomes


def run_search(
    config: SearchConfig,
    space: SearchSpace | None = None,
    threads: int = 1,
    evaluator=None,
) -> tuple[FitnessRecord, SearchHistory]:
    """Run the full guided search; returns the best record and the history.

    ``threads`` controls how many OS threads generate children and drive the
    backends; it never changes the result (worker streams are private and all
    bookkeeping follows request order).  Passing ``evaluator`` overrides the
    configured backend; the caller then owns its lifecycle.
    """
    if space is None:
        space = default_space(config.layers)
    if evaluator is not None:
        return _run_search(config, space, evaluator, threads)
    evaluator = build_evaluator(config.evaluator, space)
    try:
        return _run_search(config, space, evaluator, threads)
    finally:
        evaluator.close()


def _run_search(config, space, evaluator, threads):
    history = SearchHistory(config={"method": "guided", **config.to_dict()})
    state = _RunState(space, history, config.budget_cap)
    cache = FitnessCache()
    streams = [worker_stream(config.seed, w) for w in range(config.workers)]
    archive = SharingPopulation(space, config.sharing_top_n)

    # parallel initialization: all draws happen up front so streams advance
    # identically even when the budget cap truncates evaluation
    requests = [
        (w, sample_uniform(space, streams[w]))
        for w in range(config.workers)
        for _ in range(config.init_per_worker)
    ]
    outcomes = _evaluate_capped(requests, "init", 0, evaluator, cache, state, threads)
    initial: list[FitnessRecord] = []
    seen_keys: set[str] = set()
    for _worker, record, key in outcomes:
        if record is not None and key not in seen_keys:
            seen_keys.add(key)
            initial.append(record)
    if not initial:
        raise InitializationError(
            "initialization produced no usable records (all evaluations failed)"
        )
    for record in select_top_n(initial, config.sharing_top_n):
        archive.add(record)

    for epoch in range(1, config.epochs + 1):
        if state.cap_reached():
            break
        snapshot = archive.snapshot()
        entropies = entropy_vector(snapshot, space)
        probabilities = mutation_probabilities(entropies)
        threshold = admission_threshold(snapshot, config.sharing_top_n)

        # each worker consumes only its own stream: k parent draws, then per
        # child its position draws followed by its value draws
        def generate(w: int) -> list[Architecture]:
            parents = wheel_select(snapshot, config.parents_k, streams[w])
            return [
                mutate(p.arch, probabilities, config.mutations_per_worker[w], space, streams[w])
                for p in parents
            ]

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                per_worker = list(pool.map(generate, range(config.workers)))
        else:
            per_worker = [generate(w) for w in range(config.workers)]
        requests = [
            (w, child) for w in range(config.workers) for child in per_worker[w]
        ]
        outcomes = _evaluate_capped(requests, "child", epoch, evaluator, cache, state, threads)
        failures = sum(1 for _w, record, _k in outcomes if record is None)
        children = [(record, key) for _w, record, key in outcomes if record is not None]
        admission = merge_children(archive, children, threshold)
        history.epoch_reports.append(
            EpochReport(
                epoch=epoch,
                evaluations=state.unique_count,
                best_fitness=state.best_record.fitness,
                top10_mean=state.top10.mean,
                threshold=threshold,
                entropy=tuple(float(h) for h in entropies),
                probabilities=tuple(float(p) for p in probabilities),
                admitted=admission.admitted,
                rejected=admission.rejected,
                duplicates=admission.duplicates,
                failures=failures,
            )
        )

    history.best = state.best_record
    return state.best_record, history


def run_random_baseline(
    budget: int,
    space: SearchSpace,
    evaluator,
    seed: int,
    evaluator_info: dict | None = None,
) -> SearchHistory:
    """Uniformly sample unique architectures until ``budget`` evaluations.

    Re-sampled duplicates consume no budget.  If the space is smaller than the
    budget the run stops at exhaustion with a warning.  ``evaluator_info``
    optionally records the evaluator configuration in the history snapshot.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    size = space_size(space)
    target = budget
    if size < budget:
        logger.warning(
            "space holds only %d architectures; budget %d truncated to exhaustion",
            size,
            budget,
        )
        target = size
    if evaluator_info is None:
        evaluator_info = {"backend": type(evaluator).__name__}
        if hasattr(evaluator, "seed"):
            evaluator_info["seed"] = evaluator.seed
    history = SearchHistory(
        config={
            "method": "random",
            "budget": budget,
            "seed": seed,
            "layers": space.layers,
            "evaluator": evaluator_info,
        }
    )
    state = _RunState(space, history, cap=target)
    cache = FitnessCache()
    rng = worker_stream(seed, 0)
    failed_keys: set[str] = set()
    while state.unique_count < target:
        arch = sample_uniform(space, rng)
        key = encode_arch(space, arch)
        if key in state.seen or key in failed_keys:
            continue
        result = evaluate_batch([arch], evaluator, cache)[0]
        if isinstance(result, FailedEvaluation):
            failed_keys.add(key)
            history.failed_requests += 1
        else:
            state.record(
                FitnessRecord(arch=arch, fitness=result.fitness, origin="init", worker=0, epoch=0),
                key,
            )
        if len(state.seen) + len(failed_keys) >= size:
            if state.unique_count < target:
                logger.warning(
                    "space exhausted after %d evaluations (budget %d)",
                    state.unique_count,
                    budget,
                )
            break
    history.best = state.best_record
    return history


def top10_progression(history: SearchHistory) -> list[tuple[int, float]]:
    """(evaluation count, mean of the 10 best fitnesses so far) per evaluation."""
    if not history.evaluations:
        raise ValueError("history has no evaluations")
    top10 = _RunningTop10()
    out = []
    for t, row in enumerate(history.evaluations, start=1):
        top10.push(row.fitness)
        out.append((t, top10.mean))
    return out


# -- paired comparison -------------------------------------------------------

@dataclass(frozen=True)
class SeedComparison:
    seed: int
    guided_final: float
    random_final: float
    winner: str  # "guided", "random", or "tie"


@dataclass
class ComparisonResult:
    budget: int
    seeds: tuple[int, ...]
    rows: list[tuple[int, str, float, int]]  # (evaluations, method, top10_mean, seed)
    summaries: list[SeedComparison]
    guided_histories: list[SearchHistory]
    random_histories: list[SearchHistory]

    @property
    def guided_wins(self) -> int:
        """Seeds where guided search finished at least as high as random."""
        return sum(1 for s in self.summaries if s.guided_final >= s.random_final)


def compare_runs(
    config: SearchConfig, budget: int, seeds: Sequence[int], threads: int = 1
) -> ComparisonResult:
    """Run guided search and the random baseline at the same budget per seed."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not seeds:
        raise ValueError("at least one seed is required")
    space = default_space(config.layers)
    rows: list[tuple[int, str, float, int]] = []
    summaries: list[SeedComparison] = []
    guided_histories: list[SearchHistory] = []
    random_histories: list[SearchHistory] = []
    for seed in seeds:
        guided_config = replace(config, seed=seed, budget_cap=budget)
        _best, guided = run_search(guided_config, space=space, threads=threads)
        evaluator = build_evaluator(config.evaluator, space)
        try:
            random_history = run_random_baseline(
                budget, space, evaluator, seed, evaluator_info=config.evaluator.to_dict()
            )
        finally:
            evaluator.close()
        guided_prog = top10_progression(guided)
        random_prog = top10_progression(random_history)
        if len(guided_prog) < budget:
            logger.warning(
                "guided run for seed %d reached only %d/%d unique evaluations "
                "(raise epochs to exhaust the budget)",
                seed,
                len(guided_prog),
                budget,
            )
        rows.extend((t, "guided", value, seed) for t, value in guided_prog)
        rows.extend((t, "random", value, seed) for t, value in random_prog)
        guided_final = guided_prog[-1][1]
        random_final = random_prog[-1][1]
        if guided_final > random_final:
            winner = "guided"
        elif random_final > guided_final:
            winner = "random"
        else:
            winner = "tie"
        summaries.append(SeedComparison(seed, guided_final, random_final, winner))
        guided_histories.append(guided)
        random_histories.append(random_history)
    return ComparisonResult(
        budget=budget,
        seeds=tuple(seeds),
        rows=rows,
        summaries=summaries,
        guided_histories=guided_histories,
        random_histories=random_histories,
    )


# -- serialization -----------------------------------------------------------

def _fmt(value) -> str:
    # repr of the builtin float is shortest-round-trip; numpy scalars are
    # coerced first so their verbose repr never leaks into files
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _csv_text(header: Sequence[str], rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buffer.getvalue()


def history_csv_text(history: SearchHistory) -> str:
    """One row per unique evaluation, in evaluation order."""
    return _csv_text(
        ["index", "epoch", "worker", "architecture", "fitness", "cumulative_best", "top10_mean"],
        (
            (r.index, r.epoch, r.worker, r.architecture, r.fitness, r.cumulative_best, r.top10_mean)
            for r in history.evaluations
        ),
    )


def epoch_csv_text(history: SearchHistory) -> str:
    """One row per search epoch with the entropy and probability vectors."""
    positions = len(history.epoch_reports[0].entropy) if history.epoch_reports else 0
    header = (
        ["epoch", "evals", "best", "top10_mean", "F"]
        + [f"h_{i + 1}" for i in range(positions)]
        + [f"p_{i + 1}" for i in range(positions)]
    )
    rows = (
        [r.epoch, r.evaluations, r.best_fitness, r.top10_mean, r.threshold]
        + list(r.entropy)
        + list(r.probabilities)
        for r in history.epoch_reports
    )
    return _csv_text(header, rows)


def best_json_text(history: SearchHistory) -> str:
    if history.best is None:
        raise ValueError("history has no best record")
    # the log row for the best fitness already carries the canonical string
    best_row = max(history.evaluations, key=lambda r: r.fitness)
    document = {
        "architecture": best_row.architecture,
        "fitness": history.best.fitness,
        "config": history.config,
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def comparison_csv_text(result: ComparisonResult) -> str:
    return _csv_text(
        ["evaluations", "method", "top10_mean", "seed"],
        ((t, method, value, seed) for t, method, value, seed in result.rows),
    )


def summary_csv_text(result: ComparisonResult) -> str:
    return _csv_text(
        ["seed", "guided_final_top10", "random_final_top10", "winner"],
        ((s.seed, s.guided_final, s.random_final, s.winner) for s in result.summaries),
    )
