"""Fitness evaluation: contract, cache, and the three backends.

A fitness evaluator maps an architecture to a scalar in [0, 1] (the
validation metric of the trained architecture, for real backends).  Three
backends are provided:

* synthetic  -- a bit-exact hash-based landscape for desk-scale experiments;
* tabular    -- exact-match lookup in a pre-computed CSV file;
* external   -- a child process speaking newline-delimited JSON on its
  stdin/stdout (the boundary to real GNN trainers).

All lookups go through a :class:`FitnessCache` keyed by canonical
architecture string, so re-evaluating a known architecture costs nothing and
unique evaluations can be counted exactly (the budget unit of search
efficiency comparisons).
"""

from __future__ import annotations

import json
import subprocess
import threading
import time
from dataclasses import dataclass
from queue import Empty, Queue
from typing import Sequence

from .rng import MASK64, mix64
from .space import Architecture, SearchSpace, encode_arch

__all__ = [
    "EvaluationError",
    "TabularLoadError",
    "MissingEntryError",
    "EvaluatorFailure",
    "EvaluatorConfig",
    "EvaluationResult",
    "FailedEvaluation",
    "FitnessCache",
    "synthetic_fitness",
    "SyntheticEvaluator",
    "load_tabular",
    "TabularEvaluator",
    "ExternalEvaluatorClient",
    "build_evaluator",
    "evaluate_batch",
]

INTERACTION_WEIGHT = 0.3


class EvaluationError(Exception):
    """Base class for evaluation failures."""


class TabularLoadError(EvaluationError):
    """A tabular fitness file could not be parsed."""


class MissingEntryError(EvaluationError):
    """A queried architecture has no row in the tabular file."""


class EvaluatorFailure(EvaluationError):
    """The external evaluator process broke the protocol or died."""


@dataclass(frozen=True)
class EvaluatorConfig:
    """Selects and parameterizes a fitness backend.

    Exactly the fields of the selected kind may be set: ``seed`` for
    synthetic, ``path`` for tabular, ``command`` and ``timeout`` for external.
    """

    kind: str
    seed: int | None = None
    path: str | None = None
    command: tuple[str, ...] | None = None
    timeout: float | None = None

    def __post_init__(self):
        required = {
            "synthetic": ("seed",),
            "tabular": ("path",),
            "external": ("command", "timeout"),
        }
        if self.kind not in required:
            raise ValueError(f"unknown evaluator kind {self.kind!r}")
        for field in ("seed", "path", "command", "timeout"):
            value = getattr(self, field)
            if field in required[self.kind]:
                if value is None:
                    raise ValueError(f"evaluator kind {self.kind!r} requires {field!r}")
            elif value is not None:
                raise ValueError(f"evaluator kind {self.kind!r} does not accept {field!r}")
        if self.kind == "external":
            if not self.command:
                raise ValueError("external evaluator command must be non-empty")
            if self.timeout <= 0:
                raise ValueError("external evaluator timeout must be positive")

    @staticmethod
    def synthetic(seed: int = 7) -> "EvaluatorConfig":
        return EvaluatorConfig(kind="synthetic", seed=seed)

    @staticmethod
    def tabular(path: str) -> "EvaluatorConfig":
        return EvaluatorConfig(kind="tabular", path=path)

    @staticmethod
    def external(command: Sequence[str], timeout: float = 60.0) -> "EvaluatorConfig":
        return EvaluatorConfig(kind="external", command=tuple(command), timeout=timeout)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "synthetic":
            out["seed"] = self.seed
        elif self.kind == "tabular":
            out["path"] = self.path
        else:
            out["command"] = list(self.command)
            out["timeout"] = self.timeout
        return out

    @staticmethod
    def from_dict(data: dict) -> "EvaluatorConfig":
        if not isinstance(data, dict):
            raise ValueError("evaluator config must be an object")
        kind = data.get("kind")
        if kind is None:
            raise ValueError("evaluator config missing 'kind'")
        allowed = {
            "synthetic": {"kind", "seed"},
            "tabular": {"kind", "path"},
            "external": {"kind", "command", "timeout"},
        }
        if kind not in allowed:
            raise ValueError(f"unknown evaluator kind {kind!r}")
        for key in data:
            if key not in allowed[kind]:
                raise ValueError(f"unknown evaluator key {key!r} for kind {kind!r}")
        if kind == "synthetic":
            seed = data.get("seed", 7)
            if not isinstance(seed, int) or isinstance(seed, bool):
                raise ValueError("evaluator key 'seed' must be an integer")
            return EvaluatorConfig.synthetic(seed)
        if kind == "tabular":
            path = data.get("path")
            if not isinstance(path, str):
                raise ValueError("evaluator key 'path' must be a string")
            return EvaluatorConfig.tabular(path)
        command = data.get("command")
        if (
            not isinstance(command, list)
            or not command
            or not all(isinstance(c, str) for c in command)
        ):
            raise ValueError("evaluator key 'command' must be a non-empty list of strings")
        timeout = data.get("timeout", 60.0)
        if isinstance(timeout, bool) or not isinstance(timeout, (int, float)):
            raise ValueError("evaluator key 'timeout' must be a number")
        return EvaluatorConfig.external(command, float(timeout))


@dataclass(frozen=True)
class EvaluationResult:
    arch: Architecture
    fitness: float
    cached: bool
    wall_time: float

    def __post_init__(self):
        if not 0.0 <= self.fitness <= 1.0:
            raise ValueError(f"fitness {self.fitness} outside [0, 1]")


@dataclass(frozen=True)
class FailedEvaluation:
    """Per-architecture error entry; a failed item never aborts its batch."""

    arch: Architecture
    message: str


class FitnessCache:
    """Canonical string -> fitness map with a unique-evaluation counter.

    Safe for concurrent read/insert; identical keys always carry identical
    values for deterministic backends, so last-write-wins is harmless.
    """

    def __init__(self):
        self._values: dict[str, float] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> float | None:
        with self._lock:
            return self._values.get(key)

    def put(self, key: str, fitness: float) -> None:
        with self._lock:
            self._values[key] = fitness

    def preload(self, values: dict[str, float]) -> None:
        with self._lock:
            self._values.update(values)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._values

    def __len__(self) -> int:
        with self._lock:
            return len(self._values)

    @property
    def unique_evaluations(self) -> int:
        return len(self)


# -- synthetic backend -------------------------------------------------------

def _chain(seed: int, fields: tuple[int, ...]) -> int:
    h = seed & MASK64
    for f in fields:
        h = mix64((h + f) & MASK64)
    return h


def _unit(h: int) -> float:
    return (h >> 11) * 2.0**-53


def synthetic_fitness(arch: Architecture, space: SearchSpace, seed: int) -> float:
    """Deterministic hash-based fitness in [0, 1), bit-identical everywhere.

    Each position contributes a unary term keyed by (position, value) and each
    consecutive pair a weighted interaction term keyed by (position, value,
    next value); the result is their normalized sum.  The interaction weight
    makes greedy per-component optimization suboptimal while keeping
    per-component frequencies informative.
    """
    positions = space.positions
    genes = arch.genes
    unary = 0.0
    for i in range(positions):
        unary += _unit(_chain(seed, (1, i, genes[i])))
    pair = 0.0
    for i in range(positions - 1):
        pair += _unit(_chain(seed, (2, i, genes[i], genes[i + 1])))
    beta = INTERACTION_WEIGHT
    return (unary + beta * pair) / (positions + beta * (positions - 1))


@dataclass(frozen=True)
class _BackendResult:
    fitness: float | None
    error: str | None
    wall_time: float


class SyntheticEvaluator:
    """Pure hash-based landscape; never fails."""

    concurrent_safe = True

    def __init__(self, space: SearchSpace, seed: int):
        self.space = space
        self.seed = seed

    def evaluate_many(self, items: Sequence[tuple[Architecture, str]]) -> list[_BackendResult]:
        out = []
        for arch, _key in items:
            t0 = time.perf_counter()
            fitness = synthetic_fitness(arch, self.space, self.seed)
            out.append(_BackendResult(fitness, None, time.perf_counter() - t0))
        return out

    def close(self) -> None:
        pass


# -- tabular backend ---------------------------------------------------------

class TabularEvaluator:
    """Exact-match lookup over a preloaded architecture -> fitness table."""

    concurrent_safe = True

    def __init__(self, space: SearchSpace, table: dict[str, float], path: str):
        self.space = space
        self.table = table
        self.path = path

    def evaluate_many(self, items: Sequence[tuple[Architecture, str]]) -> list[_BackendResult]:
        out = []
        for _arch, key in items:
            t0 = time.perf_counter()
            fitness = self.table.get(key)
            wall = time.perf_counter() - t0
            if fitness is None:
                out.append(_BackendResult(None, f"no tabular entry for {key!r}", wall))
            else:
                out.append(_BackendResult(fitness, None, wall))
        return out

    def lookup(self, key: str) -> float:
        if key not in self.table:
            raise MissingEntryError(f"no tabular entry for {key!r} in {self.path}")
        return self.table[key]

    def close(self) -> None:
        pass


def load_tabular(path: str, space: SearchSpace) -> TabularEvaluator:
    """Read a ``architecture,fitness`` CSV into a tabular evaluator.

    The architecture column is the canonical string (which itself contains
    commas), so rows are split on the last comma.  Fitness must parse as a
    decimal in [0, 1]; any malformed row fails the load with its line number.
    """
    table: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "architecture,fitness":
            raise TabularLoadError(
                f"{path}:1: expected header 'architecture,fitness', got {header!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, fitness_text = line.rpartition(",")
            if not key:
                raise TabularLoadError(f"{path}:{lineno}: missing fitness column")
            try:
                fitness = float(fitness_text)
            except ValueError:
                raise TabularLoadError(
                    f"{path}:{lineno}: fitness {fitness_text!r} is not a number"
                ) from None
            if not 0.0 <= fitness <= 1.0:
                raise TabularLoadError(
                    f"{path}:{lineno}: fitness {fitness} outside [0, 1]"
                )
            table[key] = fitness
    return TabularEvaluator(space=space, table=table, path=path)


# -- external backend --------------------------------------------------------

class ExternalEvaluatorClient:
    """Client for a child process speaking the line-delimited JSON protocol.

    Handshake: the client sends one ``init`` message describing the space and
    waits for ``ready``.  Each architecture becomes an ``evaluate`` request
    with a unique integer id; responses may arrive out of order and are
    matched by id.  The process is reused across batches.

    ``timeout`` bounds the silence between responses while requests are
    outstanding (not the total batch duration, so slow serial evaluators are
    not penalized for queueing).  A non-JSON line is attributed to the oldest
    outstanding request; process exit fails everything outstanding.  All
    failures surface as per-item error entries rather than exceptions, except
    startup failures, which raise :class:`EvaluatorFailure`.
    """

    concurrent_safe = False

    def __init__(self, space: SearchSpace, command: Sequence[str], timeout: float = 60.0):
        self.space = space
        self.command = list(command)
        self.timeout = timeout
        self.protocol_errors: list[str] = []
        self._proc: subprocess.Popen | None = None
        self._events: Queue = Queue()
        self._next_id = 0
        self._dead = False
        self._lock = threading.Lock()

    # protocol plumbing

    def _send(self, message: dict) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._dead = True

    def _reader_loop(self, stdout) -> None:
        for line in stdout:
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
                if not isinstance(msg, dict):
                    raise ValueError("not an object")
            except ValueError:
                self._events.put(("badline", line))
                continue
            self._events.put(("msg", msg))
        self._events.put(("eof", None))

    def start(self) -> None:
        """Launch the process and complete the init/ready handshake."""
        if self._proc is not None:
            if self._dead:
                raise EvaluatorFailure("evaluator process is no longer usable")
            return
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            self._dead = True
            raise EvaluatorFailure(f"could not launch evaluator: {exc}") from exc
        threading.Thread(
            target=self._reader_loop, args=(self._proc.stdout,), daemon=True
        ).start()
        self._send(
            {
                "type": "init",
                "layers": self.space.layers,
                "components": [
                    {"name": c.name, "values": list(c.values)}
                    for c in self.space.components
                ],
            }
        )
        deadline = time.monotonic() + self.timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._dead = True
                raise EvaluatorFailure("timed out waiting for evaluator ready message")
            try:
                kind, payload = self._events.get(timeout=remaining)
            except Empty:
                continue
            if kind == "eof":
                self._dead = True
                raise EvaluatorFailure("evaluator exited before sending ready")
            if kind == "badline":
                self._dead = True
                raise EvaluatorFailure(
                    f"evaluator emitted a non-protocol line before ready: {payload!r}"
                )
            if payload.get("type") == "ready":
                return
            self.protocol_errors.append(f"unexpected message before ready: {payload!r}")

    def evaluate_many(self, items: Sequence[tuple[Architecture, str]]) -> list[_BackendResult]:
        with self._lock:
            return self._evaluate_many_locked(items)

    def _evaluate_many_locked(self, items) -> list[_BackendResult]:
        try:
            self.start()
        except EvaluatorFailure as exc:
            return [_BackendResult(None, str(exc), 0.0) for _ in items]
        results: list[_BackendResult | None] = [None] * len(items)
        pending: dict[int, int] = {}  # request id -> item index, insertion = send order
        sent_at: dict[int, float] = {}
        for idx, (_arch, key) in enumerate(items):
            rid = self._next_id
            self._next_id += 1
            pending[rid] = idx
            sent_at[rid] = time.perf_counter()
            self._send({"type": "evaluate", "id": rid, "architecture": key})

        def fail(rid: int, message: str) -> None:
            idx = pending.pop(rid)
            results[idx] = _BackendResult(None, message, time.perf_counter() - sent_at[rid])

        while pending:
            if self._dead:
                for rid in list(pending):
                    fail(rid, "evaluator process exited with requests outstanding")
                break
            try:
                kind, payload = self._events.get(timeout=self.timeout)
            except Empty:
                for rid in list(pending):
                    fail(rid, f"timed out after {self.timeout}s waiting for response")
                break
            if kind == "eof":
                self._dead = True
                continue
            if kind == "badline":
                self.protocol_errors.append(payload)
                oldest = next(iter(pending), None)
                if oldest is not None:
                    fail(oldest, f"evaluator emitted a non-protocol line: {payload!r}")
                continue
            msg = payload
            msg_type = msg.get("type")
            rid = msg.get("id")
            if msg_type == "result" and rid in pending:
                fitness = msg.get("fitness")
                if isinstance(fitness, bool) or not isinstance(fitness, (int, float)):
                    fail(rid, f"result for id {rid} has non-numeric fitness")
                elif not 0.0 <= fitness <= 1.0:
                    fail(rid, f"result fitness {fitness} outside [0, 1]")
                else:
                    idx = pending.pop(rid)
                    results[idx] = _BackendResult(
                        float(fitness), None, time.perf_counter() - sent_at[rid]
                    )
            elif msg_type == "error" and rid in pending:
                fail(rid, str(msg.get("message", "evaluator error")))
            else:
                self.protocol_errors.append(f"unmatched message: {msg!r}")
        return [r for r in results]  # type: ignore[misc]

    def close(self) -> None:
        if self._proc is None:
            return
        if not self._dead:
            self._send({"type": "shutdown"})
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def build_evaluator(config: EvaluatorConfig, space: SearchSpace):
    """Instantiate the backend selected by ``config``."""
    if config.kind == "synthetic":
        return SyntheticEvaluator(space, config.seed)
    if config.kind == "tabular":
        return load_tabular(config.path, space)
    return ExternalEvaluatorClient(space, config.command, config.timeout)


def evaluate_batch(
    archs: Sequence[Architecture],
    evaluator,
    cache: FitnessCache,
    threads: int = 1,
) -> list[EvaluationResult | FailedEvaluation]:
    """Evaluate a batch through the cache; result order matches input order.

    Cache hits (and within-batch repeats) come back with ``cached=True`` and
    do not touch the backend; misses are dispatched once, stored, and counted
    by the cache.  Backend failures become :class:`FailedEvaluation` entries
    without aborting the rest of the batch.
    """
    space = evaluator.space
    keys = [encode_arch(space, a) for a in archs]
    results: list[EvaluationResult | FailedEvaluation | None] = [None] * len(archs)
    first_index: dict[str, int] = {}
    to_dispatch: list[tuple[int, Architecture, str]] = []
    for i, (arch, key) in enumerate(zip(archs, keys)):
        fitness = cache.get(key)
        if fitness is not None:
            results[i] = EvaluationResult(arch, fitness, cached=True, wall_time=0.0)
        elif key not in first_index:
            first_index[key] = i
            to_dispatch.append((i, arch, key))
    if to_dispatch:
        items = [(arch, key) for _i, arch, key in to_dispatch]
        if threads > 1 and evaluator.concurrent_safe and len(items) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                dispatched = list(
                    pool.map(lambda item: evaluator.evaluate_many([item])[0], items)
                )
        else:
            dispatched = evaluator.evaluate_many(items)
        for (i, arch, key), backend_result in zip(to_dispatch, dispatched):
            if backend_result.error is None:
                cache.put(key, backend_result.fitness)
                results[i] = EvaluationResult(
                    arch, backend_result.fitness, cached=False,
                    wall_time=backend_result.wall_time,
                )
            else:
                results[i] = FailedEvaluation(arch, backend_result.error)
    for i, (arch, key) in enumerate(zip(archs, keys)):
        if results[i] is None:
            prior = results[first_index[key]]
            if isinstance(prior, EvaluationResult):
                results[i] = EvaluationResult(
                    arch, prior.fitness, cached=True, wall_time=0.0
                )
            else:
                results[i] = FailedEvaluation(arch, prior.message)
    return results  # type: ignore[return-value]
