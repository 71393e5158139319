"""Command-line front end: search, compare, enumerate, random.

Every run directory gets a ``manifest.json`` first (invocation record), then
the result files.  CSV bytes are deterministic for a given config and seed;
the manifest carries the only timestamp.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from importlib import metadata

import numpy as np

from .evaluation import EvaluatorConfig, build_evaluator, synthetic_fitness
from .orchestrator import (
    SearchConfig,
    best_json_text,
    compare_runs,
    comparison_csv_text,
    epoch_csv_text,
    history_csv_text,
    run_random_baseline,
    run_search,
    summary_csv_text,
)
from .space import default_space, encode_arch, enumerate_space, space_size

__all__ = ["main", "parse_config"]

ENUMERATE_DEFAULT_CAP = 10**6


def parse_config(path: str) -> SearchConfig:
    """Load a JSON config file into a :class:`SearchConfig`."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        return SearchConfig.from_dict(data)
    except ValueError as exc:
        raise ValueError(f"config {path}: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    # write-then-rename so a crashed run never leaves a half-written file
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(out_dir: str, command: str, details: dict) -> None:
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": _version(),
        **details,
    }
    _write_text(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )


def _version() -> str:
    try:
        return metadata.version("parnas")
    except metadata.PackageNotFoundError:
        return "unknown"


def cmd_search(args) -> int:
    config = parse_config(args.config)
    _write_manifest(args.out, "search", {"config": config.to_dict(), "threads": args.threads})
    best, history = run_search(config, threads=args.threads)
    _write_text(os.path.join(args.out, "history.csv"), history_csv_text(history))
    _write_text(os.path.join(args.out, "epochs.csv"), epoch_csv_text(history))
    _write_text(os.path.join(args.out, "best.json"), best_json_text(history))
    key = max(history.evaluations, key=lambda r: r.fitness).architecture
    print(
        f"best {key} fitness {best.fitness!r} "
        f"after {history.unique_evaluations} unique evaluations -> {args.out}"
    )
    return 0


def cmd_compare(args) -> int:
    config = parse_config(args.config)
    seeds = _parse_seeds(args.seeds)
    _write_manifest(
        args.out,
        "compare",
        {
            "config": config.to_dict(),
            "budget": args.budget,
            "seeds": list(seeds),
            "threads": args.threads,
        },
    )
    result = compare_runs(config, args.budget, seeds, threads=args.threads)
    _write_text(os.path.join(args.out, "comparison.csv"), comparison_csv_text(result))
    _write_text(os.path.join(args.out, "summary.csv"), summary_csv_text(result))
    for s in result.summaries:
        print(
            f"seed {s.seed}: guided {s.guided_final!r} vs random {s.random_final!r} "
            f"({s.winner})"
        )
    print(
        f"guided matched or beat random in {result.guided_wins}/{len(seeds)} seeds "
        f"at budget {args.budget} -> {args.out}"
    )
    return 0


def cmd_enumerate(args) -> int:
    space = default_space(args.layers)
    size = space_size(space)
    if size > args.cap:
        print(
            f"error: space for {args.layers} layer(s) holds {size} architectures, "
            f"over the cap of {args.cap}; raise --cap to force",
            file=sys.stderr,
        )
        return 1
    rows = []
    for arch in enumerate_space(space, cap=args.cap):
        key = encode_arch(space, arch)
        rows.append((key, synthetic_fitness(arch, space, args.evaluator_seed)))
    rows.sort(key=lambda row: row[0])
    lines = ["architecture,fitness"]
    lines.extend(f"{key},{fitness!r}" for key, fitness in rows)
    _write_text(args.out, "\n".join(lines) + "\n")

    fits = np.array([fitness for _key, fitness in rows])
    best_key, best_fit = max(rows, key=lambda row: row[1])
    print(f"architectures: {size}")
    print(f"best: {best_key} fitness {best_fit!r}")
    for pct in (0.5, 1.0, 5.0):
        threshold = float(np.quantile(fits, 1.0 - pct / 100.0))
        print(f"top {pct}% threshold: {threshold!r}")
    print(f"table -> {args.out}")
    return 0


def cmd_random(args) -> int:
    space = default_space(args.layers)
    evaluator_config = EvaluatorConfig.synthetic(seed=args.evaluator_seed)
    _write_manifest(
        args.out,
        "random",
        {
            "budget": args.budget,
            "seed": args.seed,
            "layers": args.layers,
            "evaluator": evaluator_config.to_dict(),
        },
    )
    evaluator = build_evaluator(evaluator_config, space)
    try:
        history = run_random_baseline(
            args.budget, space, evaluator, args.seed, evaluator_info=evaluator_config.to_dict()
        )
    finally:
        evaluator.close()
    _write_text(os.path.join(args.out, "history.csv"), history_csv_text(history))
    _write_text(os.path.join(args.out, "best.json"), best_json_text(history))
    key = max(history.evaluations, key=lambda r: r.fitness).architecture
    print(
        f"best {key} fitness {history.best.fitness!r} "
        f"after {history.unique_evaluations} unique evaluations -> {args.out}"
    )
    return 0


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ValueError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise ValueError("at least one seed is required")
    return seeds


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parnas",
        description="Parallel entropy-guided architecture search over message-passing networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run one guided search from a JSON config")
    p.add_argument("--config", required=True, help="path to JSON config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads (result-invariant)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("compare", help="guided search vs random baseline at equal budget")
    p.add_argument("--config", required=True, help="path to JSON config file")
    p.add_argument("--budget", required=True, type=int, help="unique evaluations per run")
    p.add_argument("--seeds", required=True, help="comma-separated seeds, e.g. 0,1,2")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker threads (result-invariant)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("enumerate", help="score every architecture in a small space")
    p.add_argument("--layers", type=int, default=1, help="layers in the space (default 1)")
    p.add_argument("--evaluator-seed", type=int, default=7, help="synthetic landscape seed")
    p.add_argument("--out", required=True, help="output CSV file (architecture,fitness)")
    p.add_argument(
        "--cap",
        type=int,
        default=ENUMERATE_DEFAULT_CAP,
        help=f"refuse spaces larger than this (default {ENUMERATE_DEFAULT_CAP})",
    )
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("random", help="run the uniform-sampling baseline")
    p.add_argument("--budget", required=True, type=int, help="unique evaluations")
    p.add_argument("--seed", required=True, type=int, help="sampling seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--layers", type=int, default=2, help="layers in the space (default 2)")
    p.add_argument("--evaluator-seed", type=int, default=7, help="synthetic landscape seed")
    p.set_defaults(func=cmd_random)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # operational failures (evaluator died, bad table, ...)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
