"""Minimal guided search run.

Searches the one-layer space with four workers and prints the per-epoch
progress table plus the best architecture found.
"""

from parnas import EvaluatorConfig, SearchConfig, default_space, encode_arch, run_search

config = SearchConfig(
    seed=42,
    workers=4,
    layers=1,
    init_per_worker=25,
    sharing_top_n=20,
    parents_k=20,
    mutations_per_worker=(1, 2, 3, 4),
    epochs=8,
    evaluator=EvaluatorConfig.synthetic(seed=7),
)

best, history = run_search(config)

print(f"{'epoch':>5} {'evals':>6} {'best':>10} {'top10 mean':>11} {'threshold':>10}")
for report in history.epoch_reports:
    print(
        f"{report.epoch:>5} {report.evaluations:>6} {report.best_fitness:>10.6f}"
        f" {report.top10_mean:>11.6f} {report.threshold:>10.6f}"
    )

print()
print("best architecture:", encode_arch(default_space(1), best.arch))
print("fitness:          ", best.fitness)
print("unique evaluations:", history.unique_evaluations)
print("duplicate requests:", history.duplicate_requests)
