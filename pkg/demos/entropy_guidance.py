"""Watch the mutation guidance settle.

Per-component entropy starts near the uniform maximum (log2 of the domain
size) and drops as the elite population agrees on a value. The probability
vector follows: settled components stop attracting mutations.
"""

from parnas import EvaluatorConfig, SearchConfig, default_space, run_search

space = default_space(1)
config = SearchConfig(
    seed=7,
    workers=4,
    layers=1,
    init_per_worker=25,
    sharing_top_n=20,
    parents_k=20,
    mutations_per_worker=(1, 2, 3, 4),
    epochs=12,
    evaluator=EvaluatorConfig.synthetic(seed=7),
)

_best, history = run_search(config)

names = [c.name for c in space.components]
print("entropy per component (bits)")
print(f"{'epoch':>5}  " + "  ".join(f"{n:>6}" for n in names))
for report in history.epoch_reports:
    row = "  ".join(f"{h:>6.3f}" for h in report.entropy)
    print(f"{report.epoch:>5}  {row}")

print()
print("mutation probabilities, first vs last epoch")
first = history.epoch_reports[0].probabilities
last = history.epoch_reports[-1].probabilities
for name, p0, p1 in zip(names, first, last):
    bar = "#" * round(p1 * 50)
    print(f"{name:>6}  {p0:.3f} -> {p1:.3f}  {bar}")
