"""Guided search against a random baseline at the same budget.

Both spend 600 evaluations on the one-layer space. The table tracks the
top-10 averaged fitness as the budget is consumed; the random sampler
keeps drawing fresh architectures while the guided run concentrates on
what the population has learned.
"""

from parnas import (
    EvaluatorConfig,
    SearchConfig,
    SyntheticEvaluator,
    default_space,
    run_random_baseline,
    run_search,
    top10_progression,
)

budget = 600
seed = 3
space = default_space(1)

config = SearchConfig(
    seed=seed,
    workers=4,
    layers=1,
    init_per_worker=30,
    sharing_top_n=20,
    parents_k=20,
    mutations_per_worker=(1, 2, 3, 4),
    epochs=60,
    evaluator=EvaluatorConfig.synthetic(seed=7),
    budget_cap=budget,
)

_best, guided = run_search(config)
random_hist = run_random_baseline(budget, space, SyntheticEvaluator(space, seed=7), seed)

guided_curve = dict(top10_progression(guided))
random_curve = dict(top10_progression(random_hist))

print(f"{'evals':>6} {'guided top10':>13} {'random top10':>13}")
for t in range(100, budget + 1, 100):
    print(f"{t:>6} {guided_curve[t]:>13.6f} {random_curve[t]:>13.6f}")

g = guided_curve[budget]
r = random_curve[budget]
print()
print(f"final gap: {g - r:+.6f} ({'guided' if g > r else 'random'} ahead)")
