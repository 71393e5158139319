"""Map the whole one-layer landscape, then see where a search lands.

5880 architectures is small enough to score exhaustively, which gives
exact percentile thresholds to judge search quality against.
"""

import numpy as np

from parnas import (
    EvaluatorConfig,
    SearchConfig,
    default_space,
    encode_arch,
    enumerate_space,
    run_search,
    synthetic_fitness,
)

space = default_space(1)
archs = list(enumerate_space(space, cap=10_000))
fits = np.array([synthetic_fitness(a, space, 7) for a in archs])

best_idx = int(fits.argmax())
print(f"architectures: {len(archs)}")
print(f"global best:   {encode_arch(space, archs[best_idx])}  {fits[best_idx]:.6f}")
for pct in (99.5, 99.0, 95.0):
    print(f"p{pct:<4}          {np.quantile(fits, pct / 100):.6f}")

# a 600-evaluation run sees about a tenth of the space
config = SearchConfig(
    seed=0,
    workers=4,
    layers=1,
    init_per_worker=30,
    sharing_top_n=20,
    parents_k=20,
    mutations_per_worker=(1, 2, 3, 4),
    epochs=60,
    evaluator=EvaluatorConfig.synthetic(seed=7),
    budget_cap=600,
)
best, history = run_search(config)

rank = int((fits > best.fitness).sum()) + 1
print()
print(f"search best:   {encode_arch(space, best.arch)}  {best.fitness:.6f}")
print(f"rank {rank} of {len(archs)} after {history.unique_evaluations} evaluations")
