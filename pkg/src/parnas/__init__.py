"""Parallel entropy-guided architecture search for message-passing networks.

The library searches a layered space of aggregator choices (attention
function, aggregation, activation, head count, hidden dimension) with a
population shared across parallel workers.  Mutation targets are picked by
the information entropy of each component across the elite population, so
undecided components are explored first and settled ones are left alone.
"""

from .entropy import (
    FrequencyTable,
    component_frequencies,
    entropy_vector,
    mutation_probabilities,
)
from .evaluation import (
    EvaluationError,
    EvaluationResult,
    EvaluatorConfig,
    EvaluatorFailure,
    ExternalEvaluatorClient,
    FailedEvaluation,
    FitnessCache,
    MissingEntryError,
    SyntheticEvaluator,
    TabularEvaluator,
    TabularLoadError,
    build_evaluator,
    evaluate_batch,
    load_tabular,
    synthetic_fitness,
)
from .evolution import (
    AdmissionReport,
    FitnessRecord,
    SharingPopulation,
    admission_threshold,
    merge_children,
    mutate,
    select_top_n,
    wheel_select,
)
from .orchestrator import (
    ComparisonResult,
    EpochReport,
    EvalLogRow,
    InitializationError,
    SearchConfig,
    SearchHistory,
    SeedComparison,
    best_json_text,
    compare_runs,
    comparison_csv_text,
    epoch_csv_text,
    history_csv_text,
    run_random_baseline,
    run_search,
    summary_csv_text,
    top10_progression,
)
from .rng import SplitMix64, mix64, worker_stream
from .space import (
    Architecture,
    ArchitectureParseError,
    ComponentSpec,
    SearchSpace,
    decode_arch,
    default_space,
    encode_arch,
    enumerate_space,
    sample_uniform,
    space_size,
    validate_arch,
)

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "ArchitectureParseError",
    "AdmissionReport",
    "ComparisonResult",
    "ComponentSpec",
    "EpochReport",
    "EvalLogRow",
    "EvaluationError",
    "EvaluationResult",
    "EvaluatorConfig",
    "EvaluatorFailure",
    "ExternalEvaluatorClient",
    "FailedEvaluation",
    "FitnessCache",
    "FitnessRecord",
    "FrequencyTable",
    "InitializationError",
    "MissingEntryError",
    "SearchConfig",
    "SearchHistory",
    "SearchSpace",
    "SeedComparison",
    "SharingPopulation",
    "SplitMix64",
    "SyntheticEvaluator",
    "TabularEvaluator",
    "TabularLoadError",
    "admission_threshold",
    "best_json_text",
    "build_evaluator",
    "compare_runs",
    "comparison_csv_text",
    "component_frequencies",
    "decode_arch",
    "default_space",
    "encode_arch",
    "entropy_vector",
    "enumerate_space",
    "epoch_csv_text",
    "evaluate_batch",
    "history_csv_text",
    "load_tabular",
    "merge_children",
    "mix64",
    "mutate",
    "mutation_probabilities",
    "run_random_baseline",
    "run_search",
    "sample_uniform",
    "select_top_n",
    "space_size",
    "summary_csv_text",
    "synthetic_fitness",
    "top10_progression",
    "validate_arch",
    "wheel_select",
    "worker_stream",
]
