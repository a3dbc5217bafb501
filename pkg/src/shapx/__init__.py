"""Shapley value estimation toolkit: exact oracles, stochastic samplers, and
amortized explainers."""

from shapx.core import (
    Attribution,
    CapacityError,
    CoalitionGame,
    ConfigError,
    FeatureSubset,
    KernelWeights,
    RandomSource,
    binomial,
    enumerate_subsets,
    kernel_normalizer,
    shapley_kernel_weight,
)
from shapx.exact import (
    exact_least_squares,
    exact_random_order,
    exact_shapley,
    exact_unified_expectation,
)
from shapx.stochastic import (
    ESTIMATORS,
    UnifiedStochasticConfig,
    estimate_kernelshap,
    estimate_kernelshap_unbiased,
    estimate_permutation,
    estimate_unified,
    least_squares_config,
    semivalue_config,
    simshap_config,
    simshap_target,
)
from shapx.amortized import (
    ExplainerNet,
    MetricMatrix,
    TrainConfig,
    TrainingError,
    amortized_inference,
    build_explainer,
    load_explainer,
    save_explainer,
    train_fastshap,
    train_simshap,
)
from shapx.models import (
    DataError,
    Dataset,
    MaskingRule,
    TabularModel,
    linear_model_shapley,
    load_csv_dataset,
    load_model,
    make_linear_dataset,
    masked_game,
    save_model,
    synthetic_game,
    train_tabular_classifier,
)
from shapx.evaluation import (
    ConvergenceTable,
    CurveReport,
    DistanceReport,
    TimingReport,
    attribution_distance,
    benchmark_timing,
    convergence_probe,
    insertion_deletion,
)

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "CapacityError",
    "CoalitionGame",
    "ConfigError",
    "ConvergenceTable",
    "CurveReport",
    "DataError",
    "Dataset",
    "DistanceReport",
    "ESTIMATORS",
    "ExplainerNet",
    "FeatureSubset",
    "KernelWeights",
    "MaskingRule",
    "MetricMatrix",
    "RandomSource",
    "TabularModel",
    "TimingReport",
    "TrainConfig",
    "TrainingError",
    "UnifiedStochasticConfig",
    "amortized_inference",
    "attribution_distance",
    "benchmark_timing",
    "binomial",
    "build_explainer",
    "convergence_probe",
    "enumerate_subsets",
    "estimate_kernelshap",
    "estimate_kernelshap_unbiased",
    "estimate_permutation",
    "estimate_unified",
    "exact_least_squares",
    "exact_random_order",
    "exact_shapley",
    "exact_unified_expectation",
    "insertion_deletion",
    "kernel_normalizer",
    "least_squares_config",
    "linear_model_shapley",
    "load_csv_dataset",
    "load_explainer",
    "load_model",
    "make_linear_dataset",
    "masked_game",
    "save_explainer",
    "save_model",
    "semivalue_config",
    "shapley_kernel_weight",
    "simshap_config",
    "simshap_target",
    "synthetic_game",
    "train_fastshap",
    "train_simshap",
    "train_tabular_classifier",
    "__version__",
]
