"""bcx: boundary-counterfactual explanations for tabular classifiers.

Explains single predictions of any probability-emitting classifier by
searching for the minimum single-feature changes that flip the prediction,
fitting a local surrogate regression through the observation on a balanced
neighbourhood of synthetic points, estimating the same counterfactuals from
the surrogate, and scoring the agreement (counterfactual fidelity). A
kernel-weighted linear baseline (LIME-style) runs through the same fidelity
pipeline for comparison.
"""
from ._core import BACKEND as KERNEL_BACKEND
from .batch import BatchResult, ablate, run_batch, write_report
from .config import RunConfig, load_grid, load_run_config
from .dataset import (
    CATEGORICAL,
    NUMERIC,
    Dataset,
    FeatureSpec,
    Observation,
    load_csv,
    load_schema,
    split,
    standardize,
    unstandardize,
)
from .errors import BcxError
from .estimator import (
    EstimatedPerturbation,
    FidelityRecord,
    estimate_b_perturbation,
    fidelity_error,
    percent_fidelity,
)
from .explain import Explanation, explain_observation
from .lime import KernelConfig, kernel_weight, lime_explain
from .models import (
    AnalyticCircleHandle,
    AnalyticLogisticHandle,
    BuiltinModelConfig,
    ClassifierHandle,
    predict_proba,
    train_builtin,
    wrap_external,
)
from .neighbourhood import (
    NeighbourhoodDataset,
    augment_with_counterfactuals,
    balanced_neighbourhood,
    imbalanced_neighbourhood,
)
from .search import (
    BoundaryPerturbation,
    LevelFlip,
    SearchConfig,
    find_b_perturbations,
    find_level_flips,
    search_grid,
)
from .surrogate import SurrogateModel, Term, evaluate, fit, simplify
from .synthetic import SyntheticPool, generate

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "BcxError",
    "Dataset",
    "FeatureSpec",
    "Observation",
    "NUMERIC",
    "CATEGORICAL",
    "load_csv",
    "load_schema",
    "split",
    "standardize",
    "unstandardize",
    "ClassifierHandle",
    "AnalyticLogisticHandle",
    "AnalyticCircleHandle",
    "BuiltinModelConfig",
    "train_builtin",
    "predict_proba",
    "wrap_external",
    "SearchConfig",
    "BoundaryPerturbation",
    "LevelFlip",
    "find_b_perturbations",
    "find_level_flips",
    "search_grid",
    "SyntheticPool",
    "generate",
    "NeighbourhoodDataset",
    "balanced_neighbourhood",
    "imbalanced_neighbourhood",
    "augment_with_counterfactuals",
    "SurrogateModel",
    "Term",
    "fit",
    "evaluate",
    "simplify",
    "EstimatedPerturbation",
    "FidelityRecord",
    "estimate_b_perturbation",
    "fidelity_error",
    "percent_fidelity",
    "KernelConfig",
    "kernel_weight",
    "lime_explain",
    "Explanation",
    "explain_observation",
    "RunConfig",
    "load_run_config",
    "load_grid",
    "BatchResult",
    "run_batch",
    "ablate",
    "write_report",
]
