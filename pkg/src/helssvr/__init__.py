"""Robust kernel regression with the HawkEye loss, plus a benchmark harness."""

from .data import (
    Dataset,
    LoadReport,
    ScalingState,
    SyntheticSpec,
    benchmark_function,
    generate_synthetic,
    inverse_target,
    kfold_split,
    load_csv,
    scale_fit,
    scale_fit_transform,
)
from .evaluation import (
    DEFAULT_GRID,
    NEMENYI_Q_ALPHA_05,
    GridSearchResult,
    GridSpec,
    MetricsReport,
    ModelRecipe,
    RankAnalysis,
    compute_metrics,
    friedman_chi2,
    grid_search_cv,
    iman_davenport_F,
    nemenyi_cd,
    rank_models,
    recipe_from_name,
)
from .kernels import GramMatrix, KernelSpec, gram_matrix, kernel_eval, kernel_row
from .losses import LossCharacteristics, LossSpec, characteristics, loss_derivative, loss_value
from .model import FitReport, TrainedModel, fit, load_model, predict, save_model
from .optimizer import AdamConfig, AdamState, adam_step, objective_gradient, objective_value, train_adam

__version__ = "0.1.0"

__all__ = [
    "AdamConfig",
    "AdamState",
    "DEFAULT_GRID",
    "Dataset",
    "NEMENYI_Q_ALPHA_05",
    "FitReport",
    "GramMatrix",
    "GridSearchResult",
    "GridSpec",
    "KernelSpec",
    "LoadReport",
    "LossCharacteristics",
    "LossSpec",
    "MetricsReport",
    "ModelRecipe",
    "RankAnalysis",
    "ScalingState",
    "SyntheticSpec",
    "TrainedModel",
    "adam_step",
    "benchmark_function",
    "characteristics",
    "compute_metrics",
    "fit",
    "friedman_chi2",
    "generate_synthetic",
    "gram_matrix",
    "grid_search_cv",
    "iman_davenport_F",
    "inverse_target",
    "kernel_eval",
    "kernel_row",
    "kfold_split",
    "load_csv",
    "load_model",
    "loss_derivative",
    "loss_value",
    "nemenyi_cd",
    "objective_gradient",
    "objective_value",
    "predict",
    "rank_models",
    "recipe_from_name",
    "save_model",
    "scale_fit",
    "scale_fit_transform",
    "train_adam",
]
