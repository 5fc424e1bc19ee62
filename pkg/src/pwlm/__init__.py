"""Convex partition-wise linear models.

A global linear model plus sparse partition-wise residual corrections,
trained with accelerated proximal gradient on a group-L-infinity + L1
penalty.
"""

__version__ = "0.1.0"

from .core import (
    Dataset,
    Direction,
    FeatureKind,
    Model,
    PartitionKind,
    PartitionSet,
    PartitionSpec,
    Task,
    activeness,
    activeness_matrix,
    predict_label,
    predict_labels,
    predict_score,
    predict_scores,
)
from .estimators import GlobalLocalClassifier, GlobalLocalRegressor
from .eval import (
    DEFAULT_GRID,
    cross_validate,
    error_rate,
    generalization_bound,
    generate_xor,
    rmse,
    run_benchmark,
)
from .exceptions import CSVFormatError, InputError, NumericError
from .io import load_dataset, load_model, read_csv, save_model
from .losses import LossKind, loss_gradient, objective
from .optimizer import Termination, TrainConfig, TrainReport, train
from .partitions import QuantileConfig, fixed_threshold_partitions, quantile_partitions
from .prox import project_l1_ball, prox_composed, prox_group_linf, prox_l1

__all__ = [
    "CSVFormatError", "DEFAULT_GRID", "Dataset", "Direction", "FeatureKind",
    "GlobalLocalClassifier", "GlobalLocalRegressor", "InputError", "LossKind", "Model",
    "NumericError", "PartitionKind", "PartitionSet", "PartitionSpec", "QuantileConfig",
    "Task", "Termination", "TrainConfig", "TrainReport", "activeness", "activeness_matrix",
    "cross_validate", "error_rate", "fixed_threshold_partitions", "generalization_bound",
    "generate_xor", "load_dataset", "load_model", "loss_gradient", "objective",
    "predict_label", "predict_labels", "predict_score", "predict_scores", "project_l1_ball",
    "prox_composed", "prox_group_linf", "prox_l1", "quantile_partitions", "read_csv", "rmse",
    "run_benchmark", "save_model", "train",
]
