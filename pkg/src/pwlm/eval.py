"""Metrics, synthetic data, cross-validation and the generalization bound."""

import math
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold, StratifiedKFold, train_test_split

from .core import Dataset, PartitionSet, Task, predict_labels, predict_scores
from .exceptions import InputError
from .optimizer import TrainConfig, train
from .partitions import resolve_partitions

DEFAULT_GRID = tuple(product((1e-4, 1e-3, 1e-2, 1e-1), repeat=2))


def error_rate(model, data):
    """Fraction of misclassified samples."""
    if data.n_samples == 0:
        raise InputError("cannot compute an error rate on empty data")
    if model.task is not Task.CLASSIFICATION or data.task is not Task.CLASSIFICATION:
        raise InputError("error_rate needs a classification model and data")
    return float(np.mean(predict_labels(model, data.features) != data.targets))


def rmse(model, data):
    """Root mean squared error in the model's standardized target space."""
    if data.n_samples == 0:
        raise InputError("cannot compute RMSE on empty data")
    if model.task is not Task.REGRESSION or data.task is not Task.REGRESSION:
        raise InputError("rmse needs a regression model and data")
    z = model.preprocessing.standardize_targets(data.targets)
    g = predict_scores(model, data.features)
    return float(np.sqrt(np.mean((z - g) ** 2)))


def score(model, data):
    """Task-appropriate metric (lower is better)."""
    return error_rate(model, data) if data.task is Task.CLASSIFICATION else rmse(model, data)


def generate_xor(n_samples, n_dims=20, seed=0):
    """Uniform samples on ``[-1, 1]^n_dims`` labelled by the XOR of the signs
    of the first two coordinates (+1 when the signs agree)."""
    if n_samples < 1 or n_dims < 2:
        raise InputError("generate_xor needs n_samples >= 1 and n_dims >= 2")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n_samples, n_dims))
    y = np.where(np.sign(X[:, 0]) == np.sign(X[:, 1]), 1.0, -1.0)
    return Dataset(X, y, Task.CLASSIFICATION)


def fold_indices(data, folds=10, seed=0):
    """Seeded K-fold split; stratified for classification.

    Returns a list of ``(train_index, validation_index)`` pairs whose
    validation parts partition ``range(n_samples)``.
    """
    if int(folds) != folds or folds < 2:
        raise InputError(f"folds must be an integer >= 2, got {folds!r}")
    n = data.n_samples
    if folds > n:
        raise InputError(f"cannot split {n} samples into {folds} folds")
    if data.task is Task.CLASSIFICATION:
        _, counts = np.unique(data.targets, return_counts=True)
        if counts.size < 2:
            raise InputError("cross-validation needs both classes present")
        if folds > counts.min():
            raise InputError(
                f"{folds} folds exceed the smallest class count ({counts.min()})"
            )
        splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
        return list(splitter.split(data.features, data.targets))
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(data.features))


def _fit_and_score(train_data, valid_data, partition_config, config):
    partitions = resolve_partitions(partition_config, train_data.features)
    model, _ = train(train_data, partitions, config)
    return score(model, valid_data)


@dataclass
class CVResult:
    best_config: TrainConfig
    scores: Dict[Tuple[float, float], float]
    fold_scores: Dict[Tuple[float, float], List[float]]


def cross_validate(data, partition_config, hyper_grid=DEFAULT_GRID, folds=10, seed=0,
                   config=None, n_jobs=None):
    """Grid search over ``(lambda0, lambda_p)`` by K-fold cross-validation.

    Partitions are regenerated on each training fold when
    ``partition_config`` is a generator (e.g. :class:`QuantileConfig`); a
    fixed :class:`PartitionSet` is used as is.  The cell with the lowest mean
    validation metric wins; ties go to the larger ``(lambda0, lambda_p)``.
    """
    grid = [(float(a), float(b)) for a, b in hyper_grid]
    if not grid:
        raise InputError("hyperparameter grid is empty")
    config = TrainConfig() if config is None else config
    splits = fold_indices(data, folds, seed)
    cells = list(dict.fromkeys(grid))
    jobs = [
        delayed(_fit_and_score)(
            data.subset(tr), data.subset(va), partition_config,
            config.replace(lambda0=l0, lambda_p=lp),
        )
        for (l0, lp) in cells
        for tr, va in splits
    ]
    results = Parallel(n_jobs=n_jobs)(jobs)
    fold_scores = {
        cell: results[i * len(splits):(i + 1) * len(splits)] for i, cell in enumerate(cells)
    }
    scores = {cell: float(np.mean(v)) for cell, v in fold_scores.items()}
    best = min(cells, key=lambda c: (scores[c], -c[0], -c[1]))
    return CVResult(config.replace(lambda0=best[0], lambda_p=best[1]), scores, fold_scores)


def generalization_bound(empirical_loss_mean, n_samples, n_partitions, n_features,
                         lipschitz, delta):
    """Upper bound on the expected loss holding with probability ``1 - delta``.

    ``mean loss + 2^{3/2} L / sqrt(N) * (2 + sqrt(ln(DP + P + D)))
    + sqrt(ln(1/delta) / (2N))``.  Assumes losses in [0, 1], ``||x||_inf <= 1``
    and a unit-bounded regularizer; the caller is responsible for those.
    """
    N, P, D = n_samples, n_partitions, n_features
    if N < 1 or P < 0 or D < 1:
        raise InputError("need N >= 1, P >= 0 and D >= 1")
    if not lipschitz > 0:
        raise InputError("Lipschitz constant must be positive")
    if not 0 < delta < 1:
        raise InputError(f"delta must lie in (0, 1), got {delta!r}")
    complexity = 2.0 ** 1.5 * lipschitz / math.sqrt(N) * (2.0 + math.sqrt(math.log(D * P + P + D)))
    confidence = math.sqrt(math.log(1.0 / delta) / (2.0 * N))
    return empirical_loss_mean + complexity + confidence


@dataclass
class BenchmarkResult:
    test_scores: List[float]
    selected: List[Tuple[float, float]]
    n_partitions: List[int]
    linear_scores: List[float]

    @property
    def mean(self):
        return float(np.mean(self.test_scores))

    @property
    def std(self):
        return float(np.std(self.test_scores))


def run_benchmark(data, partition_config, hyper_grid=DEFAULT_GRID, repeats=10, test_size=0.2,
                  folds=10, seed=0, config=None, with_linear=False, n_jobs=None):
    """Repeated seeded train/test splits with CV-selected hyperparameters.

    For every repetition the training part is cross-validated over the grid,
    the winning cell is refit on the whole training part and scored on the
    held-out part.  ``with_linear`` also scores an L1 global-only model with
    its own CV-selected ``lambda0``.
    """
    config = TrainConfig() if config is None else config
    result = BenchmarkResult([], [], [], [])
    for r in range(repeats):
        stratify = data.targets if data.task is Task.CLASSIFICATION else None
        tr, te = train_test_split(
            np.arange(data.n_samples), test_size=test_size, random_state=seed + r,
            stratify=stratify,
        )
        train_data, test_data = data.subset(tr), data.subset(te)
        cv = cross_validate(train_data, partition_config, hyper_grid, folds, seed + r, config, n_jobs)
        partitions = resolve_partitions(partition_config, train_data.features)
        model, _ = train(train_data, partitions, cv.best_config)
        result.test_scores.append(score(model, test_data))
        result.selected.append((cv.best_config.lambda0, cv.best_config.lambda_p))
        result.n_partitions.append(partitions.n_local)
        if with_linear:
            lambdas = sorted({l0 for l0, _ in hyper_grid})
            lin = cross_validate(
                train_data, PartitionSet.from_local(), [(l0, 0.0) for l0 in lambdas],
                folds, seed + r, config, n_jobs,
            )
            lin_model, _ = train(train_data, PartitionSet.from_local(), lin.best_config)
            result.linear_scores.append(score(lin_model, test_data))
    return result


def warm_start_traces(data, partitions, config, max_seconds):
    """Objective and training-error traces with and without warm start.

    Each trace is a list of ``(seconds, objective, train_error)`` tuples,
    ``train_error`` being NaN for regression.
    """
    traces = {}
    for label, warm in (("warm", True), ("cold", False)):
        _, report = train(data, partitions, config.replace(warm_start=warm, max_seconds=max_seconds),
                          record_errors=True)
        errs = report.error_trace or [float("nan")] * len(report.objective_trace)
        traces[label] = list(zip(report.elapsed_trace, report.objective_trace, errs))
    return traces
