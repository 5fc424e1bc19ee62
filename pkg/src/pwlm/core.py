"""Domain types and the global/local residual predictor.

The predictor is

    g(x) = sum_p f_p(x) * (a_p . x),   p = 0..P

where ``f_0`` is the always-on global indicator and every other ``f_p`` is a
coordinate-parallel threshold rule.  Weights are held in a dense ``D x (P+1)``
matrix whose column 0 is the global weight vector.
"""

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from ._validation import as_features, as_vector, frozen
from .exceptions import InputError


class Task(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class FeatureKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class PartitionKind(str, Enum):
    GLOBAL = "global"
    THRESHOLD = "threshold"


class Direction(str, Enum):
    GREATER = "greater"
    LESS_OR_EQUAL = "less_or_equal"


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus targets.

    Classification targets must be -1/+1.  Arrays are copied and made
    read-only on construction.
    """

    features: np.ndarray
    targets: np.ndarray
    task: Task
    feature_kinds: Tuple[FeatureKind, ...] = None

    def __post_init__(self):
        X = as_features(self.features)
        y = np.asarray(self.targets, dtype=np.float64).ravel()
        if y.shape[0] != X.shape[0]:
            raise InputError(
                f"targets length {y.shape[0]} does not match {X.shape[0]} samples"
            )
        if not np.all(np.isfinite(y)):
            raise InputError("targets contain non-finite values")
        task = Task(self.task)
        if task is Task.CLASSIFICATION and not np.all(np.isin(y, (-1.0, 1.0))):
            raise InputError("classification targets must be -1 or +1")
        kinds = self.feature_kinds
        if kinds is None:
            kinds = infer_feature_kinds(X)
        kinds = tuple(FeatureKind(k) for k in kinds)
        if len(kinds) != X.shape[1]:
            raise InputError(
                f"{len(kinds)} feature kinds given for {X.shape[1]} features"
            )
        for d, kind in enumerate(kinds):
            if kind is FeatureKind.BINARY and not np.all(np.isin(X[:, d], (0.0, 1.0))):
                raise InputError(f"feature {d} is declared binary but has non-0/1 values")
        object.__setattr__(self, "features", frozen(X))
        object.__setattr__(self, "targets", frozen(y))
        object.__setattr__(self, "task", task)
        object.__setattr__(self, "feature_kinds", kinds)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, index):
        return Dataset(
            self.features[index], self.targets[index], self.task, self.feature_kinds
        )


def infer_feature_kinds(X):
    """A column is binary iff every observed value is 0 or 1."""
    X = np.asarray(X, dtype=np.float64)
    return tuple(
        FeatureKind.BINARY if np.all(np.isin(X[:, d], (0.0, 1.0))) else FeatureKind.CONTINUOUS
        for d in range(X.shape[1])
    )


@dataclass(frozen=True)
class PartitionSpec:
    kind: PartitionKind
    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    direction: Direction = Direction.GREATER

    def __post_init__(self):
        kind = PartitionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is PartitionKind.GLOBAL:
            object.__setattr__(self, "feature_index", None)
            object.__setattr__(self, "threshold", None)
            object.__setattr__(self, "direction", Direction.GREATER)
            return
        if self.feature_index is None or self.threshold is None:
            raise InputError("threshold partitions need feature_index and threshold")
        if int(self.feature_index) != self.feature_index or self.feature_index < 0:
            raise InputError(f"invalid feature index {self.feature_index!r}")
        if not np.isfinite(self.threshold):
            raise InputError("partition threshold must be finite")
        object.__setattr__(self, "feature_index", int(self.feature_index))
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "direction", Direction(self.direction))

    def describe(self, feature_names=None):
        if self.kind is PartitionKind.GLOBAL:
            return "global"
        name = (
            feature_names[self.feature_index]
            if feature_names is not None
            else f"x[{self.feature_index}]"
        )
        op = ">" if self.direction is Direction.GREATER else "<="
        return f"{name} {op} {self.threshold:g}"


GLOBAL = PartitionSpec(PartitionKind.GLOBAL)


@dataclass(frozen=True)
class PartitionSet:
    """Ordered activeness functions; index 0 is always the global one."""

    specs: Tuple[PartitionSpec, ...]

    def __post_init__(self):
        specs = tuple(self.specs)
        if not specs or specs[0].kind is not PartitionKind.GLOBAL:
            raise InputError("a partition set must start with the global partition")
        if any(s.kind is PartitionKind.GLOBAL for s in specs[1:]):
            raise InputError("only index 0 may hold the global partition")
        if len(set(specs)) != len(specs):
            raise InputError("partition set contains duplicate specs")
        object.__setattr__(self, "specs", specs)

    @classmethod
    def from_local(cls, local_specs: Sequence[PartitionSpec] = ()):
        return cls((GLOBAL,) + tuple(local_specs))

    def __len__(self):
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def __getitem__(self, item):
        return self.specs[item]

    @property
    def n_local(self):
        return len(self.specs) - 1

    def max_feature_index(self):
        return max((s.feature_index for s in self.specs[1:]), default=-1)

    def check_features(self, n_features):
        if self.max_feature_index() >= n_features:
            raise InputError(
                f"partition refers to feature {self.max_feature_index()} "
                f"but data has {n_features} features"
            )


def activeness(spec, x):
    """Evaluate one activeness function at a single point; returns 0 or 1."""
    if spec.kind is PartitionKind.GLOBAL:
        return 1
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= spec.feature_index < x.shape[0]:
        raise InputError(
            f"feature index {spec.feature_index} out of range for {x.shape[0]} features"
        )
    value = x[spec.feature_index]
    if spec.direction is Direction.GREATER:
        return int(value > spec.threshold)
    return int(value <= spec.threshold)


def activeness_matrix(partitions, features):
    """Cache every activeness function over a sample matrix.

    Returns an ``N x (P+1)`` float64 array of zeros and ones; column 0 is all
    ones.  Float storage lets the matrix feed straight into BLAS products.
    """
    X = as_features(features, allow_empty=True)
    partitions.check_features(X.shape[1])
    F = np.empty((X.shape[0], len(partitions)), dtype=np.float64)
    F[:, 0] = 1.0
    for p, spec in enumerate(partitions.specs[1:], start=1):
        column = X[:, spec.feature_index]
        if spec.direction is Direction.GREATER:
            F[:, p] = column > spec.threshold
        else:
            F[:, p] = column <= spec.threshold
    return F


@dataclass(frozen=True)
class Preprocessing:
    """Transformations fitted at training time and replayed at prediction.

    ``feature_min``/``feature_max`` are set when min-max scaling to [-1, 1]
    was requested.  ``fit_intercept`` appends a constant-1 column after
    scaling.  ``target_mean``/``target_std`` standardize regression targets.
    ``classes`` records the original label values mapped to -1 and +1.
    """

    n_features: int
    feature_min: Optional[Tuple[float, ...]] = None
    feature_max: Optional[Tuple[float, ...]] = None
    fit_intercept: bool = False
    target_mean: float = 0.0
    target_std: float = 1.0
    classes: Optional[Tuple[float, float]] = None

    @property
    def n_model_features(self):
        return self.n_features + int(self.fit_intercept)

    @property
    def scaled(self):
        return self.feature_min is not None

    def transform_features(self, X):
        X = np.asarray(X, dtype=np.float64)
        if self.scaled:
            lo = np.asarray(self.feature_min)
            hi = np.asarray(self.feature_max)
            span = hi - lo
            safe = np.where(span > 0, span, 1.0)
            X = np.where(span > 0, 2.0 * (X - lo) / safe - 1.0, 0.0)
        if self.fit_intercept:
            X = np.hstack([X, np.ones((X.shape[0], 1))])
        return X

    def standardize_targets(self, y):
        return (np.asarray(y, dtype=np.float64) - self.target_mean) / self.target_std

    def destandardize(self, g):
        return self.target_mean + np.asarray(g) * self.target_std


def fit_preprocessing(data, scale=None, fit_intercept=False):
    """Fit preprocessing on a training :class:`Dataset`.

    ``scale`` is ``None`` or ``"minmax"``.
    """
    X = data.features
    kw = {}
    if scale == "minmax":
        kw["feature_min"] = tuple(float(v) for v in X.min(axis=0))
        kw["feature_max"] = tuple(float(v) for v in X.max(axis=0))
    elif scale is not None:
        raise InputError(f"unknown scaling {scale!r}; expected None or 'minmax'")
    if data.task is Task.REGRESSION:
        mean = float(np.mean(data.targets))
        std = float(np.std(data.targets))
        kw["target_mean"] = mean
        kw["target_std"] = std if std > 0 else 1.0
    return Preprocessing(n_features=data.n_features, fit_intercept=bool(fit_intercept), **kw)


@dataclass(frozen=True)
class Model:
    partitions: PartitionSet
    weights: np.ndarray
    task: Task
    preprocessing: Preprocessing
    training_meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=np.float64)
        if W.ndim != 2 or W.shape[1] != len(self.partitions):
            raise InputError(
                f"weights have {W.shape[-1] if W.ndim else 0} columns for "
                f"{len(self.partitions)} partitions"
            )
        if W.shape[0] != self.preprocessing.n_model_features:
            raise InputError(
                f"weights have {W.shape[0]} rows, preprocessing expects "
                f"{self.preprocessing.n_model_features}"
            )
        if not np.all(np.isfinite(W)):
            raise InputError("weights must be finite")
        self.partitions.check_features(self.preprocessing.n_features)
        object.__setattr__(self, "weights", frozen(W))
        object.__setattr__(self, "task", Task(self.task))

    @property
    def n_features(self):
        return self.preprocessing.n_features

    def with_preprocessing(self, **changes):
        """Copy with some preprocessing fields replaced (e.g. ``classes``)."""
        prep = dataclasses.replace(self.preprocessing, **changes)
        return Model(self.partitions, self.weights, self.task, prep, self.training_meta)

    def active_partitions(self):
        """Indices of local partitions whose weight column is not all zero."""
        return [p for p in range(1, len(self.partitions)) if np.any(self.weights[:, p])]


def scores_from_parts(Z, F, A):
    """Scores for transformed features ``Z`` and cached activeness ``F``.

    Only the global column and nonzero local columns are touched.
    """
    g = Z @ A[:, 0]
    active = np.flatnonzero(np.any(A[:, 1:] != 0, axis=0)) + 1
    if active.size:
        g = g + np.sum(F[:, active] * (Z @ A[:, active]), axis=1)
    return g


def predict_scores(model, X):
    """Raw scores ``g(x)`` for every row of ``X`` (in original feature units)."""
    X = as_features(X, n_features=model.n_features, allow_empty=True)
    F = activeness_matrix(model.partitions, X)
    Z = model.preprocessing.transform_features(X)
    return scores_from_parts(Z, F, model.weights)


def predict_score(model, x):
    x = as_vector(x, n_features=model.n_features)
    return float(predict_scores(model, x[None, :])[0])


def labels_from_scores(model, g):
    g = np.asarray(g, dtype=np.float64)
    if model.task is Task.CLASSIFICATION:
        return np.where(g >= 0, 1.0, -1.0)
    return model.preprocessing.destandardize(g)


def predict_labels(model, X):
    """Vectorized :func:`predict_label`."""
    return labels_from_scores(model, predict_scores(model, X))


def predict_label(model, x):
    """Sign of the score (ties go to +1) or the de-standardized regression value."""
    return float(labels_from_scores(model, predict_score(model, x)))
