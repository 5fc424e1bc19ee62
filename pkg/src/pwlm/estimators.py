"""scikit-learn compatible estimators around :func:`pwlm.optimizer.train`."""

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.multiclass import type_of_target
from sklearn.utils.validation import check_is_fitted

from ._validation import as_features
from .core import Dataset, PartitionSet, Task, predict_labels, predict_scores
from .exceptions import InputError
from .optimizer import TrainConfig, train
from .partitions import fixed_threshold_partitions, quantile_partitions


class _GlobalLocalBase(BaseEstimator):
    _task = None

    def __init__(
        self,
        lambda0=0.01,
        lambda_p=0.001,
        partitions="quantile",
        quantile_count=5,
        threshold=0.0,
        feature_kinds=None,
        max_iter=1000,
        tol=1e-9,
        use_fista=True,
        warm_start_global=True,
        scale=None,
        fit_intercept=False,
        loss_scale="mean",
        initial_step=1.0,
    ):
        self.lambda0 = lambda0
        self.lambda_p = lambda_p
        self.partitions = partitions
        self.quantile_count = quantile_count
        self.threshold = threshold
        self.feature_kinds = feature_kinds
        self.max_iter = max_iter
        self.tol = tol
        self.use_fista = use_fista
        self.warm_start_global = warm_start_global
        self.scale = scale
        self.fit_intercept = fit_intercept
        self.loss_scale = loss_scale
        self.initial_step = initial_step

    def _train_config(self):
        return TrainConfig(
            lambda0=self.lambda0,
            lambda_p=self.lambda_p,
            initial_step=self.initial_step,
            max_iter=self.max_iter,
            termination_gap=self.tol,
            use_fista=self.use_fista,
            warm_start=self.warm_start_global,
            scale=self.scale,
            fit_intercept=self.fit_intercept,
            loss_scale=self.loss_scale,
        )

    def _make_partitions(self, X):
        spec = self.partitions
        if isinstance(spec, PartitionSet):
            return spec
        if isinstance(spec, str):
            if spec != "quantile":
                raise InputError(f"unknown partitions option {spec!r}")
            return quantile_partitions(X, self.feature_kinds, self.quantile_count)
        # an iterable of feature indices, each cut at ``threshold``
        return fixed_threshold_partitions(list(spec), self.threshold)

    def _fit(self, X, y):
        X = as_features(X, name="X")
        data = Dataset(X, y, self._task, self.feature_kinds)
        self.partitions_ = self._make_partitions(X)
        self.model_, self.report_ = train(data, self.partitions_, self._train_config())
        self.n_features_in_ = X.shape[1]
        self.coef_ = np.array(self.model_.weights)
        return self

    def decision_function(self, X):
        """Raw scores of the global/local residual predictor."""
        check_is_fitted(self, "model_")
        return predict_scores(self.model_, as_features(X, self.n_features_in_, name="X"))

    def describe(self, feature_names=None):
        """One line per nonzero weight column: the rule and its weights."""
        check_is_fitted(self, "model_")
        lines = []
        W = self.model_.weights
        for p, spec in enumerate(self.partitions_):
            if p and not np.any(W[:, p]):
                continue
            nz = {int(d): float(W[d, p]) for d in np.flatnonzero(W[:, p])}
            lines.append(f"{spec.describe(feature_names)}: {nz}")
        return "\n".join(lines)


class GlobalLocalClassifier(ClassifierMixin, _GlobalLocalBase):
    """Binary classifier: global L1 logistic model plus sparse partition-wise
    residual corrections.

    Parameters
    ----------
    lambda0 : float, default=0.01
        Element-wise L1 weight (all columns).
    lambda_p : float, default=0.001
        Group-L-infinity weight on local partition columns.
    partitions : "quantile", PartitionSet or iterable of int, default="quantile"
        Candidate generation: quantile cuts per feature, a fixed set, or a
        list of feature indices each split at ``threshold``.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
    model_ : pwlm.core.Model
    report_ : pwlm.optimizer.TrainReport
    coef_ : ndarray of shape (n_features, n_partitions + 1)
    """

    _task = Task.CLASSIFICATION

    def fit(self, X, y):
        y = np.asarray(y)
        if type_of_target(y) != "binary":
            raise InputError("GlobalLocalClassifier supports binary targets only")
        self.classes_ = np.unique(y)
        return self._fit(X, np.where(y == self.classes_[1], 1.0, -1.0))

    def predict(self, X):
        g = self.decision_function(X)
        return self.classes_[(g >= 0).astype(int)]

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])


class GlobalLocalRegressor(RegressorMixin, _GlobalLocalBase):
    """Least-squares counterpart of :class:`GlobalLocalClassifier`.

    Targets are standardized internally; :meth:`predict` returns values in
    the original units.
    """

    _task = Task.REGRESSION

    def fit(self, X, y):
        return self._fit(X, np.asarray(y, dtype=np.float64).ravel())

    def predict(self, X):
        check_is_fitted(self, "model_")
        return predict_labels(self.model_, as_features(X, self.n_features_in_, name="X"))
