"""Losses, the regularized objective and its smooth-part gradient.

These functions use the literal sum over samples; the optimizer may
rescale it by 1/N (see ``TrainConfig.loss_scale``).
"""

from enum import Enum

import numpy as np
from scipy.special import expit

from .core import Task, scores_from_parts
from .exceptions import InputError


class LossKind(str, Enum):
    LOGISTIC = "logistic"
    SQUARED = "squared"

    @classmethod
    def for_task(cls, task):
        return cls.LOGISTIC if Task(task) is Task.CLASSIFICATION else cls.SQUARED


def _logistic(margin):
    # log(1 + exp(-m)) = max(-m, 0) + log1p(exp(-|m|)); exp never overflows
    margin = np.asarray(margin, dtype=np.float64)
    return np.maximum(-margin, 0.0) + np.log1p(np.exp(-np.abs(margin)))


def pointwise_loss(kind, y, g):
    """Vectorized per-sample loss."""
    y = np.asarray(y, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if LossKind(kind) is LossKind.LOGISTIC:
        return _logistic(y * g)
    return 0.5 * (y - g) ** 2


def loss_value(kind, y, g):
    """Loss of a single prediction ``g`` against target ``y``."""
    return float(pointwise_loss(kind, np.atleast_1d(y), np.atleast_1d(g))[0])


def loss_derivative(kind, y, g):
    """Derivative of the loss with respect to the score."""
    if LossKind(kind) is LossKind.LOGISTIC:
        return -y * expit(-y * g)
    return g - y


def check_loss_task(kind, task):
    kind, task = LossKind(kind), Task(task)
    if (kind is LossKind.LOGISTIC) != (task is Task.CLASSIFICATION):
        raise InputError(f"{kind.value} loss cannot be used for {task.value}")
    return kind


def _check_shapes(A, X, F):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or X.shape[1] != A.shape[0] or F.shape != (X.shape[0], A.shape[1]):
        raise InputError(
            f"inconsistent shapes: weights {A.shape}, features {X.shape}, activeness {F.shape}"
        )
    return A


def colsum(M):
    """Sum reduced column by column, so appending zero columns never changes it."""
    return float(np.sum(np.sum(M, axis=0)))


def empirical_loss(A, X, y, F, kind):
    A = _check_shapes(A, X, F)
    return float(np.sum(pointwise_loss(kind, y, scores_from_parts(X, F, A))))


def penalty(A, lambda0, lambda_p):
    """``lambda_p * sum_{p>=1} max|a_p| + lambda0 * sum |A|``."""
    A = np.asarray(A, dtype=np.float64)
    group = float(np.sum(np.max(np.abs(A[:, 1:]), axis=0))) if A.shape[1] > 1 else 0.0
    return lambda_p * group + lambda0 * colsum(np.abs(A))


def objective(A, data, F, kind, lambda0, lambda_p):
    """Full regularized objective for weights ``A`` on a :class:`Dataset`.

    ``data.features`` must already be in the model's feature space.
    """
    return empirical_loss(A, data.features, data.targets, F, kind) + penalty(A, lambda0, lambda_p)


def gradient_from_residuals(X, F, r):
    """Scatter per-sample score derivatives ``r`` into the weight matrix.

    Column 0 is ``X^T r``; local column ``p`` only receives samples with
    ``F[n, p] == 1``.
    """
    G = np.empty((X.shape[1], F.shape[1]))
    G[:, 0] = r @ X
    if F.shape[1] > 1:
        G[:, 1:] = (X * r[:, None]).T @ F[:, 1:]
    return G


def loss_gradient(A, data, F, kind):
    """Gradient of the summed loss with respect to the weight matrix.

    Two stages: the scores (and so per-sample residuals) are computed once
    using only the nonzero weight columns, then residuals are scattered into
    the columns each sample activates.
    """
    X = data.features
    A = _check_shapes(A, X, F)
    g = scores_from_parts(X, F, A)
    r = loss_derivative(kind, data.targets, g)
    return gradient_from_residuals(X, F, r)
