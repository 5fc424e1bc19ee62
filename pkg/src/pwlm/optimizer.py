"""Accelerated proximal-gradient training of the global/local residual model.

Each iteration takes a gradient step on the summed loss, applies the
composed prox (group-L-infinity then soft-thresholding), optionally
extrapolates with FISTA momentum, and halves the step width until the
quadratic upper-bound condition holds at the new point.
"""

import dataclasses
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from ._validation import check_nonnegative, check_positive
from .core import Dataset, Model, Task, activeness_matrix, fit_preprocessing, scores_from_parts
from .exceptions import InputError, NumericError
from .losses import (
    LossKind,
    check_loss_task,
    colsum,
    gradient_from_residuals,
    loss_derivative,
    penalty,
    pointwise_loss,
)
from .prox import _composed

# relative slack on the backtracking test; absorbs rounding in the loss sums
BACKTRACK_RTOL = 1e-14


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    TIME_BUDGET = "time_budget"


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train`.

    Parameters
    ----------
    lambda0 : float
        Weight of the element-wise L1 penalty (all columns).
    lambda_p : float
        Weight of the group-L-infinity penalty on local columns.
    initial_step : float
        First step width; backtracking halves it as needed.
    max_iter : int
        Iteration cap ``T``.
    termination_gap, termination_window : float, int
        Stop once consecutive objective values differ by less than the gap
        for this many iterations in a row.
    use_fista : bool
        Momentum extrapolation on/off (off gives plain ISTA).
    warm_start : bool
        Initialize the global column with a standalone L1 fit.
    loss : LossKind or None
        Defaults to logistic for classification, squared for regression.
    scale : {None, "minmax"}
        Map every feature to [-1, 1] before fitting.
    fit_intercept : bool
        Append a constant-1 feature (off by default; the model has no bias).
    loss_scale : {"mean", "sum"}
        Whether the penalty weights are measured against the average or the
        summed empirical loss.  ``"sum"`` makes the reported objective equal
        :func:`pwlm.losses.objective`; ``"mean"`` divides the loss by N.
    max_seconds : float or None
        Wall-time budget covering warm start and main loop.
    max_halvings : int
        Cap on step halvings within one iteration.
    """

    lambda0: float = 0.01
    lambda_p: float = 0.001
    initial_step: float = 1.0
    max_iter: int = 1000
    termination_gap: float = 1e-9
    termination_window: int = 10
    use_fista: bool = True
    warm_start: bool = True
    loss: Optional[LossKind] = None
    scale: Optional[str] = None
    fit_intercept: bool = False
    loss_scale: str = "mean"
    max_seconds: Optional[float] = None
    max_halvings: int = 60

    def __post_init__(self):
        check_nonnegative(self.lambda0, "lambda0")
        check_nonnegative(self.lambda_p, "lambda_p")
        check_positive(self.initial_step, "initial_step")
        check_positive(self.termination_gap, "termination_gap")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InputError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if int(self.termination_window) != self.termination_window or self.termination_window < 1:
            raise InputError("termination_window must be a positive integer")
        if self.max_seconds is not None:
            check_positive(self.max_seconds, "max_seconds")
        if self.loss is not None:
            object.__setattr__(self, "loss", LossKind(self.loss))
        if self.scale not in (None, "minmax"):
            raise InputError(f"unknown scaling {self.scale!r}")
        if self.loss_scale not in ("mean", "sum"):
            raise InputError(f"loss_scale must be 'mean' or 'sum', got {self.loss_scale!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class TrainState:
    """Optimizer iterates.

    ``A`` is the point where the next gradient is taken (the extrapolated
    point under FISTA), ``V_prev`` the last accepted prox output, ``s`` the
    momentum scalar and ``eta`` the current step width.
    """

    A: np.ndarray
    V_prev: np.ndarray
    s: float = 1.0
    eta: float = 1.0
    objective_history: List[float] = field(default_factory=list)
    iteration: int = 0


@dataclass
class TrainReport:
    final_objective: float
    iterations: int
    termination: Termination
    n_active: int
    objective_trace: List[float]
    elapsed_trace: List[float] = field(default_factory=list)
    error_trace: List[float] = field(default_factory=list)
    final_step: float = float("nan")
    warm_start_seconds: float = 0.0

    @property
    def best_objective(self):
        return min(self.objective_trace) if self.objective_trace else float("nan")


def gradient_step(A, grad, eta):
    return np.asarray(A, dtype=np.float64) - eta * np.asarray(grad, dtype=np.float64)


def fista_update(V_curr, V_prev, s_curr):
    """Momentum extrapolation; returns ``(A_next, s_next)``."""
    if s_curr < 1:
        raise InputError(f"momentum scalar must be >= 1, got {s_curr}")
    s_next = (1.0 + math.sqrt(1.0 + 4.0 * s_curr * s_curr)) / 2.0
    coef = (s_curr - 1.0) / s_next
    return V_curr + coef * (V_curr - V_prev), s_next


def backtracking_check(A_new, A_old, grad_old, loss_new, loss_old, eta):
    """Quadratic upper-bound test on the smooth part of the objective.

    Accept iff ``loss_new <= loss_old + <grad, D> + ||D||^2 / (2 eta)`` with
    ``D = A_new - A_old`` (up to a relative rounding slack).
    """
    diff = np.asarray(A_new) - np.asarray(A_old)
    bound = loss_old + colsum(grad_old * diff) + colsum(diff * diff) / (2.0 * eta)
    return bool(loss_new <= bound + BACKTRACK_RTOL * max(1.0, abs(loss_old)))


class _Problem:
    """Smooth part of the objective with cached design and activeness."""

    def __init__(self, X, y, F, kind, loss_scale="sum"):
        self.X, self.y, self.F, self.kind = X, y, F, kind
        self.weight = 1.0 / X.shape[0] if loss_scale == "mean" else 1.0

    def scores(self, A):
        return scores_from_parts(self.X, self.F, A)

    def loss(self, g):
        return self.weight * float(np.sum(pointwise_loss(self.kind, self.y, g)))

    def gradient(self, g):
        r = loss_derivative(self.kind, self.y, g)
        if self.weight != 1.0:
            r = self.weight * r
        return gradient_from_residuals(self.X, self.F, r)


def _minimize(problem, A0, config, lambda0, lambda_p, deadline=None, clock_start=None,
              record_errors=False):
    """Run the proximal-gradient loop from ``A0``.

    Returns the last accepted prox output and a :class:`TrainReport`.
    """
    clock_start = time.perf_counter() if clock_start is None else clock_start
    state = TrainState(A=A0.copy(), V_prev=A0.copy(), eta=config.initial_step)
    g_A = problem.scores(state.A)
    g_prev = g_A
    V = state.A
    elapsed, errors = [], []
    record_errors = record_errors and problem.kind is LossKind.LOGISTIC
    quiet = 0
    termination = Termination.MAX_ITERATIONS

    for t in range(1, config.max_iter + 1):
        state.iteration = t
        loss_A = problem.loss(g_A)
        if not math.isfinite(loss_A):
            raise NumericError("loss is not finite", iteration=t)
        grad = problem.gradient(g_A)

        for _ in range(config.max_halvings + 1):
            V = _composed(gradient_step(state.A, grad, state.eta), state.eta, lambda_p, lambda0)
            g_V = problem.scores(V)
            loss_V = problem.loss(g_V)
            if backtracking_check(V, state.A, grad, loss_V, loss_A, state.eta):
                break
            state.eta /= 2.0
        else:
            raise NumericError(
                f"backtracking exceeded {config.max_halvings} step halvings", iteration=t
            )

        obj = loss_V + penalty(V, lambda0, lambda_p)
        if not math.isfinite(obj):
            raise NumericError("objective is not finite", iteration=t)
        history = state.objective_history
        if history and abs(obj - history[-1]) < config.termination_gap:
            quiet += 1
        else:
            quiet = 0
        history.append(obj)
        elapsed.append(time.perf_counter() - clock_start)
        if record_errors:
            errors.append(float(np.mean(np.where(g_V >= 0, 1.0, -1.0) != problem.y)))

        if config.use_fista:
            state.A, s_next = fista_update(V, state.V_prev, state.s)
            # scores are linear in the weights, so extrapolate them too
            c = (state.s - 1.0) / s_next
            g_A = g_V + c * (g_V - g_prev)
            state.s = s_next
        else:
            state.A, g_A = V, g_V
        state.V_prev, g_prev = V, g_V

        if quiet >= config.termination_window:
            termination = Termination.CONVERGED
            break
        if deadline is not None and time.perf_counter() >= deadline:
            termination = Termination.TIME_BUDGET
            break

    n_active = int(np.count_nonzero(np.any(V[:, 1:] != 0, axis=0)))
    report = TrainReport(
        final_objective=state.objective_history[-1],
        iterations=state.iteration,
        termination=termination,
        n_active=n_active,
        objective_trace=list(state.objective_history),
        elapsed_trace=elapsed,
        error_trace=errors,
        final_step=state.eta,
    )
    return V, report


def warm_start_global(data, F, lambda0, kind, config=None, deadline=None):
    """L1-regularized fit of the global weight vector alone.

    ``data`` must already be in the model's feature space.  Uses the same
    solver as :func:`train` restricted to column 0.
    """
    config = TrainConfig() if config is None else config
    lambda0 = check_nonnegative(lambda0, "lambda0")
    X = np.asarray(data.features, dtype=np.float64)
    F0 = np.ones((X.shape[0], 1)) if F is None else np.asarray(F)[:, :1]
    problem = _Problem(X, np.asarray(data.targets), F0, LossKind(kind), config.loss_scale)
    return _fit_global(problem, config, lambda0, deadline)


def _fit_global(problem, config, lambda0, deadline=None):
    A0 = np.zeros((problem.X.shape[1], 1))
    a, _ = _minimize(problem, A0, config, lambda0, 0.0, deadline=deadline)
    return a[:, 0].copy()


def train(data, partitions, config=None, initial_weights=None, record_errors=False):
    """Fit a global/local residual model.

    Parameters
    ----------
    data : Dataset
        Training data in original feature units.
    partitions : PartitionSet
    config : TrainConfig, optional
    initial_weights : ndarray of shape (D, P+1), optional
        Starting point for the main loop; overrides warm start.
    record_errors : bool
        Store the training error rate after every iteration
        (classification only) in ``report.error_trace``.

    Returns
    -------
    model : Model
    report : TrainReport

    Raises
    ------
    NumericError
        If the objective becomes non-finite or backtracking cannot find a
        valid step.
    """
    config = TrainConfig() if config is None else config
    if not isinstance(data, Dataset):
        raise InputError("train expects a Dataset")
    kind = config.loss or LossKind.for_task(data.task)
    check_loss_task(kind, data.task)
    clock_start = time.perf_counter()
    deadline = None if config.max_seconds is None else clock_start + config.max_seconds

    prep = fit_preprocessing(data, config.scale, config.fit_intercept)
    Z = prep.transform_features(data.features)
    y = data.targets if data.task is Task.CLASSIFICATION else prep.standardize_targets(data.targets)
    F = activeness_matrix(partitions, data.features)
    problem = _Problem(Z, y, F, kind, config.loss_scale)

    A0 = np.zeros((Z.shape[1], len(partitions)))
    warm_seconds = 0.0
    if initial_weights is not None:
        A0 = np.array(initial_weights, dtype=np.float64)
        if A0.shape != (Z.shape[1], len(partitions)):
            raise InputError(f"initial weights shape {A0.shape} does not match {(Z.shape[1], len(partitions))}")
    elif config.warm_start:
        A0[:, 0] = _fit_global(_Problem(Z, y, F[:, :1], kind, config.loss_scale), config, config.lambda0, deadline)
        warm_seconds = time.perf_counter() - clock_start

    if deadline is not None and time.perf_counter() >= deadline:
        # budget spent during warm start; still take a single step
        config = config.replace(max_iter=1)
    V, report = _minimize(
        problem, A0, config, config.lambda0, config.lambda_p,
        deadline=deadline, clock_start=clock_start, record_errors=record_errors,
    )
    report.warm_start_seconds = warm_seconds
    meta = {
        "lambda0": config.lambda0,
        "lambda_p": config.lambda_p,
        "loss": kind.value,
        "loss_scale": config.loss_scale,
        "iterations": report.iterations,
        "termination": report.termination.value,
        "final_objective": report.final_objective,
        "n_active": report.n_active,
    }
    model = Model(partitions, V, data.task, prep, training_meta=meta)
    return model, report
