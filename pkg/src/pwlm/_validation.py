"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import InputError


def as_features(X, n_features=None, allow_empty=False, name="features"):
    """Return ``X`` as a finite 2-D float64 array.

    Raises
    ------
    InputError
        If ``X`` is not 2-D, contains NaN/Inf, is empty while ``allow_empty``
        is false, or does not have ``n_features`` columns.
    """
    try:
        X = check_array(
            X,
            dtype=np.float64,
            ensure_min_samples=0 if allow_empty else 1,
            ensure_all_finite=True,
        )
    except ValueError as exc:
        raise InputError(f"{name}: {exc}") from exc
    if n_features is not None and X.shape[1] != n_features:
        raise InputError(
            f"{name} has {X.shape[1]} columns, expected {n_features}"
        )
    return X


def as_vector(x, n_features=None, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {x.shape}")
    if n_features is not None and x.shape[0] != n_features:
        raise InputError(f"{name} has length {x.shape[0]}, expected {n_features}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite values")
    return x


def check_nonnegative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise InputError(f"{name} must be a finite non-negative number, got {value!r}")
    return float(value)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be a finite positive number, got {value!r}")
    return float(value)


def frozen(array):
    """Return a read-only copy of ``array``."""
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
