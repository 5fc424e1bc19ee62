"""Proximal operators for the sparse group-L-infinity penalty.

``prox_group_linf`` handles ``kappa * sum_{p>=1} ||a_p||_inf`` column by
column through the Moreau identity (input minus its projection onto an L1
ball).  ``prox_l1`` is plain soft-thresholding.  The prox of the sum of both
penalties is soft-thresholding applied after the group step.
"""

import numpy as np

from ._validation import check_nonnegative, check_positive


def project_l1_ball(v, radius):
    """Euclidean projection of ``v`` onto ``{c : ||c||_1 <= radius}``.

    Sort-based exact method, O(D log D).

    Examples
    --------
    >>> project_l1_ball([2.0, 1.0], 1.0)
    array([1., 0.])
    """
    radius = check_nonnegative(radius, "radius")
    v = np.asarray(v, dtype=np.float64)
    if radius == 0.0:
        return np.zeros_like(v)
    if np.sum(np.abs(v)) <= radius:
        return v.copy()
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    positive = u - (css - radius) / j > 0
    # the first condition always holds in exact arithmetic; rounding can lose it
    positive[0] = True
    rho = np.flatnonzero(positive)[-1]
    theta = (css[rho] - radius) / (rho + 1)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def _project_columns(B, radius):
    """Column-wise :func:`project_l1_ball`, vectorized over columns."""
    out = B.copy()
    if B.size == 0:
        return out
    if radius == 0.0:
        return np.zeros_like(B)
    absB = np.abs(B)
    outside = np.sum(absB, axis=0) > radius
    if not np.any(outside):
        return out
    Bo = absB[:, outside]
    U = -np.sort(-Bo, axis=0)
    css = np.cumsum(U, axis=0)
    j = np.arange(1, B.shape[0] + 1)[:, None]
    positive = U - (css - radius) / j > 0
    positive[0] = True
    # last True row in each column
    rho = B.shape[0] - 1 - np.argmax(positive[::-1], axis=0)
    theta = (css[rho, np.arange(Bo.shape[1])] - radius) / (rho + 1)
    out[:, outside] = np.sign(B[:, outside]) * np.maximum(Bo - theta, 0.0)
    return out


def prox_l1(B, tau):
    """Element-wise soft-thresholding of every entry, global column included."""
    tau = check_nonnegative(tau, "tau")
    return _soft_threshold(np.asarray(B, dtype=np.float64), tau)


def _soft_threshold(B, tau):
    return np.sign(B) * np.maximum(np.abs(B) - tau, 0.0)


def prox_group_linf(B, kappa):
    """Prox of ``kappa * sum_{p>=1} ||b_p||_inf``; column 0 passes through.

    A local column with ``||b_p||_1 <= kappa`` comes out exactly zero.
    """
    kappa = check_nonnegative(kappa, "kappa")
    return _group_linf(np.asarray(B, dtype=np.float64), kappa)


def _group_linf(B, kappa):
    out = B.copy()
    local = B[:, 1:]
    if local.size == 0 or kappa == 0.0:
        return out
    out[:, 1:] = local - _project_columns(local, kappa)
    out[:, 1:][:, np.sum(np.abs(local), axis=0) <= kappa] = 0.0
    return out


def prox_composed(B, eta, lambda_p, lambda0):
    """Prox of ``eta * (lambda_p * group term + lambda0 * L1 term)``.

    Group-L-infinity step first, soft-thresholding second.
    """
    eta = check_positive(eta, "eta")
    lambda_p = check_nonnegative(lambda_p, "lambda_p")
    lambda0 = check_nonnegative(lambda0, "lambda0")
    return _composed(np.asarray(B, dtype=np.float64), eta, lambda_p, lambda0)


def _composed(B, eta, lambda_p, lambda0):
    """Unchecked :func:`prox_composed` for the training loop."""
    return _soft_threshold(_group_linf(B, eta * lambda_p), eta * lambda0)
