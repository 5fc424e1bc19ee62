"""Candidate partition generation.

Two generators are provided: fixed-threshold rules over chosen features (the
synthetic XOR setup) and per-feature empirical quantile cuts (tabular
benchmarks).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._validation import as_features
from .core import (
    Direction,
    FeatureKind,
    PartitionKind,
    PartitionSet,
    PartitionSpec,
    infer_feature_kinds,
)
from .exceptions import InputError

BINARY_THRESHOLD = 0.5


def fixed_threshold_partitions(feature_indices, threshold):
    """One ``x[d] > threshold`` rule per listed feature, global rule prepended.

    Duplicate indices are dropped, keeping first occurrence order.
    """
    seen = []
    for d in feature_indices:
        if int(d) != d or d < 0:
            raise InputError(f"invalid feature index {d!r}")
        if int(d) not in seen:
            seen.append(int(d))
    return PartitionSet.from_local(
        PartitionSpec(PartitionKind.THRESHOLD, d, threshold, Direction.GREATER)
        for d in seen
    )


def quantile_thresholds(column, quantile_count):
    """Interior ``k/quantile_count`` quantiles of one column.

    Uses linear interpolation between order statistics.  Thresholds are
    deduplicated and any value not strictly inside ``(min, max)`` is dropped,
    since it would give a partition that is constant on the data.
    """
    column = np.asarray(column, dtype=np.float64)
    levels = np.arange(1, quantile_count) / quantile_count
    cuts = np.quantile(column, levels, method="linear")
    lo, hi = column.min(), column.max()
    out = []
    for c in cuts:
        c = float(c)
        if lo < c < hi and c not in out:
            out.append(c)
    return out


def quantile_partitions(features, feature_kinds=None, quantile_count=5):
    """Generate threshold partitions at empirical quantiles of every feature.

    Continuous features get ``quantile_count - 1`` cuts with direction
    ``greater``.  Binary features get a complementary pair: one rule active
    when the value is 1 and one active when it is 0.

    Parameters
    ----------
    features : array-like of shape (n_samples, n_features)
    feature_kinds : sequence of FeatureKind or str, optional
        Inferred from the data when omitted (binary iff values are 0/1).
    quantile_count : int, default=5
        Number of quantile bins; 5 yields the four interior quintile points.

    Returns
    -------
    PartitionSet
    """
    try:
        X = as_features(features)
    except InputError as exc:
        raise InputError(f"cannot generate partitions: {exc}") from exc
    if int(quantile_count) != quantile_count or quantile_count < 2:
        raise InputError(f"quantile_count must be an integer >= 2, got {quantile_count!r}")
    quantile_count = int(quantile_count)
    if X.shape[0] < quantile_count:
        raise InputError(
            f"need at least {quantile_count} samples for {quantile_count}-quantiles, "
            f"got {X.shape[0]}"
        )
    if feature_kinds is None:
        feature_kinds = infer_feature_kinds(X)
    kinds = [FeatureKind(k) for k in feature_kinds]
    if len(kinds) != X.shape[1]:
        raise InputError(f"{len(kinds)} feature kinds given for {X.shape[1]} features")

    specs = []
    for d, kind in enumerate(kinds):
        column = X[:, d]
        if kind is FeatureKind.BINARY:
            # both sides must occur, otherwise one rule is constant on the data
            if column.min() < BINARY_THRESHOLD < column.max():
                specs.append(PartitionSpec(PartitionKind.THRESHOLD, d, BINARY_THRESHOLD, Direction.GREATER))
                specs.append(PartitionSpec(PartitionKind.THRESHOLD, d, BINARY_THRESHOLD, Direction.LESS_OR_EQUAL))
            continue
        for t in quantile_thresholds(column, quantile_count):
            specs.append(PartitionSpec(PartitionKind.THRESHOLD, d, t, Direction.GREATER))
    return PartitionSet.from_local(specs)


@dataclass(frozen=True)
class QuantileConfig:
    """Recipe for regenerating quantile partitions on each training split."""

    quantile_count: int = 5
    feature_kinds: Optional[Sequence[FeatureKind]] = None

    def generate(self, features):
        return quantile_partitions(features, self.feature_kinds, self.quantile_count)


def resolve_partitions(partition_config, features):
    """Turn a fixed :class:`PartitionSet` or a generator config into a set."""
    if isinstance(partition_config, PartitionSet):
        return partition_config
    if hasattr(partition_config, "generate"):
        return partition_config.generate(features)
    raise InputError(f"unsupported partition config {partition_config!r}")
