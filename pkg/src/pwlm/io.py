"""CSV ingestion and model persistence.

CSV files need a header row; every other row must have one numeric cell
per header column.  Models are stored as JSON with column-sparse weights::

    {"format_version": 1, "task": ..., "preprocessing": {...},
     "partitions": [{"kind", "feature", "threshold", "direction"}, ...],
     "weights": {"<partition>": {"<feature>": value}}, "training_meta": {...}}

Exact zeros are omitted from ``weights``.
"""

import csv
import json
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .core import (
    Dataset,
    Direction,
    Model,
    PartitionKind,
    PartitionSet,
    PartitionSpec,
    Preprocessing,
    Task,
)
from .exceptions import CSVFormatError, InputError

FORMAT_VERSION = 1


@dataclass
class Table:
    columns: List[str]
    values: np.ndarray


def read_csv(path):
    """Read a numeric CSV with a header row into a :class:`Table`.

    Blank lines are skipped.  Ragged rows and non-numeric cells raise
    :class:`CSVFormatError` carrying the 1-based line number.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("file is empty, a header row is required", line=1) from None
        except csv.Error as exc:
            raise CSVFormatError(str(exc), line=1) from exc
        header = [h.strip() for h in header]
        if not header or any(h == "" for h in header):
            raise CSVFormatError("header has empty column names", line=1)
        if len(set(header)) != len(header):
            raise CSVFormatError("header has duplicate column names", line=1)
        rows = []
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(c.strip() == "" for c in row):
                    continue
                if len(row) != len(header):
                    raise CSVFormatError(
                        f"expected {len(header)} cells, found {len(row)}", line=line
                    )
                parsed = []
                for name, cell in zip(header, row):
                    try:
                        value = float(cell)
                    except ValueError:
                        raise CSVFormatError(
                            f"non-numeric value {cell!r} in column {name!r}", line=line
                        ) from None
                    if not math.isfinite(value):
                        raise CSVFormatError(
                            f"non-finite value {cell!r} in column {name!r}", line=line
                        )
                    parsed.append(value)
                rows.append(parsed)
        except csv.Error as exc:
            raise CSVFormatError(str(exc), line=reader.line_num) from exc
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return Table(header, values)


def split_target(table, target):
    """Return ``(feature_names, X, y)``; ``y`` is None if ``target`` is absent."""
    if target in table.columns:
        j = table.columns.index(target)
        names = table.columns[:j] + table.columns[j + 1:]
        X = np.delete(table.values, j, axis=1)
        return names, X, table.values[:, j]
    return list(table.columns), table.values, None


def encode_labels(y, classes=None):
    """Map two class values to -1/+1 (smaller value to -1).

    Returns ``(encoded, classes)``.
    """
    y = np.asarray(y, dtype=np.float64)
    if classes is None:
        found = np.unique(y)
        if set(found.tolist()) <= {-1.0, 1.0}:
            classes = (-1.0, 1.0)
        elif found.size == 2:
            classes = (float(found[0]), float(found[1]))
        else:
            raise InputError(f"classification needs two classes, found {found.size}")
    lo, hi = classes
    unknown = ~np.isin(y, classes)
    if np.any(unknown):
        raise InputError(
            f"target value {y[unknown][0]:g} is not one of the model classes {lo:g}, {hi:g}"
        )
    return np.where(y == hi, 1.0, -1.0), (float(lo), float(hi))


def infer_task(y):
    return Task.CLASSIFICATION if np.unique(y).size <= 2 else Task.REGRESSION


def load_dataset(path, target="target", task=None, classes=None):
    """Read a labelled CSV into a :class:`Dataset`.

    Returns ``(dataset, feature_names, classes)``; ``classes`` holds the
    original label values for classification and is None for regression.
    """
    table = read_csv(path)
    names, X, y = split_target(table, target)
    if y is None:
        raise InputError(f"target column {target!r} not found in {path}")
    if X.shape[1] == 0:
        raise InputError(f"{path} has no feature columns")
    if X.shape[0] == 0:
        raise InputError(f"{path} has no data rows")
    task = infer_task(y) if task is None else Task(task)
    if task is Task.CLASSIFICATION:
        y, classes = encode_labels(y, classes)
    else:
        classes = None
    return Dataset(X, y, task), names, classes


def model_to_dict(model, feature_names=None):
    prep = model.preprocessing
    weights = {}
    for p in range(model.weights.shape[1]):
        column = {str(d): float(v) for d, v in enumerate(model.weights[:, p]) if v != 0.0}
        if column:
            weights[str(p)] = column
    out = {
        "format_version": FORMAT_VERSION,
        "task": model.task.value,
        "n_features": prep.n_features,
        "preprocessing": {
            "feature_min": list(prep.feature_min) if prep.feature_min is not None else None,
            "feature_max": list(prep.feature_max) if prep.feature_max is not None else None,
            "fit_intercept": prep.fit_intercept,
            "target_mean": prep.target_mean,
            "target_std": prep.target_std,
            "classes": list(prep.classes) if prep.classes is not None else None,
        },
        "partitions": [
            {
                "kind": s.kind.value,
                "feature": s.feature_index,
                "threshold": s.threshold,
                "direction": None if s.kind is PartitionKind.GLOBAL else s.direction.value,
            }
            for s in model.partitions
        ],
        "weights": weights,
        "training_meta": dict(model.training_meta),
    }
    if feature_names is not None:
        out["feature_names"] = list(feature_names)
    return out


def model_from_dict(obj):
    try:
        version = obj["format_version"]
        if version != FORMAT_VERSION:
            raise InputError(f"unsupported model format_version {version!r}")
        pp = obj["preprocessing"]
        prep = Preprocessing(
            n_features=int(obj["n_features"]),
            feature_min=tuple(pp["feature_min"]) if pp.get("feature_min") is not None else None,
            feature_max=tuple(pp["feature_max"]) if pp.get("feature_max") is not None else None,
            fit_intercept=bool(pp.get("fit_intercept", False)),
            target_mean=float(pp.get("target_mean", 0.0)),
            target_std=float(pp.get("target_std", 1.0)),
            classes=tuple(pp["classes"]) if pp.get("classes") is not None else None,
        )
        specs = []
        for entry in obj["partitions"]:
            kind = PartitionKind(entry["kind"])
            if kind is PartitionKind.GLOBAL:
                specs.append(PartitionSpec(kind))
            else:
                specs.append(
                    PartitionSpec(kind, entry["feature"], entry["threshold"],
                                  Direction(entry["direction"]))
                )
        partitions = PartitionSet(tuple(specs))
        W = np.zeros((prep.n_model_features, len(partitions)))
        for p, column in obj["weights"].items():
            for d, v in column.items():
                W[int(d), int(p)] = float(v)
        return Model(partitions, W, Task(obj["task"]), prep,
                     training_meta=dict(obj.get("training_meta", {})))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed model file: {exc!r}") from exc


def save_model(model, path, feature_names=None):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(model, feature_names), f, indent=2)
        f.write("\n")


def load_model(path):
    """Load a model; returns ``(model, feature_names or None)``."""
    try:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    except OSError as exc:
        raise InputError(f"cannot read model {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"model {path} is not valid JSON: {exc}") from exc
    return model_from_dict(obj), obj.get("feature_names")
