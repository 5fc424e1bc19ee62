"""Command-line interface: ``pwlm {train,predict,eval,xor,bench,bound}``.

Exit codes: 0 success, 1 usage error, 2 input/data error, 3 numeric failure.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .core import PartitionSet, Task, predict_labels, predict_scores
from .eval import (
    DEFAULT_GRID,
    error_rate,
    generalization_bound,
    generate_xor,
    rmse,
    run_benchmark,
    warm_start_traces,
)
from .exceptions import InputError, NumericError
from .io import encode_labels, load_dataset, load_model, read_csv, save_model, split_target
from .losses import LossKind
from .optimizer import TrainConfig, train
from .partitions import QuantileConfig, fixed_threshold_partitions, quantile_partitions

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a finite non-negative number, got {text}")
    return value


def _pos_float(text):
    value = _nonneg_float(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _pos_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _feature_list(text):
    """Parse 1-based feature lists like ``2-20`` or ``1,3,5``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad feature list {text!r}") from None
    if any(i < 1 for i in out):
        raise argparse.ArgumentTypeError("feature numbers are 1-based")
    return [i - 1 for i in out]


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None
    if not values or any(not v >= 0 for v in values):
        raise argparse.ArgumentTypeError("need non-negative numbers")
    return values


def _add_train_options(p):
    p.add_argument("--lambda0", type=_nonneg_float, default=0.01, help="element-wise L1 weight")
    p.add_argument("--lambdaP", dest="lambda_p", type=_nonneg_float, default=0.001,
                   help="group L-infinity weight on partitions")
    p.add_argument("--max-iter", type=_pos_int, default=1000)
    p.add_argument("--tol", type=_pos_float, default=1e-9, help="termination gap")
    p.add_argument("--step", type=_pos_float, default=1.0, help="initial step width")
    p.add_argument("--no-fista", action="store_true", help="plain ISTA")
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--scale", choices=("none", "minmax"), default="none",
                   help="map features to [-1, 1] before fitting")
    p.add_argument("--intercept", action="store_true", help="append a constant-1 feature")
    p.add_argument("--loss-scale", choices=("mean", "sum"), default="mean",
                   help="penalties relative to the mean or the summed loss")


def _config_from_args(args, loss=None):
    return TrainConfig(
        lambda0=args.lambda0,
        lambda_p=args.lambda_p,
        initial_step=args.step,
        max_iter=args.max_iter,
        termination_gap=args.tol,
        use_fista=not args.no_fista,
        warm_start=not args.no_warm_start,
        loss=loss,
        scale=None if args.scale == "none" else args.scale,
        fit_intercept=args.intercept,
        loss_scale=args.loss_scale,
    )


def build_parser():
    parser = _Parser(prog="pwlm", description="Partition-wise linear models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every stochastic choice")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", parents=[common], help="train a model from a CSV file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--target", default="target")
    p.add_argument("--task", choices=[t.value for t in Task])
    p.add_argument("--loss", choices=[k.value for k in LossKind])
    p.add_argument("--quantiles", type=int, default=5, help="quantile count per feature")
    p.add_argument("--partition-features", type=_feature_list,
                   help="1-based features split at --partition-threshold instead of quantiles")
    p.add_argument("--partition-threshold", type=float, default=0.0)
    _add_train_options(p)

    p = sub.add_parser("predict", parents=[common], help="write predictions for a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="-", help="output CSV ('-' for stdout)")
    p.add_argument("--target", default="target", help="column dropped if present")

    p = sub.add_parser("eval", parents=[common], help="score a model on labelled data")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--target", default="target")

    p = sub.add_parser("xor", parents=[common], help="synthetic XOR reproduction")
    p.add_argument("--n-train", type=_pos_int, default=1000)
    p.add_argument("--n-test", type=_pos_int, default=1000)
    p.add_argument("--dims", type=int, default=20)
    p.add_argument("--grid", type=_pos_int, default=101, help="plot grid points per axis")
    p.add_argument("--plot-out", default="xor_scores.csv", help="plot data CSV path")
    p.add_argument("--model-out", help="optionally save the trained model")
    _add_train_options(p)

    p = sub.add_parser("bench", parents=[common], help="CV benchmark protocol on CSV datasets")
    p.add_argument("datasets", nargs="+", help="CSV files")
    p.add_argument("--target", default="target")
    p.add_argument("--task", choices=[t.value for t in Task])
    p.add_argument("--quantiles", type=int, default=5)
    p.add_argument("--repeats", type=_pos_int, default=10)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--test-size", type=float, default=0.2)
    p.add_argument("--grid-lambda0", type=_float_list,
                   default=sorted({a for a, _ in DEFAULT_GRID}))
    p.add_argument("--grid-lambdaP", dest="grid_lambda_p", type=_float_list,
                   default=sorted({b for _, b in DEFAULT_GRID}))
    p.add_argument("--linear", action="store_true", help="also report an L1 global-only baseline")
    p.add_argument("--warmstart-compare", metavar="CSV",
                   help="write objective/error-vs-time traces with and without warm start")
    p.add_argument("--warmstart-seconds", type=_pos_float, default=2.0)
    p.add_argument("--n-jobs", type=int, default=None)
    _add_train_options(p)

    p = sub.add_parser("bound", parents=[common], help="generalization bound calculator")
    p.add_argument("--loss-mean", type=_nonneg_float, required=True,
                   help="mean empirical loss on the training set")
    p.add_argument("--n", type=_pos_int, required=True, help="training set size")
    p.add_argument("--partitions", type=int, required=True, help="number of local partitions")
    p.add_argument("--dims", type=_pos_int, required=True)
    p.add_argument("--lipschitz", type=_pos_float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    return parser


def _emit(args, text, payload):
    if args.json:
        print(json.dumps(payload))
    else:
        print(text)


def _cmd_train(args):
    data, names, classes = load_dataset(args.input, args.target, args.task)
    loss = LossKind(args.loss) if args.loss else None
    config = _config_from_args(args, loss)
    if args.partition_features is not None:
        partitions = fixed_threshold_partitions(args.partition_features, args.partition_threshold)
    else:
        partitions = quantile_partitions(data.features, quantile_count=args.quantiles)
    model, report = train(data, partitions, config)
    if classes is not None:
        model = model.with_preprocessing(classes=classes)
    save_model(model, args.out, names)
    W = model.weights
    summary = {
        "objective": report.final_objective,
        "iterations": report.iterations,
        "termination": report.termination.value,
        "n_partitions": partitions.n_local,
        "n_active": report.n_active,
        "nonzero_weights": int(np.count_nonzero(W)),
        "total_weights": int(W.size),
        "model": args.out,
    }
    lines = [
        f"trained {data.task.value} model on {data.n_samples} samples, {data.n_features} features",
        f"objective {report.final_objective:.6g} after {report.iterations} iterations "
        f"({report.termination.value})",
        f"active partitions {report.n_active} of {partitions.n_local}; "
        f"nonzero weights {summary['nonzero_weights']}/{summary['total_weights']}",
    ]
    lines += [f"  {model.partitions[p].describe(names)}" for p in model.active_partitions()]
    lines.append(f"model written to {args.out}")
    _emit(args, "\n".join(lines), summary)
    return EXIT_OK


def _features_for_model(path, target, model):
    table = read_csv(path)
    _, X, y = split_target(table, target)
    if X.shape[1] != model.n_features:
        raise InputError(
            f"{path} has {X.shape[1]} feature columns, model expects {model.n_features}"
        )
    return X, y


def _cmd_predict(args):
    model, _ = load_model(args.model)
    X, _ = _features_for_model(args.input, args.target, model)
    scores = predict_scores(model, X)
    labels = predict_labels(model, X)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="", encoding="utf-8")
    try:
        writer = csv.writer(out)
        if model.task is Task.CLASSIFICATION:
            classes = model.preprocessing.classes or (-1.0, 1.0)
            writer.writerow(["label", "score"])
            for lab, g in zip(labels, scores):
                value = classes[1] if lab > 0 else classes[0]
                writer.writerow([f"{value:g}", repr(float(g))])
        else:
            writer.writerow(["prediction"])
            for v in labels:
                writer.writerow([repr(float(v))])
    finally:
        if out is not sys.stdout:
            out.close()
    if args.out != "-":
        print(f"{len(scores)} predictions written to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_eval(args):
    from .core import Dataset

    model, _ = load_model(args.model)
    X, y = _features_for_model(args.input, args.target, model)
    if y is None:
        raise InputError(f"target column {args.target!r} not found in {args.input}")
    if X.shape[0] == 0:
        raise InputError(f"{args.input} has no data rows")
    looks_categorical = np.unique(y).size <= 2
    if model.task is Task.REGRESSION:
        if looks_categorical:
            raise InputError("task mismatch: regression model on classification data")
        data = Dataset(X, y, Task.REGRESSION)
        value = rmse(model, data)
        payload = {"metric": "rmse", "value": value, "n": data.n_samples}
        _emit(args, f"rmse {value:.6f} (standardized targets, n={data.n_samples})", payload)
        return EXIT_OK
    if not looks_categorical:
        raise InputError("task mismatch: classification model on regression data")
    encoded, _ = encode_labels(y, model.preprocessing.classes)
    data = Dataset(X, encoded, Task.CLASSIFICATION)
    value = error_rate(model, data)
    pred = predict_labels(model, X)
    confusion = {
        "tp": int(np.sum((pred > 0) & (encoded > 0))),
        "fp": int(np.sum((pred > 0) & (encoded < 0))),
        "tn": int(np.sum((pred < 0) & (encoded < 0))),
        "fn": int(np.sum((pred < 0) & (encoded > 0))),
    }
    payload = {"metric": "error_rate", "value": value, "n": data.n_samples, "confusion": confusion}
    text = (
        f"error_rate {value:.6f} (n={data.n_samples})\n"
        f"tp={confusion['tp']} fp={confusion['fp']} tn={confusion['tn']} fn={confusion['fn']}"
    )
    _emit(args, text, payload)
    return EXIT_OK


def _cmd_xor(args):
    if args.dims < 2:
        raise InputError("--dims must be at least 2")
    train_data = generate_xor(args.n_train, args.dims, seed=args.seed)
    test_data = generate_xor(args.n_test, args.dims, seed=args.seed + 1)
    config = _config_from_args(args)
    baseline, _ = train(train_data, PartitionSet.from_local(), config.replace(lambda_p=0.0))
    partitions = fixed_threshold_partitions(range(1, args.dims), 0.0)
    model, report = train(train_data, partitions, config)
    base_err = error_rate(baseline, test_data)
    model_err = error_rate(model, test_data)

    grid = np.linspace(-1.0, 1.0, args.grid)
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    points = np.zeros((g1.size, args.dims))
    points[:, 0], points[:, 1] = g1.ravel(), g2.ravel()
    grid_scores = predict_scores(model, points)
    with open(args.plot_out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x1", "x2", "score"])
        for (a, b), s in zip(points[:, :2], grid_scores):
            writer.writerow([repr(float(a)), repr(float(b)), repr(float(s))])
    if args.model_out:
        save_model(model, args.model_out, [f"x{i + 1}" for i in range(args.dims)])

    active = model.active_partitions()
    payload = {
        "baseline_error": base_err,
        "model_error": model_err,
        "iterations": report.iterations,
        "objective": report.final_objective,
        "active_partitions": [model.partitions[p].describe([f"x{i + 1}" for i in range(args.dims)])
                              for p in active],
        "weights": {str(p): model.weights[:, p].tolist() for p in [0] + active},
        "plot_data": args.plot_out,
    }
    names = [f"x{i + 1}" for i in range(args.dims)]
    lines = [
        f"XOR: {args.n_train} train / {args.n_test} test samples, {args.dims} dims, seed {args.seed}",
        f"L1 linear baseline test error: {base_err:.3f}",
        f"global/local test error:       {model_err:.3f}",
        f"active partitions: {len(active)} of {partitions.n_local}",
    ]
    with np.printoptions(precision=3, suppress=True):
        lines.append(f"  global a_0 = {model.weights[:, 0]}")
        for p in active:
            lines.append(f"  [{model.partitions[p].describe(names)}] a = {model.weights[:, p]}")
    lines.append(f"plot data written to {args.plot_out}")
    _emit(args, "\n".join(lines), payload)
    return EXIT_OK


def _cmd_bench(args):
    grid = [(a, b) for a in args.grid_lambda0 for b in args.grid_lambda_p]
    config = _config_from_args(args)
    rows = []
    traces = []
    for path in args.datasets:
        data, _, _ = load_dataset(path, args.target, args.task)
        result = run_benchmark(
            data, QuantileConfig(args.quantiles), grid, repeats=args.repeats,
            test_size=args.test_size, folds=args.folds, seed=args.seed, config=config,
            with_linear=args.linear, n_jobs=args.n_jobs,
        )
        scale = 100.0 if data.task is Task.CLASSIFICATION else 1.0
        row = {
            "dataset": path,
            "task": data.task.value,
            "metric": "error_rate_percent" if data.task is Task.CLASSIFICATION else "rmse",
            "N": data.n_samples,
            "D": data.n_features,
            "P": int(np.median(result.n_partitions)),
            "mean": scale * result.mean,
            "std": scale * result.std,
            "selected": result.selected,
        }
        if args.linear:
            row["linear_mean"] = scale * float(np.mean(result.linear_scores))
            row["linear_std"] = scale * float(np.std(result.linear_scores))
        rows.append(row)
        if args.warmstart_compare:
            partitions = quantile_partitions(data.features, quantile_count=args.quantiles)
            for mode, trace in warm_start_traces(data, partitions, config,
                                                 args.warmstart_seconds).items():
                traces.extend((path, mode, i + 1, *point) for i, point in enumerate(trace))

    if args.warmstart_compare:
        with open(args.warmstart_compare, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["dataset", "mode", "iteration", "seconds", "objective", "train_error"])
            writer.writerows(traces)

    lines = []
    header = f"{'dataset':<30} {'N':>7} {'D':>5} {'P':>5}  Global/Local"
    if args.linear:
        header += "         Linear"
    lines.append(header)
    for row in rows:
        line = (f"{row['dataset']:<30} {row['N']:>7} {row['D']:>5} {row['P']:>5}  "
                f"{row['mean']:.3f} ({row['std']:.3f})")
        if args.linear:
            line += f"  {row['linear_mean']:.3f} ({row['linear_std']:.3f})"
        lines.append(line)
    lines.append("classification: error rate in percent; regression: RMSE on standardized targets")
    if args.warmstart_compare:
        lines.append(f"warm-start traces written to {args.warmstart_compare}")
    _emit(args, "\n".join(lines), rows)
    return EXIT_OK


BOUND_CAVEATS = (
    "valid only for losses bounded in [0, 1] with the given Lipschitz constant, "
    "inputs with max-norm at most 1 and a unit-bounded regularizer"
)


def _cmd_bound(args):
    value = generalization_bound(args.loss_mean, args.n, args.partitions, args.dims,
                                 args.lipschitz, args.delta)
    payload = {"bound": value, "confidence": 1.0 - args.delta, "caveats": BOUND_CAVEATS}
    _emit(args, f"expected loss <= {value:.6g} with probability >= {1 - args.delta:g}\n"
                f"caveats: {BOUND_CAVEATS}", payload)
    return EXIT_OK


COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "xor": _cmd_xor,
    "bench": _cmd_bench,
    "bound": _cmd_bound,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"pwlm: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"pwlm: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"pwlm: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
