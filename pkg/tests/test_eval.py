import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import generalization_bound_mp
from pwlm import (
    DEFAULT_GRID,
    Dataset,
    InputError,
    Model,
    PartitionSet,
    QuantileConfig,
    Task,
    TrainConfig,
    cross_validate,
    error_rate,
    fixed_threshold_partitions,
    generalization_bound,
    generate_xor,
    rmse,
    run_benchmark,
)
from pwlm.core import Preprocessing
from pwlm.eval import fold_indices, warm_start_traces


def constant_model(w, task=Task.CLASSIFICATION, **prep):
    W = np.array([[w]], dtype=float)
    return Model(PartitionSet.from_local(), W, task, Preprocessing(n_features=1, **prep))


class TestMetrics:
    def test_perfect_classifier(self):
        data = Dataset([[1.0], [2.0], [-1.0]], [1, 1, -1], Task.CLASSIFICATION)
        assert error_rate(constant_model(1.0), data) == 0.0

    def test_constant_classifier_balanced(self):
        data = Dataset([[0.0]] * 4, [1, -1, 1, -1], Task.CLASSIFICATION)
        assert error_rate(constant_model(0.0), data) == 0.5

    def test_rmse_exact(self):
        data = Dataset([[1.0], [2.0]], [2.0, 4.0], Task.REGRESSION)
        assert rmse(constant_model(2.0, Task.REGRESSION), data) == 0.0

    def test_rmse_mean_predictor(self):
        rng = np.random.default_rng(0)
        y = rng.normal(5.0, 3.0, size=200)
        data = Dataset(np.zeros((200, 1)), y, Task.REGRESSION)
        m = constant_model(0.0, Task.REGRESSION, target_mean=float(y.mean()),
                           target_std=float(y.std()))
        assert rmse(m, data) == pytest.approx(1.0, abs=1e-12)

    def test_rmse_standardized_pair(self):
        data = Dataset([[0.0], [0.0]], [1.0, -1.0], Task.REGRESSION)
        m = constant_model(0.0, Task.REGRESSION, target_mean=0.0, target_std=1.0)
        assert rmse(m, data) == 1.0

    def test_empty_and_task_errors(self):
        data = Dataset([[1.0]], [1.0], Task.REGRESSION)
        with pytest.raises(InputError):
            error_rate(constant_model(1.0, Task.REGRESSION), data)
        with pytest.raises(InputError):
            rmse(constant_model(1.0), Dataset([[1.0]], [1], Task.CLASSIFICATION))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(30, 1))
        perm = rng.permutation(30)
        cls = Dataset(X, np.where(rng.random(30) > 0.5, 1.0, -1.0), Task.CLASSIFICATION)
        assert error_rate(constant_model(0.7), cls) == error_rate(constant_model(0.7),
                                                                  cls.subset(perm))
        reg = Dataset(X, rng.normal(size=30), Task.REGRESSION)
        m = constant_model(0.3, Task.REGRESSION)
        assert rmse(m, reg) == pytest.approx(rmse(m, reg.subset(perm)), rel=1e-14)


class TestXor:
    def test_labels(self):
        data = generate_xor(500, 4, seed=1)
        X, y = data.features, data.targets
        assert np.all(np.abs(X) <= 1.0)
        assert np.array_equal(y == 1, np.sign(X[:, 0]) == np.sign(X[:, 1]))

    def test_deterministic(self):
        a, b = generate_xor(50, seed=9), generate_xor(50, seed=9)
        assert np.array_equal(a.features, b.features)
        assert not np.array_equal(a.features, generate_xor(50, seed=10).features)

    def test_errors(self):
        with pytest.raises(InputError):
            generate_xor(0)
        with pytest.raises(InputError):
            generate_xor(10, 1)


class TestFolds:
    @pytest.mark.parametrize("task", [Task.CLASSIFICATION, Task.REGRESSION])
    def test_exact_partition(self, task):
        data = generate_xor(57, 3, seed=0)
        if task is Task.REGRESSION:
            data = Dataset(data.features, data.features[:, 0], task)
        splits = fold_indices(data, 5, seed=2)
        valid = np.concatenate([va for _, va in splits])
        assert sorted(valid.tolist()) == list(range(57))
        for tr, va in splits:
            assert not set(tr) & set(va)
            assert len(tr) + len(va) == 57

    def test_seeded(self):
        data = generate_xor(40, 3, seed=0)
        a = fold_indices(data, 4, seed=1)
        b = fold_indices(data, 4, seed=1)
        assert all(np.array_equal(x[1], y[1]) for x, y in zip(a, b))

    def test_degenerate(self):
        data = Dataset(np.arange(6.0)[:, None], [1, 1, 1, 1, 1, -1], Task.CLASSIFICATION)
        with pytest.raises(InputError, match="smallest class"):
            fold_indices(data, 2)
        with pytest.raises(InputError):
            fold_indices(data, 1)
        with pytest.raises(InputError):
            fold_indices(Dataset([[1.0], [2.0]], [1.0, 2.0], Task.REGRESSION), 3)


class TestCrossValidate:
    def test_single_cell(self):
        data = generate_xor(80, 3, seed=0)
        res = cross_validate(data, fixed_threshold_partitions([1], 0.0), [(0.05, 0.002)], folds=3)
        assert (res.best_config.lambda0, res.best_config.lambda_p) == (0.05, 0.002)

    def test_duplicate_cells_and_ties(self):
        data = generate_xor(80, 3, seed=0)
        res = cross_validate(data, fixed_threshold_partitions([1], 0.0),
                             [(0.01, 0.001), (0.01, 0.001), (10.0, 10.0), (20.0, 20.0)], folds=3)
        assert len(res.scores) == 3
        # both heavy cells predict a constant, so they tie; the larger wins
        assert res.scores[(10.0, 10.0)] == res.scores[(20.0, 20.0)]
        assert res.scores[(0.01, 0.001)] < res.scores[(10.0, 10.0)]
        assert res.best_config.lambda0 == 0.01

    def test_tie_breaks_to_larger(self):
        data = generate_xor(60, 3, seed=0)
        res = cross_validate(data, PartitionSet.from_local(), [(50.0, 0.0), (100.0, 0.0)], folds=3)
        assert res.scores[(50.0, 0.0)] == res.scores[(100.0, 0.0)]
        assert res.best_config.lambda0 == 100.0

    def test_xor_selects_good_cell(self):
        data = generate_xor(300, 5, seed=0)
        ps = fixed_threshold_partitions(range(1, 5), 0.0)
        res = cross_validate(data, ps, [(0.01, 0.001), (0.1, 0.1)], folds=5)
        best = (res.best_config.lambda0, res.best_config.lambda_p)
        assert res.scores[best] < 0.05

    def test_regression_quantile(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 2))
        data = Dataset(X, X[:, 0] + np.abs(X[:, 1]), Task.REGRESSION)
        res = cross_validate(data, QuantileConfig(4), [(1e-3, 1e-3), (1.0, 1.0)], folds=3)
        assert res.scores[(1e-3, 1e-3)] < res.scores[(1.0, 1.0)]
        assert all(len(v) == 3 for v in res.fold_scores.values())

    def test_empty_grid(self):
        with pytest.raises(InputError):
            cross_validate(generate_xor(30, 3), PartitionSet.from_local(), [], folds=3)

    def test_default_grid(self):
        assert len(DEFAULT_GRID) == 16
        assert {a for a, _ in DEFAULT_GRID} == {1e-4, 1e-3, 1e-2, 1e-1}


class TestBenchmark:
    def test_single_repeat(self):
        data = generate_xor(120, 3, seed=0)
        res = run_benchmark(data, fixed_threshold_partitions([1, 2], 0.0), [(0.01, 0.001)],
                            repeats=1, folds=3, with_linear=True)
        assert res.std == 0.0 and len(res.test_scores) == 1
        assert res.mean < res.linear_scores[0]

    def test_warm_start_traces(self):
        data = generate_xor(200, 4, seed=0)
        tr = warm_start_traces(data, fixed_threshold_partitions([1], 0.0),
                               TrainConfig(max_iter=20), 5.0)
        assert set(tr) == {"warm", "cold"}
        for rows in tr.values():
            times = [r[0] for r in rows]
            assert times == sorted(times) and all(0 <= r[2] <= 1 for r in rows)


class TestBound:
    def test_example(self):
        expected = 2 ** 1.5 / 10 * (2 + math.sqrt(math.log(230))) + math.sqrt(math.log(10) / 200)
        value = generalization_bound(0.0, 100, 10, 20, 1.0, 0.1)
        assert value == pytest.approx(expected, rel=1e-14)
        assert value == pytest.approx(1.333, abs=5e-4)

    def test_degenerate_argument(self):
        v = generalization_bound(0.0, 16, 0, 1, 1.0, 0.5)
        assert v == pytest.approx(2 ** 1.5 * 2 / 4 + math.sqrt(math.log(2) / 32), rel=1e-14)

    def test_quadrupling_n_halves_terms(self):
        a = generalization_bound(0.0, 100, 10, 20, 1.0, 0.1)
        b = generalization_bound(0.0, 400, 10, 20, 1.0, 0.1)
        assert b / a == pytest.approx(0.5, rel=1e-10)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 1.5])
    def test_delta_domain(self, delta):
        with pytest.raises(InputError):
            generalization_bound(0.0, 10, 1, 1, 1.0, delta)

    @pytest.mark.parametrize("args", [(0, 1, 1, 1.0), (10, -1, 1, 1.0), (10, 1, 0, 1.0),
                                      (10, 1, 1, 0.0)])
    def test_domain(self, args):
        with pytest.raises(InputError):
            generalization_bound(0.0, *args, 0.1)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 1), st.integers(1, 10**6), st.integers(0, 1000), st.integers(1, 1000),
           st.floats(0.01, 10), st.floats(0.001, 0.999))
    def test_matches_mpmath(self, m, N, P, D, L, delta):
        ref = generalization_bound_mp(m, N, P, D, L, delta)
        assert generalization_bound(m, N, P, D, L, delta) == pytest.approx(float(ref), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 10**5), st.integers(0, 500), st.integers(1, 500),
           st.floats(0.01, 10), st.floats(0.001, 0.9))
    def test_monotone(self, N, P, D, L, delta):
        f = lambda *a: generalization_bound(0.2, *a)  # noqa: E731
        base = f(N, P, D, L, delta)
        assert f(N, P + 1, D, L, delta) >= base
        assert f(N, P, D + 1, L, delta) >= base
        assert f(N + 1, P, D, L, delta) <= base
        assert f(N, P, D, L * 1.1, delta) > base
        assert f(N, P, D, L, delta / 2) > base
