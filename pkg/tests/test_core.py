import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_scores
from pwlm import (
    Dataset,
    Direction,
    FeatureKind,
    InputError,
    Model,
    PartitionKind,
    PartitionSet,
    PartitionSpec,
    Task,
    activeness,
    activeness_matrix,
    fixed_threshold_partitions,
    predict_label,
    predict_score,
    predict_scores,
)
from pwlm.core import GLOBAL, Preprocessing

GT = Direction.GREATER
LE = Direction.LESS_OR_EQUAL


def rule(d, t, direction=GT):
    return PartitionSpec(PartitionKind.THRESHOLD, d, t, direction)


def make_model(W, partitions, task=Task.CLASSIFICATION, **prep):
    W = np.asarray(W, dtype=float)
    return Model(partitions, W, task, Preprocessing(n_features=W.shape[0], **prep))


class TestDataset:
    def test_valid(self):
        d = Dataset([[0.0, 1.5], [1.0, 2.0]], [1, -1], "classification")
        assert d.n_samples == 2 and d.n_features == 2
        assert d.feature_kinds == (FeatureKind.BINARY, FeatureKind.CONTINUOUS)
        assert not d.features.flags.writeable

    @pytest.mark.parametrize("y", [[0, 1], [1, 2]])
    def test_classification_targets_must_be_signs(self, y):
        with pytest.raises(InputError):
            Dataset([[1.0], [2.0]], y, Task.CLASSIFICATION)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            Dataset([[1.0], [2.0]], [1.0], Task.REGRESSION)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            Dataset(np.zeros((0, 2)), [], Task.REGRESSION)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            Dataset([[np.nan]], [1.0], Task.REGRESSION)
        with pytest.raises(InputError):
            Dataset([[1.0]], [np.inf], Task.REGRESSION)

    def test_binary_kind_checked(self):
        with pytest.raises(InputError):
            Dataset([[0.0], [2.0]], [1, -1], Task.CLASSIFICATION, [FeatureKind.BINARY])

    def test_subset(self):
        d = Dataset([[1.0], [2.0], [3.0]], [1.0, 2.0, 3.0], Task.REGRESSION)
        s = d.subset([2, 0])
        assert s.targets.tolist() == [3.0, 1.0]


class TestPartitionSet:
    def test_global_must_lead(self):
        with pytest.raises(InputError):
            PartitionSet((rule(0, 0.0), GLOBAL))

    def test_single_global(self):
        with pytest.raises(InputError):
            PartitionSet((GLOBAL, GLOBAL))

    def test_duplicates_rejected(self):
        with pytest.raises(InputError):
            PartitionSet.from_local([rule(0, 1.0), rule(0, 1.0)])

    def test_directions_differ(self):
        ps = PartitionSet.from_local([rule(0, 1.0), rule(0, 1.0, LE)])
        assert len(ps) == 3 and ps.n_local == 2

    def test_bad_spec(self):
        with pytest.raises(InputError):
            PartitionSpec(PartitionKind.THRESHOLD, -1, 0.0)
        with pytest.raises(InputError):
            PartitionSpec(PartitionKind.THRESHOLD, 0, float("nan"))
        with pytest.raises(InputError):
            PartitionSpec(PartitionKind.THRESHOLD, 0)

    def test_describe(self):
        assert rule(1, 2.5).describe(["a", "b"]) == "b > 2.5"
        assert rule(0, 0.5, LE).describe() == "x[0] <= 0.5"
        assert GLOBAL.describe() == "global"


class TestActiveness:
    def test_rule_example(self):
        assert activeness(rule(0, 2.5), [3.0, 0.0]) == 1

    def test_global(self):
        assert activeness(GLOBAL, [-7.0]) == 1

    def test_strict_boundary(self):
        assert activeness(rule(0, 2.5), [2.5]) == 0
        assert activeness(rule(0, 2.5, LE), [2.5]) == 1

    def test_out_of_range(self):
        with pytest.raises(InputError):
            activeness(rule(3, 0.0), [1.0, 2.0])

    def test_matrix_examples(self):
        assert activeness_matrix(PartitionSet.from_local(), [[5.0]]).tolist() == [[1.0]]
        F = activeness_matrix(PartitionSet.from_local([rule(0, 0.0)]), [[-1.0], [1.0]])
        assert F[:, 0].tolist() == [1.0, 1.0] and F[:, 1].tolist() == [0.0, 1.0]

    def test_xor_all_half(self):
        ps = fixed_threshold_partitions(range(1, 20), 0.0)
        F = activeness_matrix(ps, np.full((1, 20), 0.5))
        assert F.shape == (1, 20) and np.all(F == 1.0)

    def test_matrix_dimension_mismatch(self):
        with pytest.raises(InputError):
            activeness_matrix(PartitionSet.from_local([rule(4, 0.0)]), np.zeros((2, 3)))

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (6, 3), elements=st.floats(-5, 5)),
           st.lists(st.tuples(st.integers(0, 2), st.floats(-5, 5), st.sampled_from([GT, LE])),
                    max_size=6, unique=True))
    def test_matrix_matches_pointwise(self, X, rules):
        ps = PartitionSet.from_local([rule(d, t, s) for d, t, s in rules])
        F = activeness_matrix(ps, X)
        assert np.all(F[:, 0] == 1.0)
        assert set(np.unique(F)) <= {0.0, 1.0}
        for n in range(X.shape[0]):
            assert [activeness(s, X[n]) for s in ps] == F[n].tolist()

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, 4, elements=st.floats(-5, 5)), st.floats(-5, 5),
           st.integers(0, 3), st.floats(-100, 100))
    def test_other_features_irrelevant(self, x, t, d, new_value):
        spec = rule(d, t)
        before = activeness(spec, x)
        for other in range(4):
            if other != d:
                z = x.copy()
                z[other] = new_value
                assert activeness(spec, z) == before


class TestPredict:
    def test_zero_weights(self):
        m = make_model(np.zeros((2, 2)), PartitionSet.from_local([rule(0, 0.0)]))
        assert predict_score(m, [3.0, -2.0]) == 0.0

    def test_plain_linear(self):
        m = make_model([[2.0]], PartitionSet.from_local())
        assert predict_score(m, [3.0]) == 6.0

    def test_local_column(self):
        m = make_model([[0.0, 1.0], [0.0, 1.0]], PartitionSet.from_local([rule(0, 0.0)]))
        assert predict_score(m, [1.0, 2.0]) == 3.0
        assert predict_score(m, [-1.0, 2.0]) == 0.0

    def test_labels(self):
        ps = PartitionSet.from_local()
        assert predict_label(make_model([[0.3]], ps), [1.0]) == 1.0
        assert predict_label(make_model([[0.0]], ps), [1.0]) == 1.0
        assert predict_label(make_model([[-0.3]], ps), [1.0]) == -1.0

    def test_regression_destandardizes(self):
        m = make_model([[0.5]], PartitionSet.from_local(), Task.REGRESSION,
                       target_mean=10.0, target_std=2.0)
        assert predict_label(m, [1.0]) == 11.0

    def test_dimension_mismatch(self):
        m = make_model([[1.0]], PartitionSet.from_local())
        with pytest.raises(InputError):
            predict_score(m, [1.0, 2.0])
        with pytest.raises(InputError):
            predict_scores(m, np.zeros((3, 2)))

    def test_empty_batch(self):
        m = make_model([[1.0]], PartitionSet.from_local())
        assert predict_scores(m, np.zeros((0, 1))).shape == (0,)

    def test_model_validation(self):
        ps = PartitionSet.from_local([rule(0, 0.0)])
        with pytest.raises(InputError):
            make_model(np.zeros((1, 3)), ps)
        with pytest.raises(InputError):
            make_model([[np.nan, 0.0]], ps)

    def test_preprocessing_replayed(self):
        prep = Preprocessing(n_features=1, feature_min=(0.0,), feature_max=(4.0,),
                             fit_intercept=True)
        m = Model(PartitionSet.from_local(), np.array([[1.0], [0.5]]), Task.CLASSIFICATION, prep)
        # x=3 scales to 0.5, plus the intercept column
        assert predict_score(m, [3.0]) == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_additive_and_masking(self, seed):
        rng = np.random.default_rng(seed)
        ps = PartitionSet.from_local([rule(d, rng.normal()) for d in range(3)])
        X = rng.normal(size=(8, 3))
        A1, A2 = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
        s1 = predict_scores(make_model(A1, ps), X)
        s2 = predict_scores(make_model(A2, ps), X)
        s12 = predict_scores(make_model(A1 + A2, ps), X)
        assert np.allclose(s12, s1 + s2, rtol=1e-10, atol=1e-12)
        assert np.allclose(s1, naive_scores(X, activeness_matrix(ps, X), A1), rtol=1e-12)
        masked = A1.copy()
        masked[:, 1:] = 0.0
        assert np.array_equal(predict_scores(make_model(masked, ps), X), X @ A1[:, 0])
