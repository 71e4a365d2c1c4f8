import sys
from pathlib import Path

import numpy as np
import pytest

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from errors import (
    DatasetIOError,
    DatasetParseError,
    DatasetValidationError,
    DegenerateResponseError,
    RankDeficiencyError,
)
from model_space import (
    Dataset,
    ModelIndicator,
    RankClass,
    center_design,
    classify,
    full_rank_factorize,
    load_dataset,
    model_stats,
    numerical_rank,
    rank_of_v,
)


def _random_dataset(n=8, p=5, k0=1, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    y = X[:, 0] - 0.5 * X[:, 1] + rng.standard_normal(n)
    return Dataset.from_arrays(y, X, k0=k0)


def _write(path, text):
    path.write_text(text)
    return path


class TestLoadDataset:
    def test_response_by_name_and_column_order(self, tmp_path):
        path = _write(tmp_path / "d.csv", "a,resp,b\n1,10,4\n2,20,5\n3,31,7\n")
        d = load_dataset(path, "resp")
        assert d.response_name == "resp"
        assert d.column_names == ["a", "b"]
        assert d.y.tolist() == [10.0, 20.0, 31.0]
        assert d.X[:, 1].tolist() == [4.0, 5.0, 7.0]
        assert d.k0 == 1

    def test_response_by_index_and_no_intercept(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x\n1,2\n3,5\n")
        d = load_dataset(path, "0", intercept=False)
        assert d.k0 == 0
        assert d.n == 2 and d.p == 1

    def test_max_rows_keeps_first_observations(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x\n1,2\n3,5\n4,1\n7,9\n")
        d = load_dataset(path, max_rows=3)
        assert d.n == 3
        assert d.y.tolist() == [1.0, 3.0, 4.0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetIOError) as info:
            load_dataset(tmp_path / "nope.csv")
        assert info.value.exit_code == 3

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x1,x2\n1,2,3\n4,abc,6\n")
        with pytest.raises(DatasetParseError) as info:
            load_dataset(path)
        assert info.value.details == {"row": 3, "column": "x1"}
        assert info.value.exit_code == 2

    def test_ragged_row(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x1\n1,2\n4\n")
        with pytest.raises(DatasetParseError):
            load_dataset(path)

    def test_unknown_response_column(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x1\n1,2\n4,5\n")
        with pytest.raises(DatasetParseError):
            load_dataset(path, "z")

    def test_constant_column_with_intercept_is_rejected(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x1,x2\n1,2,3\n4,2,6\n5,2,1\n")
        with pytest.raises(DatasetValidationError) as info:
            load_dataset(path)
        assert info.value.details["column"] == "x1"

    def test_constant_column_without_intercept_is_allowed(self, tmp_path):
        path = _write(tmp_path / "d.csv", "y,x1,x2\n1,2,3\n4,2,6\n5,2,1\n")
        d = load_dataset(path, intercept=False)
        assert d.p == 2


class TestDatasetValidation:
    def test_shape_mismatch(self):
        with pytest.raises(DatasetValidationError):
            Dataset.from_arrays([1.0, 2.0, 3.0], np.ones((2, 2)) + np.eye(2))

    def test_non_finite(self):
        X = np.array([[1.0, 2.0], [np.nan, 1.0], [0.0, 3.0]])
        with pytest.raises(DatasetValidationError):
            Dataset.from_arrays([1.0, 2.0, 3.0], X)

    def test_bad_k0(self):
        with pytest.raises(DatasetValidationError):
            Dataset.from_arrays([1.0, 2.0], [[1.0], [2.0]], k0=2)

    def test_head(self):
        d = _random_dataset(n=10, p=3)
        h = d.head(4)
        assert h.n == 4
        np.testing.assert_array_equal(h.X, d.X[:4])


class TestModelIndicator:
    def test_from_indices_and_hex(self):
        m = ModelIndicator.from_indices([0, 9], 10)
        assert m.k == 2
        assert m.indices.tolist() == [0, 9]
        assert m.hex() == "8040"

    def test_equality_and_hash_use_bits(self):
        a = ModelIndicator.from_indices([1, 3], 6)
        b = ModelIndicator(np.array([0, 1, 0, 1, 0, 0]))
        assert a == b
        assert len({a, b}) == 1
        assert a != ModelIndicator.from_indices([1, 3], 7)

    def test_flipped_does_not_mutate(self):
        a = ModelIndicator.from_indices([2], 4)
        b = a.flipped(2)
        assert a.k == 1 and b.k == 0
        assert b == ModelIndicator.null(4)

    def test_gamma_is_read_only(self):
        m = ModelIndicator.null(3)
        with pytest.raises(ValueError):
            m.gamma[0] = True

    def test_sort_key_orders_by_dimension_first(self):
        small = ModelIndicator.from_indices([3], 4)
        large = ModelIndicator.from_indices([0, 1], 4)
        assert small.sort_key() < large.sort_key()


@pytest.mark.parametrize(
    "k, n, k0, expected",
    [
        (0, 5, 1, RankClass.REGULAR),
        (3, 5, 1, RankClass.REGULAR),
        (4, 5, 1, RankClass.SATURATED),
        (5, 5, 1, RankClass.SINGULAR),
        (5, 5, 0, RankClass.SATURATED),
        (4, 5, 0, RankClass.REGULAR),
    ],
)
def test_classify(k, n, k0, expected):
    assert classify(k, n, k0) is expected


class TestCenterDesign:
    def test_columns_and_response_sum_to_zero(self):
        d = _random_dataset(n=10, p=7, seed=4)
        cd = center_design(d)
        assert np.abs(cd.V.sum(axis=0)).max() < 1e-12
        assert abs(cd.y_centered.sum()) < 1e-12
        assert cd.column_means == pytest.approx(d.X.mean(axis=0))

    def test_no_intercept_leaves_design_alone(self):
        d = _random_dataset(n=6, p=3, k0=0, seed=5)
        cd = center_design(d)
        assert np.array_equal(cd.V, d.X)
        assert np.array_equal(cd.y_centered, d.y)
        assert cd.sse_null == pytest.approx(float(d.y @ d.y))

    def test_centering_twice_changes_nothing(self):
        d = _random_dataset(n=9, p=4, seed=6)
        once = center_design(d)
        twice = center_design(Dataset.from_arrays(once.y_centered, once.V, k0=1))
        assert np.allclose(twice.V, once.V, atol=1e-12)
        assert twice.sse_null == pytest.approx(once.sse_null, rel=1e-12)

class TestModelStats:
    def test_null_model_has_unit_ratio(self):
        d = _random_dataset()
        cd = center_design(d)
        stats = model_stats(d, cd, ModelIndicator.null(d.p))
        assert stats.q_ratio == 1.0
        assert stats.sse == pytest.approx(cd.sse_null)

    def test_regular_model_matches_least_squares(self):
        d = _random_dataset(n=12, p=4)
        cd = center_design(d)
        m = ModelIndicator.from_indices([0, 2], d.p)
        stats = model_stats(d, cd, m)
        Xg = np.column_stack([np.ones(d.n), d.X[:, [0, 2]]])
        beta, *_ = np.linalg.lstsq(Xg, d.y, rcond=None)
        resid = d.y - Xg @ beta
        assert stats.sse == pytest.approx(float(resid @ resid), rel=1e-10)
        assert 0.0 < stats.q_ratio < 1.0
        assert stats.rank_class is RankClass.REGULAR

    def test_singular_model_has_zero_sse(self):
        d = _random_dataset(n=4, p=6)
        cd = center_design(d)
        stats = model_stats(d, cd, ModelIndicator.from_indices([0, 1, 2, 3], d.p))
        assert stats.rank_class is RankClass.SINGULAR
        assert stats.sse == 0.0
        assert stats.rank_v == 3

    def test_constant_response_is_degenerate(self):
        rng = np.random.default_rng(1)
        d = Dataset.from_arrays(np.full(6, 2.5), rng.standard_normal((6, 3)), k0=1)
        with pytest.raises(DegenerateResponseError):
            model_stats(d, center_design(d), ModelIndicator.null(3))

    def test_collinear_regular_model_raises(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(8)
        X = np.column_stack([x, 2.0 * x, rng.standard_normal(8)])
        d = Dataset.from_arrays(rng.standard_normal(8), X, k0=1)
        with pytest.raises(RankDeficiencyError):
            model_stats(d, center_design(d), ModelIndicator.from_indices([0, 1], 3))

    def test_adding_covariates_never_raises_the_ratio(self):
        d = _random_dataset(n=14, p=8, seed=7)
        cd = center_design(d)
        nested = [(), (3,), (3, 0), (3, 0, 6), (3, 0, 6, 1), (3, 0, 6, 1, 5)]
        ratios = [model_stats(d, cd, ModelIndicator.from_indices(ix, d.p)).q_ratio for ix in nested]
        assert all(larger <= smaller + 1e-12 for smaller, larger in zip(ratios, ratios[1:]))

    def test_column_order_does_not_change_the_fit(self):
        d = _random_dataset(n=11, p=6, seed=8)
        perm = np.array([4, 0, 5, 2, 1, 3])
        shuffled = Dataset.from_arrays(d.y, d.X[:, perm], k0=1)
        where = {int(old): new for new, old in enumerate(perm)}
        for indices in [(0,), (1, 4), (0, 2, 5), (0, 1, 2, 3, 4)]:
            original = model_stats(d, center_design(d), ModelIndicator.from_indices(indices, 6))
            moved = model_stats(
                shuffled, center_design(shuffled), ModelIndicator.from_indices([where[i] for i in indices], 6)
            )
            assert moved.sse == pytest.approx(original.sse, rel=1e-10)


class TestRank:
    def test_numerical_rank(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 5))
        assert numerical_rank(A) == 3
        assert numerical_rank(np.zeros((3, 0))) == 0

    def test_rank_of_v_with_intercept_loses_one(self):
        d = _random_dataset(n=5, p=8)
        cd = center_design(d)
        assert rank_of_v(cd, ModelIndicator.full(8)) == 4

    def test_full_rank_factorization_reconstructs(self):
        d = _random_dataset(n=5, p=8)
        cd = center_design(d)
        m = ModelIndicator.full(8)
        factors = full_rank_factorize(cd, m)
        assert factors.rank == 4
        assert factors.reconstruction_error(cd.columns(m)) < 1e-10
