import math
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from bayes_factors import MixingDensity, bayes_factor
from errors import InvariantViolationError
from model_space import Dataset, ModelIndicator, center_design, model_stats
from regularized_prior import (
    CHECK_NAMES,
    Regularizer,
    build_regularizer,
    conditional_posterior,
    determinant_identity,
    estimable_posterior,
    hat_matrix,
    marginal_log_ratio_fixed_t,
    marginal_ratio_fixed_t,
    run_invariant_battery,
    verify_generalized_inverse,
    verify_saturated_reparameterization,
)


def _singular_case(n=5, k=8, k0=1, seed=4):
    rng = np.random.default_rng(seed)
    d = Dataset.from_arrays(rng.standard_normal(n), rng.standard_normal((n, k)), k0=k0)
    cd = center_design(d)
    return d, cd, ModelIndicator.full(k)


def _regular_case(n=12, p=4, k0=1, seed=5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    d = Dataset.from_arrays(X[:, 0] + rng.standard_normal(n), X, k0=k0)
    return d, center_design(d)


class TestRegularizer:
    def test_shape_completes_row_space(self):
        d, cd, m = _singular_case()
        reg = build_regularizer(cd, m, seed=1)
        assert reg.C.shape == (8 - 5 + 1, 8)
        assert reg.T.shape == (8, 8)
        np.testing.assert_allclose(reg.T, reg.C.T @ reg.C)

    def test_regular_model_gets_zero(self):
        d, cd = _regular_case()
        reg = build_regularizer(cd, ModelIndicator.from_indices([0, 1], d.p))
        assert reg.rank == 0
        assert not reg.T.any()

    def test_seeded_construction_is_deterministic(self):
        _, cd, m = _singular_case()
        np.testing.assert_array_equal(build_regularizer(cd, m, seed=3).C, build_regularizer(cd, m, seed=3).C)


class TestGeneralizedInverse:
    def test_valid_regularizer_passes(self):
        _, cd, m = _singular_case()
        result = verify_generalized_inverse(cd, m, build_regularizer(cd, m, seed=2))
        assert result.passed

    def test_ridge_fails(self):
        _, cd, m = _singular_case()
        result = verify_generalized_inverse(cd, m, Regularizer.ridge(8, 1.0))
        assert not result.passed

    def test_rows_inside_row_space_are_rejected(self):
        _, cd, m = _singular_case()
        V = cd.columns(m)
        # rows built from rows of V leave V'V + T singular
        C = np.random.default_rng(0).standard_normal((4, V.shape[0])) @ V
        with pytest.raises(InvariantViolationError):
            verify_generalized_inverse(cd, m, Regularizer.from_rows(C))


class TestHatMatrix:
    @pytest.mark.parametrize("t", [0.1, 1.0, 100.0])
    def test_independent_of_regularizer(self, t):
        _, cd, m = _singular_case()
        H1 = hat_matrix(cd, m, build_regularizer(cd, m, seed=10), t)
        H2 = hat_matrix(cd, m, build_regularizer(cd, m, seed=20), t)
        np.testing.assert_allclose(H1, H2, atol=1e-8)

    def test_regular_model_tends_to_projector(self):
        d, cd = _regular_case()
        m = ModelIndicator.from_indices([0, 2, 3], d.p)
        V = cd.columns(m)
        P = V @ np.linalg.solve(V.T @ V, V.T)
        H = hat_matrix(cd, m, Regularizer.zero(3), 1e8)
        assert float(np.max(np.abs(H - P))) <= 1e-6

    def test_estimable_functions_do_not_depend_on_regularizer(self):
        _, cd, m = _singular_case()
        c = np.random.default_rng(8).standard_normal(cd.n)
        a = estimable_posterior(cd, m, build_regularizer(cd, m, seed=1), 2.0, cd.y_centered, c)
        b = estimable_posterior(cd, m, build_regularizer(cd, m, seed=2), 2.0, cd.y_centered, c)
        assert a[0] == pytest.approx(b[0], abs=1e-8)
        assert a[1] == pytest.approx(b[1], abs=1e-8)

    def test_zero_contrast(self):
        _, cd, m = _singular_case()
        assert estimable_posterior(cd, m, build_regularizer(cd, m), 1.0, cd.y_centered, np.zeros(cd.n)) == (0.0, 0.0)


class TestConditionalPosterior:
    def test_regular_model_matches_shrunk_least_squares(self):
        d, cd = _regular_case()
        m = ModelIndicator.from_indices([0, 1], d.p)
        V = cd.columns(m)
        t = 4.0
        post = conditional_posterior(cd, m, Regularizer.zero(2), t, cd.y_centered)
        beta_hat = np.linalg.solve(V.T @ V, V.T @ cd.y_centered)
        np.testing.assert_allclose(post.mean, t / (1.0 + t) * beta_hat, rtol=1e-10)
        np.testing.assert_allclose(post.scale, t / (1.0 + t) * np.linalg.inv(V.T @ V), rtol=1e-10)

    def test_non_positive_t(self):
        d, cd = _regular_case()
        with pytest.raises(InvariantViolationError):
            conditional_posterior(cd, ModelIndicator.from_indices([0], d.p), Regularizer.zero(1), 0.0, cd.y_centered)


class TestMarginalRatio:
    """Fixed-t marginal likelihood ratio against the null model."""

    @pytest.mark.parametrize("t", [0.1, 1.0, 100.0])
    @pytest.mark.parametrize("k0", [0, 1])
    def test_singular_ratio_is_one(self, t, k0):
        d, cd, m = _singular_case(n=6, k=9, k0=k0)
        reg = build_regularizer(cd, m, seed=7)
        assert marginal_ratio_fixed_t(d, cd, m, reg, t) == pytest.approx(1.0, abs=1e-8)

    def test_saturated_ratio_is_one(self):
        d, cd, m = _singular_case(n=6, k=5, k0=1)
        reg = build_regularizer(cd, m)
        assert reg.rank == 0
        assert marginal_log_ratio_fixed_t(d, cd, m, reg, 3.0) == pytest.approx(0.0, abs=1e-8)

    def test_regular_ratio_equals_point_mass_bayes_factor(self):
        d, cd = _regular_case(n=15, p=5)
        m = ModelIndicator.from_indices([0, 3], d.p)
        for t in (0.5, 9.0, 250.0):
            log_ratio = marginal_log_ratio_fixed_t(d, cd, m, Regularizer.zero(2), t)
            bf = bayes_factor(model_stats(d, cd, m), MixingDensity.point_mass(t), d.n, d.k0)
            assert log_ratio == pytest.approx(bf.log_value, abs=1e-8 * max(1.0, abs(bf.log_value)))

    def test_ridge_breaks_the_ratio(self):
        d, cd, m = _singular_case()
        assert not math.isclose(marginal_ratio_fixed_t(d, cd, m, Regularizer.ridge(8, 1.0), 1.0), 1.0, abs_tol=1e-6)


class TestDeterminantIdentity:
    @pytest.mark.parametrize("k0", [0, 1])
    def test_identity_holds(self, k0):
        _, cd, m = _singular_case(n=6, k=10, k0=k0)
        assert determinant_identity(cd, m, build_regularizer(cd, m, seed=5)) == pytest.approx(1.0, abs=1e-8)

    def test_wrong_row_count_raises(self):
        _, cd, m = _singular_case()
        with pytest.raises(InvariantViolationError):
            determinant_identity(cd, m, Regularizer.ridge(8, 1.0))


def test_saturated_reparameterization():
    _, cd, m = _singular_case(n=6, k=9)
    result = verify_saturated_reparameterization(cd, m)
    assert result.passed
    assert result.max_residual <= 1e-8


class TestInvariantBattery:
    def test_battery_passes(self):
        report = run_invariant_battery(seed=0)
        assert report.passed
        # sizes 3..8: four singular designs without an intercept, five with one
        assert report.singular_cases == 6 * (4 + 5) >= 50
        assert report.cases == report.singular_cases + 6 * 2
        assert set(report.checks) == set(CHECK_NAMES)
        payload = report.to_dict()
        assert payload["passed"] is True
        assert [c["name"] for c in payload["checks"]] == list(CHECK_NAMES)

    def test_sabotage_is_detected(self):
        report = run_invariant_battery(seed=0, sizes=[4], sabotage=True)
        assert not report.passed
        assert not report.checks["generalized_inverse"].passed
        assert report.checks["saturated_reparameterization"].passed

    def test_battery_is_reproducible(self):
        a = run_invariant_battery(seed=9, sizes=[4]).to_dict()
        b = run_invariant_battery(seed=9, sizes=[4]).to_dict()
        assert a == b
