"""Association measures, Wald tests, stepwise selection, Wilson intervals."""

import dataclasses
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbtilab.errors import (
    NumericError,
    ParameterError,
    ShapeError,
    TestUndefinedError as UndefinedTestError,
)
from mbtilab.inference import (
    cramers_v_bias_corrected,
    dichotomy_association,
    group_retention_chisq,
    normal_two_sided_p,
    pearson_chi2,
    stepwise_select,
    variable_importance,
    wald_statistics,
    wilson_ci,
)
from mbtilab.learn.logistic import fit_logistic


def chi2_sf_oracle(chi2, df):
    """High-precision chi-squared survival function."""
    with mpmath.workdps(50):
        return float(mpmath.gammainc(df / 2, chi2 / 2, mpmath.inf, regularized=True))


class TestPearsonChi2:
    def test_diagonal_2x2(self):
        # all expected counts are 5: 4 cells contribute 25/5 each
        assert pearson_chi2(np.array([[10, 0], [0, 10]])) == 20.0

    def test_independent_table_is_zero(self):
        assert pearson_chi2(np.array([[10, 10], [10, 10]])) == 0.0

    def test_zero_expected_contributes_zero(self):
        assert pearson_chi2(np.array([[2.0, 0.0], [0.0, 0.0]])) == 0.0

    def test_scaling(self):
        t = np.array([[8, 2], [3, 7]], dtype=float)
        assert pearson_chi2(3 * t) == pytest.approx(3 * pearson_chi2(t), rel=1e-12)


class TestCramersV:
    def test_pinned_mixed_table(self):
        v = cramers_v_bias_corrected(np.array([[30, 10], [10, 30]]))
        assert v == pytest.approx(0.4903, abs=1e-4)

    def test_perfect_association_is_one(self):
        # the bias correction cancels exactly on a perfect 2x2 diagonal
        assert cramers_v_bias_corrected(np.array([[20, 0], [0, 20]])) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_independence_is_zero(self):
        assert cramers_v_bias_corrected(np.array([[10, 10], [10, 10]])) == 0.0

    def test_weak_association_clipped_to_zero(self):
        # phi2 below the bias term: corrected phi2 clamps at zero
        assert cramers_v_bias_corrected(np.array([[6, 5], [5, 6]])) == 0.0

    def test_shape_rejections(self):
        with pytest.raises(ShapeError):
            cramers_v_bias_corrected(np.array([[1, 2]]))
        with pytest.raises(ShapeError):
            cramers_v_bias_corrected(np.array([[1, 0], [2, 0]]))
        with pytest.raises(ParameterError):
            cramers_v_bias_corrected(np.array([[1, -1], [2, 3]]))

    def test_range_property(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            t = rng.integers(1, 30, size=(2, 2))
            v = cramers_v_bias_corrected(t)
            assert 0.0 <= v <= 1.0


class TestDichotomyAssociation:
    def make_truths(self, n=200, seed=1):
        rng = np.random.default_rng(seed)
        truths = rng.integers(0, 2, size=(4, n))
        truths[:, :2] = [[0, 1]] * 4  # both classes guaranteed
        return truths

    def test_shape_and_diagonal(self):
        truths = self.make_truths()
        out = dichotomy_association(truths)
        assert out.shape == (4, 4)
        np.testing.assert_allclose(np.diag(out), 1.0, atol=1e-12)

    def test_symmetric(self):
        out = dichotomy_association(self.make_truths(seed=2))
        np.testing.assert_allclose(out, out.T, atol=1e-12)

    def test_independent_labels_near_zero(self):
        out = dichotomy_association(self.make_truths(n=2000, seed=3))
        off = out[~np.eye(4, dtype=bool)]
        assert (off < 0.15).all()

    def test_shape_rejected(self):
        with pytest.raises(ShapeError):
            dichotomy_association(np.zeros((3, 10)))


class TestChi2Pvalue:
    def test_diagonal_table_vs_oracle(self):
        chi2 = pearson_chi2(np.array([[10, 0], [0, 10]]))
        _, df, p = group_retention_chisq({"a": (10, 10), "b": (0, 10)})
        assert df == 1
        assert p == pytest.approx(chi2_sf_oracle(chi2, 1), abs=1e-8)
        assert p == pytest.approx(7.744216431044089e-06, abs=1e-8)

    def test_random_tables_vs_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            counts = {}
            for g in range(int(rng.integers(2, 6))):
                total = int(rng.integers(1, 40))
                counts[f"g{g}"] = (int(rng.integers(0, total + 1)), total)
            chi2, df, p = group_retention_chisq(counts)
            assert p == pytest.approx(chi2_sf_oracle(chi2, df), abs=1e-10)


class TestNormalP:
    def test_zero_stat(self):
        assert normal_two_sided_p(0.0) == 1.0

    def test_critical_value(self):
        assert normal_two_sided_p(1.959963984540054) == pytest.approx(0.05, abs=1e-12)

    def test_symmetric(self):
        assert normal_two_sided_p(-2.3) == normal_two_sided_p(2.3)

    def test_vs_oracle(self):
        with mpmath.workdps(40):
            expected = float(2 * (1 - mpmath.ncdf(1.7)))
        assert normal_two_sided_p(1.7) == pytest.approx(expected, abs=1e-14)


class TestWald:
    def fit(self, seed=5, n=300):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 2))
        p = 1 / (1 + np.exp(-(0.5 + X @ np.array([1.0, 0.0]))))
        y = (rng.random(n) < p).astype(np.float64)
        return fit_logistic(X, y, ridge=0.0), X, y

    def test_rows(self):
        model, _, _ = self.fit()
        rows = wald_statistics(model, feature_names=["a", "b"])
        assert [r[0] for r in rows] == ["a", "b"]
        for name, coef, se, stat, p in rows:
            assert stat == pytest.approx(coef / se, rel=1e-12)
            assert p == pytest.approx(normal_two_sided_p(stat), abs=1e-15)

    def test_informative_feature_has_small_p(self):
        model, _, _ = self.fit()
        rows = wald_statistics(model)
        assert rows[0][4] < 1e-6
        assert rows[1][4] > 0.001

    def test_name_count_checked(self):
        model, _, _ = self.fit()
        with pytest.raises(ShapeError):
            wald_statistics(model, feature_names=["only-one"])

    def test_none_ses_raise(self):
        model, _, _ = self.fit()
        broken = dataclasses.replace(model, standard_errors=None)
        with pytest.raises(NumericError):
            wald_statistics(broken)

    def test_unconverged_raises(self):
        model, _, _ = self.fit()
        stalled = dataclasses.replace(model, converged=False)
        with pytest.raises(ParameterError):
            wald_statistics(stalled)


class TestStepwise:
    def planted(self, n=400, m=10, seed=6):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, m))
        logits = 1.2 * X[:, 0] - 1.0 * X[:, 3] + 0.9 * X[:, 7]
        y = (rng.random(n) < 1 / (1 + np.exp(-logits))).astype(np.int64)
        return X, y, {"x0", "x3", "x7"}

    def test_recovers_planted(self):
        X, y, planted = self.planted()
        trace = stepwise_select(X, y, seed=1)
        assert planted <= set(trace.retained)
        assert len(set(trace.retained) - planted) <= 2

    def test_replay_reproduces_retained(self):
        X, y, _ = self.planted(seed=7)
        trace = stepwise_select(X, y, seed=2)
        assert trace.replay() == trace.retained

    def test_deterministic(self):
        X, y, _ = self.planted(seed=8)
        a = stepwise_select(X, y, seed=3)
        b = stepwise_select(X, y, seed=3)
        assert a.steps == b.steps
        assert a.retained == b.retained

    def test_pure_noise_retains_little(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(300, 8))
        y = rng.integers(0, 2, size=300)
        trace = stepwise_select(X, y, seed=4)
        assert len(trace.retained) <= 2

    def test_group_counts(self):
        X, y, _ = self.planted(seed=10)
        groups = ["even" if j % 2 == 0 else "odd" for j in range(10)]
        trace = stepwise_select(X, y, groups=groups, seed=5)
        assert set(trace.group_counts) == {"even", "odd"}
        for retained, total in trace.group_counts.values():
            assert 0 <= retained <= total
        assert sum(t for _, t in trace.group_counts.values()) == 10

    def test_thresholds_validated(self):
        X, y, _ = self.planted()
        with pytest.raises(ParameterError):
            stepwise_select(X, y, p_in=0.1, p_out=0.05)

    def test_max_steps_bounds_trace(self):
        X, y, _ = self.planted(seed=11)
        trace = stepwise_select(X, y, max_steps=3, seed=6)
        assert len(trace.steps) <= 3

    def test_variable_importance_ranked(self):
        X, y, _ = self.planted(seed=12)
        trace = stepwise_select(X, y, seed=7)
        rows = variable_importance(trace, trace.final_model, ("E", "I"))
        stats = [abs(r.statistic) for r in rows]
        assert stats == sorted(stats, reverse=True)
        for row in rows:
            assert row.preferred in ("E", "I")
        by_name = {r.feature: r for r in rows}
        # x0 was planted with a positive coefficient: pushes toward "E"
        assert by_name["x0"].preferred == "E"
        assert by_name["x3"].preferred == "I"


class TestGroupRetention:
    def test_zero_total_group_excluded(self):
        counts = {"a": (3, 10), "b": (1, 10), "empty": (0, 0)}
        chi2, df, p = group_retention_chisq(counts)
        assert df == 1  # two nonempty groups

    def test_needs_two_groups(self):
        with pytest.raises(UndefinedTestError):
            group_retention_chisq({"a": (3, 10), "empty": (0, 0)})

    def test_retained_bounds_checked(self):
        with pytest.raises(ParameterError):
            group_retention_chisq({"a": (11, 10), "b": (1, 5)})

    def test_identical_rates_give_p_one(self):
        chi2, df, p = group_retention_chisq({"a": (5, 10), "b": (10, 20)})
        assert chi2 == pytest.approx(0.0, abs=1e-12)
        assert p == pytest.approx(1.0, abs=1e-12)


class TestWilson:
    def test_zero_successes(self):
        ci = wilson_ci(0, 10)
        assert ci.lower == 0.0
        assert ci.upper == pytest.approx(0.2775, abs=1e-4)

    def test_half(self):
        ci = wilson_ci(5, 10)
        assert ci.lower == pytest.approx(0.2366, abs=1e-4)
        assert ci.upper == pytest.approx(0.7634, abs=1e-4)

    def test_all_successes(self):
        ci = wilson_ci(10, 10)
        assert ci.upper == 1.0
        assert ci.lower == pytest.approx(1 - 0.2775, abs=1e-4)

    @given(st.integers(1, 60).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
    @settings(max_examples=100, deadline=None)
    def test_complement_symmetry(self, n_and_k):
        n, k = n_and_k
        a = wilson_ci(k, n)
        b = wilson_ci(n - k, n)
        assert a.lower == pytest.approx(1 - b.upper, abs=1e-12)
        assert a.upper == pytest.approx(1 - b.lower, abs=1e-12)

    def test_narrower_with_more_data(self):
        small = wilson_ci(5, 10)
        big = wilson_ci(50, 100)
        assert (big.upper - big.lower) < (small.upper - small.lower)

    def test_level_changes_width(self):
        loose = wilson_ci(5, 10, level=0.8)
        tight = wilson_ci(5, 10, level=0.99)
        assert (tight.upper - tight.lower) > (loose.upper - loose.lower)

    def test_validation(self):
        with pytest.raises(ParameterError):
            wilson_ci(1, 0)
        with pytest.raises(ParameterError):
            wilson_ci(-1, 5)
        with pytest.raises(ParameterError):
            wilson_ci(6, 5)
        with pytest.raises(ParameterError):
            wilson_ci(2, 5, level=1.0)
