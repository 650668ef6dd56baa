import numpy as np
import pytest

from pctcoef.errors import (
    CollinearityError,
    DegenerateVariableError,
    InsufficientDataError,
)
from pctcoef.percentize import percentize_value
from pctcoef.regression import fit_ols, fit_three_ways, standardized_beta

from .conftest import numeric_dm, random_regression


def normal_equations(y, x):
    """Independent OLS oracle: solve (A'A) c = A'y directly."""
    a = np.column_stack([np.ones(len(y)), np.column_stack(x) if isinstance(x, list) else x])
    coef = np.linalg.solve(a.T @ a, a.T @ y)
    resid = y - a @ coef
    tss = ((y - y.mean()) ** 2).sum()
    return coef[0], coef[1:], 1.0 - (resid @ resid) / tss


class TestFitOls:
    def test_noiseless_line(self):
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        y = 2 * x + 1
        intercept, coef, r2 = fit_ols(y, [x])
        assert intercept == pytest.approx(1.0, abs=1e-10)
        assert coef[0] == pytest.approx(2.0, abs=1e-10)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_constant_response(self, caplog):
        x = np.array([0.0, 1.0, 2.0, 3.0])
        y = np.full(4, 7.0)
        with caplog.at_level("WARNING", logger="pctcoef.regression"):
            intercept, coef, r2 = fit_ols(y, [x])
        assert coef[0] == pytest.approx(0.0, abs=1e-10)
        assert intercept == pytest.approx(7.0, abs=1e-10)
        assert r2 == 0.0
        assert any("zero variance" in r.message for r in caplog.records)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(50, 3))
        y = x @ np.array([1.0, -0.5, 0.25]) + rng.normal(size=50)
        got = fit_ols(y, x)
        want = normal_equations(y, x)
        assert got[0] == pytest.approx(want[0], abs=1e-8)
        np.testing.assert_allclose(got[1], want[1], atol=1e-8)
        assert got[2] == pytest.approx(want[2], abs=1e-10)

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientDataError):
            fit_ols(np.array([1.0, 2.0]), [np.array([1.0, 2.0])])

    def test_collinearity_error(self):
        rng = np.random.default_rng(3)
        x0 = rng.normal(size=30)
        x1 = 2 * x0  # exactly dependent
        y = rng.normal(size=30)
        with pytest.raises(CollinearityError):
            fit_ols(y, [x0, x1])

    def test_constant_column_collinear_with_intercept(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=20)
        with pytest.raises(CollinearityError, match="intercept"):
            fit_ols(y, [np.full(20, 3.0), rng.normal(size=20)])


class TestStandardizedBeta:
    def test_published_inputs(self):
        # raw slope and the two SDs as published; beta lands near the
        # published -.189 within input-rounding slack
        beta = standardized_beta(-0.008, 16.99, 0.73)
        assert beta == pytest.approx(-0.008 * 16.99 / 0.73, abs=1e-15)
        assert abs(beta - (-0.189)) < 0.01

    def test_equal_sds(self):
        assert standardized_beta(0.37, 2.5, 2.5) == pytest.approx(0.37)

    def test_zero_slope(self):
        assert standardized_beta(0.0, 1.3, 2.6) == 0.0

    def test_zero_sd_degenerate(self):
        with pytest.raises(DegenerateVariableError):
            standardized_beta(1.0, 0.0, 1.0)
        with pytest.raises(DegenerateVariableError):
            standardized_beta(1.0, 1.0, 0.0)


class TestFitThreeWays:
    def test_noiseless_known_percentage_coefficient(self):
        # b_p = -0.269 with IV anchors (0, 100) and DV anchors (1, 4)
        # forces b_w = -0.269 * 3 / 100 on the raw scales
        bp_true = -0.269
        bw_true = bp_true * 3.0 / 100.0
        x = np.linspace(5.0, 95.0, 40)
        y = 4.0 + bw_true * x
        dm = numeric_dm(y, [x], (1, 4), [(0, 100)])
        fit = fit_three_ways(dm)
        assert fit.rows[0].b_w == pytest.approx(bw_true, abs=1e-12)
        assert fit.rows[0].b_p == pytest.approx(bp_true, abs=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_dummy_iv_reduces_to_dv_range(self):
        rng = np.random.default_rng(5)
        x = rng.integers(0, 2, size=60).astype(float)
        y = 1.5 + 0.9 * x + rng.normal(0, 0.1, size=60)
        dm = numeric_dm(y, [x], (0, 5), [(0, 1)])
        fit = fit_three_ways(dm)
        assert fit.rows[0].b_p == pytest.approx(fit.rows[0].b_w / 5.0, abs=1e-12)

    def test_conversion_identity_random(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            y, xcols, ya, xa, _ = random_regression(rng)
            dm = numeric_dm(y, xcols, ya, xa)
            fit = fit_three_ways(dm)
            ry = ya[1] - ya[0]
            for row, (lo, hi) in zip(fit.rows, xa):
                assert abs(row.b_p - row.b_w * (hi - lo) / ry) < 1e-10

    def test_signs_agree_across_flavors(self):
        rng = np.random.default_rng(8)
        y, xcols, ya, xa, _ = random_regression(rng, n=120, p=4)
        fit = fit_three_ways(numeric_dm(y, xcols, ya, xa))
        for row in fit.rows:
            signs = {np.sign(row.b_w), np.sign(row.beta), np.sign(row.b_p)}
            assert len(signs) == 1

    def test_r2_equal_on_both_scales(self):
        rng = np.random.default_rng(9)
        y, xcols, ya, xa, _ = random_regression(rng, n=150, p=3)
        _, _, r2_raw = fit_ols(y, xcols)
        y_pct = percentize_value(np.asarray(y), *ya)
        x_pct = [percentize_value(np.asarray(c), *a) for c, a in zip(xcols, xa)]
        _, _, r2_pct = fit_ols(y_pct, x_pct)
        assert abs(r2_raw - r2_pct) < 1e-10

    def test_predictions_map_through_transform(self):
        rng = np.random.default_rng(10)
        y, xcols, ya, xa, _ = random_regression(rng, n=100, p=2)
        dm = numeric_dm(y, xcols, ya, xa)
        fit = fit_three_ways(dm)
        bw = np.array([r.b_w for r in fit.rows])
        bp = np.array([r.b_p for r in fit.rows])
        pred_raw = fit.intercept_raw + dm.X_raw @ bw
        pred_pct = fit.intercept_p + dm.X_pct @ bp
        np.testing.assert_allclose(
            percentize_value(pred_raw, *ya), pred_pct, atol=1e-10
        )

    def test_beta_scale_invariance(self):
        rng = np.random.default_rng(12)
        y, xcols, ya, xa, _ = random_regression(rng, n=130, p=3)
        fit = fit_three_ways(numeric_dm(y, xcols, ya, xa))
        alphas = rng.uniform(0.1, 10, size=3)
        gammas = rng.uniform(-50, 50, size=3)
        xcols2 = [a * np.asarray(c) + g for c, a, g in zip(xcols, alphas, gammas)]
        xa2 = [(a * lo + g, a * hi + g) for (lo, hi), a, g in zip(xa, alphas, gammas)]
        fit2 = fit_three_ways(numeric_dm(y, xcols2, ya, xa2))
        for r1, r2 in zip(fit.rows, fit2.rows):
            assert abs(r1.beta - r2.beta) < 1e-10
        assert abs(fit.r_squared - fit2.r_squared) < 1e-10
        # percentage coefficients are also invariant: anchors moved with the data
        for r1, r2 in zip(fit.rows, fit2.rows):
            assert abs(r1.b_p - r2.b_p) < 1e-10

    def test_published_consistency_interval(self):
        # a slope published as -.008 could be anything in (-.0085, -.0075];
        # converted by the 100/3 scale ratio that bounds the percentage
        # coefficient, and the published -.269 falls inside
        lo = -0.0085 * 100.0 / 3.0
        hi = -0.0075 * 100.0 / 3.0
        assert lo < -0.269 < hi
