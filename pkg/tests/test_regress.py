import math

import numpy as np
import pytest
import scipy.stats

from ytest import Dataset, DegenerateDesign, DegenerateFit, InsufficientData, RoleConflict
from ytest.regress import INTERCEPT, ols_arrays, ols_fit, t_quantile, t_two_sided_p


def test_closed_form_three_points():
    x = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 1.0, 1.0])
    # normal equations by hand: slope = Sxy / Sxx, intercept = ybar - slope * xbar
    sxy = ((x - x.mean()) * (y - y.mean())).sum()
    sxx = ((x - x.mean()) ** 2).sum()
    slope = sxy / sxx
    intercept = y.mean() - slope * x.mean()
    assert (slope, intercept) == pytest.approx((0.5, 1 / 6))
    coef, se, s2, df = ols_arrays(x, y)
    assert coef[1] == pytest.approx(slope, abs=1e-14)
    assert coef[0] == pytest.approx(intercept, abs=1e-14)
    assert df == 1
    # residuals are (-1/6, 1/3, -1/6)
    assert s2 == pytest.approx(1 / 6, abs=1e-14)


def test_ols_fit_reports_named_terms(rng):
    x = rng.standard_normal(30)
    z = rng.standard_normal(30)
    y = 2 * x - z + rng.standard_normal(30)
    fit = ols_fit(Dataset.from_arrays(y=y, x=x, z=z), "y", ["x", "z"])
    assert fit.terms == (INTERCEPT, "x", "z")
    assert fit.degrees_of_freedom == 27
    assert fit.n_obs == 30
    assert fit.coefficients["x"] == pytest.approx(2, abs=0.6)
    t = fit.t_statistic("x")
    assert fit.p_value("x") == pytest.approx(2 * scipy.stats.t.sf(abs(t), 27), rel=1e-12)


def test_perfect_fit_is_degenerate():
    x = np.arange(10.0)
    with pytest.raises(DegenerateFit):
        ols_fit(Dataset.from_arrays(x=x, y=x.copy()), "y", ["x"])


def test_duplicate_predictors_are_degenerate(rng):
    x = rng.standard_normal(20)
    ds = Dataset.from_arrays(y=rng.standard_normal(20), a=x, b=x.copy())
    with pytest.raises(DegenerateDesign):
        ols_fit(ds, "y", ["a", "b"])


def test_constant_predictor_is_degenerate(rng):
    ds = Dataset.from_arrays(y=rng.standard_normal(20), c=np.full(20, 3.0))
    with pytest.raises(DegenerateDesign):
        ols_fit(ds, "y", ["c"])


def test_constant_response_is_degenerate(rng):
    ds = Dataset.from_arrays(y=np.full(20, 1.5), x=rng.standard_normal(20))
    with pytest.raises(DegenerateFit):
        ols_fit(ds, "y", ["x"])


@pytest.mark.parametrize("k", [1, 2, 4])
def test_too_few_rows(rng, k):
    n = k + 2
    cols = {f"x{i}": rng.standard_normal(n) for i in range(k)}
    ds = Dataset({"y": rng.standard_normal(n), **cols})
    with pytest.raises(InsufficientData):
        ols_fit(ds, "y", list(cols))
    ds = Dataset({"y": rng.standard_normal(n + 1), **{c: rng.standard_normal(n + 1) for c in cols}})
    assert ols_fit(ds, "y", list(cols)).degrees_of_freedom == 2


def test_response_among_predictors(rng):
    ds = Dataset.from_arrays(y=rng.standard_normal(10), x=rng.standard_normal(10))
    with pytest.raises(RoleConflict):
        ols_fit(ds, "y", ["y", "x"])


def test_residual_sum_of_squares_is_minimal(rng):
    n = 40
    X = rng.standard_normal((n, 3))
    y = X @ [1.0, -2.0, 0.5] + rng.standard_normal(n)
    coef, *_ = ols_arrays(X, y)
    M = np.column_stack([np.ones(n), X])

    def rss(b):
        r = y - M @ b
        return r @ r

    h = 1e-6
    base = rss(coef)
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        grad = (rss(coef + e) - rss(coef - e)) / (2 * h)
        assert abs(grad) < 1e-5 * base
    for _ in range(20):
        d = rng.standard_normal(4)
        d *= h / np.linalg.norm(d)
        assert rss(coef + d) > base


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
def test_rescaling_predictor(rng, c):
    n = 50
    x = rng.standard_normal(n)
    z = rng.standard_normal(n)
    y = 0.3 * x + z + rng.standard_normal(n)
    a = ols_fit(Dataset.from_arrays(y=y, x=x, z=z), "y", ["x", "z"])
    b = ols_fit(Dataset.from_arrays(y=y, x=c * x, z=z), "y", ["x", "z"])
    assert b.coefficients["x"] == pytest.approx(a.coefficients["x"] / c, rel=1e-10)
    assert b.t_statistic("x") == pytest.approx(a.t_statistic("x"), rel=1e-10)
    assert abs(b.p_value("x") - a.p_value("x")) < 1e-10


def test_t_p_value_examples():
    assert t_two_sided_p(0.0, 7) == 1.0
    cauchy = 2 * (0.5 - math.atan(1.0) / math.pi)
    assert abs(t_two_sided_p(1.0, 1) - cauchy) < 1e-10
    assert abs(t_two_sided_p(1.0, 1) - 0.5) < 1e-10
    assert abs(t_two_sided_p(1.96, 100000) - 0.05) < 5e-4


@pytest.mark.parametrize("t", [0.1, 0.7, 1.0, 2.5, 9.0])
def test_t_p_value_analytic_small_df(t):
    # df=1: Cauchy; df=2: closed form 1 - t / sqrt(2 + t^2)
    assert t_two_sided_p(t, 1) == pytest.approx(1 - 2 * math.atan(t) / math.pi, abs=1e-13)
    assert t_two_sided_p(t, 2) == pytest.approx(1 - t / math.sqrt(2 + t * t), abs=1e-13)


def test_t_p_value_needs_positive_df():
    with pytest.raises(InsufficientData):
        t_two_sided_p(1.0, 0)


@pytest.mark.parametrize("df", [1, 3, 10, 96, 1000])
def test_t_quantile(df):
    assert t_quantile(0.025, df) == pytest.approx(scipy.stats.t.ppf(0.975, df), rel=1e-10)
