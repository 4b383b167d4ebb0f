import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from ytest import _kernels


def lstsq_oracle(X, y):
    n = len(y)
    M = np.column_stack([np.ones(n), X])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = y - M @ coef
    df = n - M.shape[1]
    s2 = resid @ resid / df
    se = np.sqrt(np.diag(s2 * np.linalg.pinv(M.T @ M)))
    return coef, se, s2


@pytest.mark.parametrize("df", [1, 2, 3, 7, 30, 97, 1000])
def test_t_tail_matches_scipy(backend, df):
    _, tail = backend
    t = np.array([0.0, 1e-8, 0.1, 0.5, 1.0, 1.96, 2.5, 4.0, 10.0, 50.0, -3.0])
    got = tail(t, df)
    want = 2 * scipy.stats.t.sf(np.abs(t), df)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=0)


def test_t_tail_large_df(backend):
    _, tail = backend
    t = np.array([0.3, 1.96, 4.0])
    np.testing.assert_allclose(tail(t, 1e5), 2 * scipy.stats.t.sf(t, 1e5), rtol=1e-9)


def test_t_tail_special_values(backend):
    _, tail = backend
    out = tail(np.array([np.inf, -np.inf, np.nan, 0.0]), 5.0)
    assert out[0] == 0.0 and out[1] == 0.0 and np.isnan(out[2]) and out[3] == 1.0


def test_t_tail_backends_agree():
    t = np.linspace(-8, 8, 161)
    for df in (1, 4, 48, 500):
        a = _kernels.t_two_sided_numpy(t, df)
        b = _kernels.t_two_sided_numba(t, df)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-300)


def test_ols_batch_matches_lstsq(backend, rng):
    ols, _ = backend
    X = rng.standard_normal((6, 40, 3)) * [1.0, 10.0, 0.01] + [0.0, 5.0, -2.0]
    y = rng.standard_normal((6, 40)) + X @ np.array([0.5, -0.1, 30.0])
    coef, se, resvar, status = ols(X, y)
    assert (status == _kernels.OK).all()
    for i in range(6):
        c, s, s2 = lstsq_oracle(X[i], y[i])
        np.testing.assert_allclose(coef[i], c, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(se[i], s, rtol=1e-9)
        assert resvar[i] == pytest.approx(s2, rel=1e-10)


def test_ols_batch_flags_degeneracy(backend, rng):
    ols, _ = backend
    X = rng.standard_normal((4, 20, 2))
    y = rng.standard_normal((4, 20))
    X[0, :, 1] = 3.0 * X[0, :, 0] - 1.0   # collinear
    X[1, :, 0] = 7.0                      # constant predictor
    y[2] = 2.0 + X[2] @ np.array([1.0, -1.0])   # perfect fit
    y[3] = 4.0                            # constant response
    _, _, _, status = ols(X, y)
    assert list(status) == [_kernels.DEGENERATE_DESIGN, _kernels.DEGENERATE_DESIGN,
                            _kernels.DEGENERATE_FIT, _kernels.DEGENERATE_FIT]


def test_ols_batch_near_collinear_is_not_flagged(backend, rng):
    ols, _ = backend
    x = rng.standard_normal(60)
    X = np.stack([x, x + 1e-3 * rng.standard_normal(60)], axis=1)[None]
    y = rng.standard_normal((1, 60))
    _, _, _, status = ols(X, y)
    assert status[0] == _kernels.OK


def test_backends_agree_on_batch(rng):
    X = rng.standard_normal((50, 30, 2))
    y = rng.standard_normal((50, 30)) + X[:, :, 0]
    a = _kernels.ols_batch_numpy(X, y)
    b = _kernels.ols_batch_numba(X, y)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-11, atol=1e-14)


def test_batch_result_independent_of_batch_size(backend, rng):
    ols, _ = backend
    X = rng.standard_normal((10, 25, 2))
    y = rng.standard_normal((10, 25))
    whole = ols(X, y)
    for i in (0, 3, 9):
        part = ols(X[i:i + 1], y[i:i + 1])
        for u, v in zip(whole, part):
            assert np.array_equal(u[i], v[0], equal_nan=True)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(-30, 30, allow_nan=False), df=st.integers(1, 400))
def test_t_tail_symmetric_and_bounded(t, df):
    p = _kernels.t_two_sided(np.array([t, -t]), float(df))
    assert p[0] == p[1]
    assert 0.0 <= p[0] <= 1.0


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0, 20), b=st.floats(0, 20), df=st.integers(1, 200))
def test_t_tail_monotone_in_abs_t(a, b, df):
    lo, hi = sorted((a, b))
    p = _kernels.t_two_sided(np.array([lo, hi]), float(df))
    assert p[1] <= p[0]
