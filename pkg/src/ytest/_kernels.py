"""Hot numeric kernels: batched least squares and Student-t tail areas.

Every kernel exists twice, once compiled with numba and once as vectorized
numpy.  Both follow the same algorithm and the same degeneracy rules.  The
numba path is selected when numba imports cleanly and the environment
variable ``YTEST_DISABLE_NUMBA`` is unset or falsy; the choice is made once
at import time and exposed as ``BACKEND``.
"""

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

OK = 0
DEGENERATE_DESIGN = 1
DEGENERATE_FIT = 2

# pivots of the predictor correlation matrix below this (relative to the
# largest pivot seen so far) mean the design is numerically rank deficient
PIVOT_TOL = 1e-10
# residual variance at or below this fraction of the response variance is a
# perfect fit, for which t-statistics are meaningless
FIT_TOL = 1e-12

_CF_MAX_ITER = 20000
_CF_EPS = 1e-16
_TINY = 1e-300


def _env_disabled():
    flag = os.environ.get("YTEST_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no", "off")


USE_NUMBA = numba is not None and not _env_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# scalar reference code; compiled by numba, never called interpreted in the
# hot path
# ---------------------------------------------------------------------------

def _betacf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


def _betainc(a, b, x, y):
    """Regularized I_x(a, b); ``y`` must equal ``1 - x`` computed without
    cancellation by the caller."""
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(y))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, y) / b


def _t_two_sided(t, df):
    t2 = t * t
    if t2 == 0.0:
        return 1.0
    if math.isinf(t2):
        return 0.0
    denom = df + t2
    p = _betainc(0.5 * df, 0.5, df / denom, t2 / denom)
    return min(max(p, 0.0), 1.0)


def _t_two_sided_many(t, df):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        if math.isnan(t[i]) or math.isnan(df[i]):
            out[i] = np.nan
        else:
            out[i] = _t_two_sided(t[i], df[i])
    return out


def _ols_batch_loop(X, y):
    m, n, k = X.shape
    p = k + 1
    df = n - p
    coef = np.full((m, p), np.nan)
    se = np.full((m, p), np.nan)
    resvar = np.full(m, np.nan)
    status = np.zeros(m, dtype=np.int64)
    xbar = np.empty(k)
    norms = np.empty(k)
    Xs = np.empty((n, k))
    yc = np.empty(n)
    R = np.empty((k, k))
    L = np.zeros((k, k))
    rhs = np.empty(k)
    for i in range(m):
        ybar = 0.0
        for r in range(n):
            ybar += y[i, r]
        ybar /= n
        tss = 0.0
        for r in range(n):
            yc[r] = y[i, r] - ybar
            tss += yc[r] * yc[r]
        bad = False
        for j in range(k):
            s = 0.0
            for r in range(n):
                s += X[i, r, j]
            xbar[j] = s / n
            s = 0.0
            for r in range(n):
                v = X[i, r, j] - xbar[j]
                Xs[r, j] = v
                s += v * v
            norms[j] = math.sqrt(s)
            if norms[j] == 0.0:
                bad = True
        if bad:
            status[i] = DEGENERATE_DESIGN
            continue
        for j in range(k):
            for r in range(n):
                Xs[r, j] /= norms[j]
        for j in range(k):
            s = 0.0
            for r in range(n):
                s += Xs[r, j] * yc[r]
            rhs[j] = s
            for l in range(j + 1):
                s = 0.0
                for r in range(n):
                    s += Xs[r, j] * Xs[r, l]
                R[j, l] = s
                R[l, j] = s
        # Cholesky with relative pivot check
        max_piv = 0.0
        for j in range(k):
            piv = R[j, j]
            for l in range(j):
                piv -= L[j, l] * L[j, l]
            if piv > max_piv:
                max_piv = piv
            if piv <= PIVOT_TOL * max_piv or piv <= 0.0:
                bad = True
                break
            L[j, j] = math.sqrt(piv)
            for q in range(j + 1, k):
                s = R[q, j]
                for l in range(j):
                    s -= L[q, l] * L[j, l]
                L[q, j] = s / L[j, j]
        if bad:
            status[i] = DEGENERATE_DESIGN
            continue
        # inverse of L, then R^-1 = Linv' Linv
        Linv = np.zeros((k, k))
        for j in range(k):
            Linv[j, j] = 1.0 / L[j, j]
            for q in range(j + 1, k):
                s = 0.0
                for l in range(j, q):
                    s -= L[q, l] * Linv[l, j]
                Linv[q, j] = s / L[q, q]
        Rinv = np.zeros((k, k))
        for a in range(k):
            for b in range(k):
                s = 0.0
                for q in range(max(a, b), k):
                    s += Linv[q, a] * Linv[q, b]
                Rinv[a, b] = s
        intercept = ybar
        for j in range(k):
            s = 0.0
            for l in range(k):
                s += Rinv[j, l] * rhs[l]
            coef[i, j + 1] = s / norms[j]
            intercept -= coef[i, j + 1] * xbar[j]
        coef[i, 0] = intercept
        rss = 0.0
        for r in range(n):
            e = yc[r]
            for j in range(k):
                e -= Xs[r, j] * norms[j] * coef[i, j + 1]
            rss += e * e
        s2 = rss / df
        resvar[i] = s2
        if tss == 0.0 or s2 <= FIT_TOL * tss / (n - 1):
            status[i] = DEGENERATE_FIT
        quad = 0.0
        for j in range(k):
            se[i, j + 1] = math.sqrt(s2 * Rinv[j, j]) / norms[j]
            for l in range(k):
                quad += xbar[j] / norms[j] * Rinv[j, l] * xbar[l] / norms[l]
        se[i, 0] = math.sqrt(s2 * (1.0 / n + quad))
    return coef, se, resvar, status


# ---------------------------------------------------------------------------
# pure numpy implementations
# ---------------------------------------------------------------------------

_lgamma = np.frompyfunc(math.lgamma, 1, 1)


def _betacf_np(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= ~(np.abs(delta - 1.0) < _CF_EPS)
        if not active.any():
            break
    return h


def t_two_sided_numpy(t, df):
    """Vectorized P(|T_df| >= |t|)."""
    t = np.asarray(t, dtype=float)
    df = np.broadcast_to(np.asarray(df, dtype=float), t.shape)
    out = np.full(t.shape, np.nan)
    t2 = t * t
    valid = ~(np.isnan(t2) | np.isnan(df))
    out[valid & (t2 == 0.0)] = 1.0
    out[valid & np.isinf(t2)] = 0.0
    work = valid & (t2 > 0.0) & np.isfinite(t2)
    if not work.any():
        return out
    tw = t2[work]
    dw = df[work]
    denom = dw + tw
    x = dw / denom
    y = tw / denom
    a = 0.5 * dw
    b = np.full_like(a, 0.5)
    log_front = (_lgamma(a + b) - _lgamma(a) - _lgamma(b)).astype(float) \
        + a * np.log(x) + b * np.log(y)
    front = np.exp(log_front)
    direct = x < (a + 1.0) / (a + b + 2.0)
    res = np.empty_like(x)
    if direct.any():
        res[direct] = front[direct] * _betacf_np(
            a[direct], b[direct], x[direct]) / a[direct]
    flip = ~direct
    if flip.any():
        res[flip] = 1.0 - front[flip] * _betacf_np(
            b[flip], a[flip], y[flip]) / b[flip]
    out[work] = np.clip(res, 0.0, 1.0)
    return out


def ols_batch_numpy(X, y):
    """Least squares with intercept for a stack of independent problems.

    ``X`` has shape (m, n, k) and holds the k predictors of each problem,
    ``y`` has shape (m, n).  Returns ``(coef, se, resvar, status)`` with the
    intercept in column 0 of ``coef`` and ``se``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n, k = X.shape
    p = k + 1
    df = n - p
    coef = np.full((m, p), np.nan)
    se = np.full((m, p), np.nan)
    resvar = np.full(m, np.nan)
    status = np.zeros(m, dtype=np.int64)

    ybar = y.mean(axis=1)
    yc = y - ybar[:, None]
    tss = (yc * yc).sum(axis=1)
    xbar = X.mean(axis=1)
    Xc = X - xbar[:, None, :]
    norms = np.sqrt((Xc * Xc).sum(axis=1))
    bad = (norms == 0.0).any(axis=1)
    safe_norms = np.where(norms == 0.0, 1.0, norms)
    Xs = Xc / safe_norms[:, None, :]

    R = np.empty((m, k, k))
    rhs = np.empty((m, k))
    for j in range(k):
        rhs[:, j] = (Xs[:, :, j] * yc).sum(axis=1)
        for l in range(j + 1):
            s = (Xs[:, :, j] * Xs[:, :, l]).sum(axis=1)
            R[:, j, l] = s
            R[:, l, j] = s

    L = np.zeros((m, k, k))
    max_piv = np.zeros(m)
    for j in range(k):
        piv = R[:, j, j] - (L[:, j, :j] ** 2).sum(axis=1)
        max_piv = np.maximum(max_piv, piv)
        bad |= (piv <= PIVOT_TOL * max_piv) | (piv <= 0.0)
        root = np.sqrt(np.where(bad, 1.0, piv))
        L[:, j, j] = root
        for q in range(j + 1, k):
            s = R[:, q, j] - (L[:, q, :j] * L[:, j, :j]).sum(axis=1)
            L[:, q, j] = s / root

    ok = ~bad
    status[bad] = DEGENERATE_DESIGN
    if not ok.any():
        return coef, se, resvar, status

    L = L[ok]
    Linv = np.zeros_like(L)
    for j in range(k):
        Linv[:, j, j] = 1.0 / L[:, j, j]
        for q in range(j + 1, k):
            s = -(L[:, q, j:q] * Linv[:, j:q, j]).sum(axis=1)
            Linv[:, q, j] = s / L[:, q, q]
    Rinv = np.einsum("mqa,mqb->mab", Linv, Linv)
    nrm = norms[ok]
    b_std = np.einsum("mjl,ml->mj", Rinv, rhs[ok])
    slopes = b_std / nrm
    intercept = ybar[ok] - (slopes * xbar[ok]).sum(axis=1)
    resid = yc[ok] - (Xc[ok] * slopes[:, None, :]).sum(axis=2)
    s2 = (resid * resid).sum(axis=1) / df
    v = xbar[ok] / nrm
    quad = np.einsum("mj,mjl,ml->m", v, Rinv, v)
    diag = np.diagonal(Rinv, axis1=1, axis2=2)

    coef[ok, 0] = intercept
    coef[ok, 1:] = slopes
    se[ok, 0] = np.sqrt(s2 * (1.0 / n + quad))
    se[ok, 1:] = np.sqrt(s2[:, None] * diag) / nrm
    resvar[ok] = s2
    t_ok = tss[ok]
    perfect = (t_ok == 0.0) | (s2 <= FIT_TOL * t_ok / (n - 1))
    idx = np.flatnonzero(ok)
    status[idx[perfect]] = DEGENERATE_FIT
    return coef, se, resvar, status


if numba is not None:
    # callees are resolved through module globals at compile time, so the
    # scalar helpers are rebound to their compiled versions
    _betacf = numba.njit(cache=True)(_betacf)
    _betainc = numba.njit(cache=True)(_betainc)
    _t_two_sided = numba.njit(cache=True)(_t_two_sided)
    _t_two_sided_many_nb = numba.njit(cache=True)(_t_two_sided_many)
    _ols_batch_nb = numba.njit(cache=True)(_ols_batch_loop)

    def t_two_sided_numba(t, df):
        t = np.asarray(t, dtype=float)
        df = np.broadcast_to(np.asarray(df, dtype=float), t.shape)
        flat = _t_two_sided_many_nb(np.ascontiguousarray(t.ravel()),
                                    np.ascontiguousarray(df.ravel()))
        return flat.reshape(t.shape)

    def ols_batch_numba(X, y):
        return _ols_batch_nb(np.ascontiguousarray(X, dtype=np.float64),
                             np.ascontiguousarray(y, dtype=np.float64))
else:  # pragma: no cover
    t_two_sided_numba = None
    ols_batch_numba = None


if USE_NUMBA:
    t_two_sided = t_two_sided_numba
    ols_batch = ols_batch_numba
else:
    t_two_sided = t_two_sided_numpy
    ols_batch = ols_batch_numpy
