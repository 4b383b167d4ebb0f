"""Ordinary least squares with exact finite-sample t inference."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .data import Dataset
from .errors import DegenerateDesign, DegenerateFit, InsufficientData, RoleConflict

INTERCEPT = "(Intercept)"


@dataclass(frozen=True)
class OlsFit:
    response: str
    terms: tuple[str, ...]
    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    residual_variance: float
    degrees_of_freedom: int
    n_obs: int

    def t_statistic(self, term: str) -> float:
        return self.coefficients[term] / self.standard_errors[term]

    def p_value(self, term: str) -> float:
        return t_two_sided_p(self.t_statistic(term), self.degrees_of_freedom)


def ols_arrays(X, y):
    """Fit ``y ~ 1 + X`` for a single problem given as arrays.

    Only requires one residual degree of freedom.  Returns
    ``(coef, se, residual_variance, df)`` with the intercept first.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if k < 1:
        raise DegenerateDesign("at least one predictor is required")
    if y.shape != (n,):
        raise InsufficientData("response and predictors differ in length")
    df = n - (k + 1)
    if df < 1:
        raise InsufficientData(f"{n} rows cannot support {k} predictors plus intercept")
    coef, se, resvar, status = _kernels.ols_batch(X[None], y[None])
    if status[0] == _kernels.DEGENERATE_DESIGN:
        raise DegenerateDesign("predictors are collinear or constant")
    if status[0] == _kernels.DEGENERATE_FIT:
        raise DegenerateFit("residual variance is numerically zero")
    return coef[0], se[0], float(resvar[0]), df


def ols_fit(dataset: Dataset, response: str, predictors: Sequence[str]) -> OlsFit:
    """Regress ``response`` on ``predictors`` plus an intercept.

    Requires more than ``len(predictors) + 2`` rows.
    """
    predictors = list(predictors)
    if response in predictors or len(set(predictors)) != len(predictors):
        raise RoleConflict("response and predictors must all be distinct")
    y = dataset[response]
    X = dataset.matrix(predictors)
    n = dataset.n_rows
    if n <= len(predictors) + 2:
        raise InsufficientData(
            f"{n} rows is too few for {len(predictors)} predictors (need > {len(predictors) + 2})")
    coef, se, resvar, df = ols_arrays(X, y)
    terms = (INTERCEPT, *predictors)
    return OlsFit(
        response=response,
        terms=terms,
        coefficients={t: float(c) for t, c in zip(terms, coef)},
        standard_errors={t: float(s) for t, s in zip(terms, se)},
        residual_variance=resvar,
        degrees_of_freedom=df,
        n_obs=n,
    )


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not df >= 1:
        raise InsufficientData(f"degrees of freedom must be at least 1, got {df}")
    if math.isnan(t):
        raise ValueError("t must not be NaN")
    return float(_kernels.t_two_sided(np.array([t], dtype=float), float(df))[0])


def t_quantile(upper_tail: float, df: float) -> float:
    """The t with P(T > t) = ``upper_tail`` (bisection on the tail area)."""
    if not 0.0 < upper_tail < 0.5:
        raise ValueError("upper_tail must lie in (0, 0.5)")
    target = 2.0 * upper_tail
    lo, hi = 0.0, 1.0
    while t_two_sided_p(hi, df) > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_two_sided_p(mid, df) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)
