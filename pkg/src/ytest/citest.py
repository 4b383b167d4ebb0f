"""Conditional association queries with a dependent/independent/inconclusive verdict."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

from .data import Dataset
from .errors import RoleConflict
from .regress import ols_fit


class Verdict(str, enum.Enum):
    DEPENDENT = "Dependent"
    INDEPENDENT = "Independent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Thresholds:
    """p below ``dependent`` means dependence, p above ``independent`` means
    independence, anything in between is inconclusive."""

    dependent: float = 0.05
    independent: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.dependent < self.independent < 1.0:
            raise ValueError(
                "thresholds must satisfy 0 < dependent < independent < 1, "
                f"got {self.dependent}, {self.independent}")

    def verdict(self, p: float) -> Verdict:
        if p < self.dependent:
            return Verdict.DEPENDENT
        if p > self.independent:
            return Verdict.INDEPENDENT
        return Verdict.INCONCLUSIVE


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class AssocRecord:
    a: str
    b: str
    given: tuple[str, ...]
    coefficient: float
    standard_error: float
    p_value: float
    degrees_of_freedom: int
    verdict: Verdict

    @property
    def t_statistic(self) -> float:
        return self.coefficient / self.standard_error

    @property
    def partial_correlation(self) -> float:
        t = self.t_statistic
        return t / math.sqrt(t * t + self.degrees_of_freedom)

    def describe(self) -> str:
        text = f"{self.a} ~ {self.b}"
        if self.given:
            text += " | " + ", ".join(self.given)
        return text


def _ordered_unique(names: Iterable[str]) -> tuple[str, ...]:
    out = []
    for nm in names:
        if nm not in out:
            out.append(nm)
    return tuple(out)


def assoc(dataset: Dataset, a: str, b: str, given: Iterable[str] = (),
          thresholds: Thresholds = DEFAULT_THRESHOLDS) -> AssocRecord:
    """Test ``a`` against ``b`` controlling for ``given``.

    Fits ``a ~ 1 + b + given`` and reports the coefficient of ``b``.
    """
    given = _ordered_unique(given)
    if a == b:
        raise RoleConflict(f"cannot test {a!r} against itself")
    if a in given or b in given:
        raise RoleConflict(f"{a!r} and {b!r} must not appear in the conditioning set")
    fit = ols_fit(dataset, a, (b, *given))
    p = fit.p_value(b)
    return AssocRecord(
        a=a,
        b=b,
        given=given,
        coefficient=fit.coefficients[b],
        standard_error=fit.standard_errors[b],
        p_value=p,
        degrees_of_freedom=fit.degrees_of_freedom,
        verdict=thresholds.verdict(p),
    )
