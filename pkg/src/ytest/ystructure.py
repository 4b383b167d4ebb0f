"""The five-regression Y-structure test and its heuristic relaxation."""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

from .citest import DEFAULT_THRESHOLDS, AssocRecord, Thresholds, Verdict, assoc
from .data import Dataset
from .errors import DataError, RoleConflict, YTestError
from .regress import t_quantile
from .study import HYPOTHESIS_TEXT, LikelihoodReport, reference_likelihoods


class Step(str, enum.Enum):
    S1A = "1a"
    S1B = "1b"
    S2A = "2a"
    S2B = "2b"
    S3 = "3"


class Mode(str, enum.Enum):
    CLASSIC = "classic"
    HEURISTIC = "heuristic"


class Outcome(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Roles:
    exposure: str
    outcome: str
    instrument_z: str
    instrument_w: str
    controls: tuple[str, ...] = ()

    def __post_init__(self):
        controls = tuple(self.controls)
        object.__setattr__(self, "controls", controls)
        singles = (self.exposure, self.outcome, self.instrument_z, self.instrument_w)
        if len(set(singles)) != 4:
            raise RoleConflict("exposure, outcome and both instruments must be distinct")
        if len(set(controls)) != len(controls):
            raise RoleConflict("duplicate control variable")
        clash = set(controls) & set(singles)
        if clash:
            raise RoleConflict(f"controls overlap other roles: {sorted(clash)}")

    def check(self, dataset: Dataset) -> None:
        for nm in (self.exposure, self.outcome, self.instrument_z, self.instrument_w,
                   *self.controls):
            if nm not in dataset:
                raise DataError(f"no column named {nm!r}")


@dataclass(frozen=True)
class StepResult:
    step: Step
    regression: str
    record: AssocRecord | None
    error: str | None = None

    @property
    def verdict(self) -> Verdict:
        return self.record.verdict if self.record is not None else Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class IndicatorE:
    p_before: float
    p_after: float
    r_before: float
    r_after: float

    @property
    def strengthening(self) -> bool:
        return self.p_after < self.p_before

    @property
    def reversal(self) -> bool:
        # an exact zero has no sign, so it never takes part in a reversal
        return ((self.r_before > 0.0 and self.r_after < 0.0)
                or (self.r_before < 0.0 and self.r_after > 0.0))

    @property
    def e(self) -> bool:
        return self.strengthening or self.reversal

    def to_dict(self) -> dict:
        return {
            "p_before": self.p_before,
            "p_after": self.p_after,
            "r_before": self.r_before,
            "r_after": self.r_after,
            "strengthening": self.strengthening,
            "reversal": self.reversal,
            "e": self.e,
        }


def indicator_e(before: AssocRecord, after: AssocRecord) -> IndicatorE:
    """Compare the instrument association before and after adding the exposure
    to the conditioning set."""
    if (before.a, before.b) != (after.a, after.b):
        raise RoleConflict(
            f"records concern different pairs: {before.describe()} vs {after.describe()}")
    extra = set(after.given) - set(before.given)
    if not set(before.given) < set(after.given) or len(extra) != 1:
        raise RoleConflict("the second record must add exactly one conditioning variable")
    return IndicatorE(before.p_value, after.p_value, before.coefficient, after.coefficient)


@dataclass(frozen=True)
class Effect:
    estimate: float
    ci_low: float
    ci_high: float

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@dataclass(frozen=True)
class YTestReport:
    mode: Mode
    roles: Roles
    steps: tuple[StepResult, ...]
    overall: Outcome
    effect: Effect | None
    indicator: IndicatorE | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def step(self, step: Step) -> StepResult:
        for s in self.steps:
            if s.step == Step(step):
                return s
        raise KeyError(step)

    def to_dict(self) -> dict:
        steps = []
        for s in self.steps:
            rec = s.record
            steps.append({
                "step": s.step.value,
                "regression": s.regression,
                "r": rec.coefficient if rec else None,
                "sd": rec.standard_error if rec else None,
                "p": rec.p_value if rec else None,
                "verdict": s.verdict.value,
            })
        effect = None
        if self.effect is not None:
            effect = {"estimate": self.effect.estimate, "ci_low": self.effect.ci_low,
                      "ci_high": self.effect.ci_high}
        return {
            "mode": self.mode.value,
            "steps": steps,
            "indicator": self.indicator.to_dict() if self.indicator else None,
            "overall": self.overall.value,
            "effect": effect,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def format_text(self) -> str:
        rows = [("step", "regression", "r", "sd", "p", "verdict")]
        for s in self.steps:
            rec = s.record
            if rec is None:
                rows.append((s.step.value, s.regression, "-", "-", "-", s.verdict.value))
            else:
                rows.append((s.step.value, s.regression, f"{rec.coefficient:.4f}",
                             f"{rec.standard_error:.4f}", f"{rec.p_value:.4f}",
                             s.verdict.value))
        widths = [max(len(r[i]) for r in rows) for i in range(6)]
        lines = []
        for r in rows:
            lines.append("  ".join(
                cell.ljust(w) if i < 2 or i == 5 else cell.rjust(w)
                for i, (cell, w) in enumerate(zip(r, widths))).rstrip())
        lines.append("")
        lines.append(f"mode: {self.mode.value}")
        if self.indicator is not None:
            ind = self.indicator
            lines.append(f"indicator: strengthening={ind.strengthening} "
                         f"reversal={ind.reversal} E={ind.e}")
        lines.append(f"overall: {self.overall.value}")
        if self.effect is not None:
            lines.append(f"effect of {self.roles.exposure} on {self.roles.outcome}: "
                         f"{self.effect.estimate:.4f} "
                         f"[95% CI {self.effect.ci_low:.4f}, {self.effect.ci_high:.4f}]")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _regression_text(a, b, given):
    text = f"{a} ~ {b}"
    if given:
        text += " | " + ", ".join(given)
    return text


def _run_steps(dataset: Dataset, roles: Roles, thresholds: Thresholds):
    roles.check(dataset)
    S = roles.controls
    X, Y, Z, W = roles.exposure, roles.outcome, roles.instrument_z, roles.instrument_w
    plan = [
        (Step.S1A, Z, W, S),
        (Step.S1B, Z, W, (*S, X)),
        (Step.S2A, Y, Z, S),
        (Step.S2B, Y, Z, (*S, X)),
        (Step.S3, Y, X, S),
    ]
    results = []
    for step, a, b, given in plan:
        text = _regression_text(a, b, given)
        try:
            rec = assoc(dataset, a, b, given, thresholds)
            results.append(StepResult(step, text, rec))
        except RoleConflict:
            raise
        except YTestError as exc:
            results.append(StepResult(step, text, None,
                                      f"{type(exc).__name__}: {exc}"))
    return tuple(results)


def _effect(step3: StepResult, level: float = 0.95) -> Effect | None:
    rec = step3.record
    if rec is None:
        return None
    q = t_quantile((1.0 - level) / 2.0, rec.degrees_of_freedom)
    half = q * rec.standard_error
    return Effect(rec.coefficient, rec.coefficient - half, rec.coefficient + half)


def _decide(steps, required: dict[Step, Verdict], extra_ok: bool = True) -> Outcome:
    by_step = {s.step: s for s in steps}
    verdicts = [by_step[st].verdict for st in required]
    if any(v is Verdict.INCONCLUSIVE for v in verdicts):
        return Outcome.INCONCLUSIVE
    if all(by_step[st].verdict is want for st, want in required.items()) and extra_ok:
        return Outcome.PASS
    return Outcome.FAIL


def _error_notes(steps):
    return [f"step {s.step.value} could not be evaluated ({s.error})"
            for s in steps if s.error]


def classic_y_test(dataset: Dataset, roles: Roles,
                   thresholds: Thresholds = DEFAULT_THRESHOLDS) -> YTestReport:
    """Pass requires 1a independent, 1b dependent, 2a dependent, 2b independent."""
    steps = _run_steps(dataset, roles, thresholds)
    overall = _decide(steps, {
        Step.S1A: Verdict.INDEPENDENT,
        Step.S1B: Verdict.DEPENDENT,
        Step.S2A: Verdict.DEPENDENT,
        Step.S2B: Verdict.INDEPENDENT,
    })
    return YTestReport(Mode.CLASSIC, roles, steps, overall, _effect(steps[4]),
                       notes=tuple(_error_notes(steps)))


def heuristic_y_test(dataset: Dataset, roles: Roles,
                     thresholds: Thresholds = DEFAULT_THRESHOLDS,
                     likelihoods: LikelihoodReport | None = None) -> YTestReport:
    """Y-test without requiring the instruments to be independent.

    Steps 1a/1b feed the strengthening/reversal indicator instead of a
    verdict.  The indicator's reading counts toward a pass when it favours
    "both instruments cause the exposure" over "the exposure causes an
    instrument" under ``likelihoods``; by default these are computed from the
    reference census counts, under which an observed E favours it and a
    missing E counts against it.  Steps 2a (dependent) and 2b (independent)
    are required as in the classic test.
    """
    likelihoods = likelihoods or reference_likelihoods()
    steps = _run_steps(dataset, roles, thresholds)
    notes = _error_notes(steps)
    indicator = None
    s1a, s1b = steps[0], steps[1]
    if s1a.record is not None and s1b.record is not None:
        indicator = indicator_e(s1a.record, s1b.record)
        lr = likelihoods.lr_a_vs_b(indicator.e)
        favours = lr > 1.0
        overall = _decide(steps, {Step.S2A: Verdict.DEPENDENT,
                                  Step.S2B: Verdict.INDEPENDENT}, extra_ok=favours)
        what = []
        if indicator.strengthening:
            what.append("strengthening")
        if indicator.reversal:
            what.append("reversal")
        seen = " and ".join(what) if what else "neither strengthening nor reversal"
        if favours:
            notes.append(f"instrument association shows {seen}: evidence for "
                         f"'{HYPOTHESIS_TEXT['A']}' over '{HYPOTHESIS_TEXT['B']}' "
                         f"(likelihood ratio {lr:.3f}); weak when below 2")
        else:
            notes.append(f"instrument association shows {seen}: evidence against "
                         f"'{HYPOTHESIS_TEXT['A']}' (likelihood ratio A vs B {lr:.3f})")
    else:
        overall = Outcome.INCONCLUSIVE
        notes.append("indicator unavailable because step 1a or 1b failed")
    return YTestReport(Mode.HEURISTIC, roles, steps, overall, _effect(steps[4]),
                       indicator=indicator, notes=tuple(notes))


def y_test(dataset: Dataset, roles: Roles, mode=Mode.CLASSIC,
           thresholds: Thresholds = DEFAULT_THRESHOLDS,
           likelihoods: LikelihoodReport | None = None) -> YTestReport:
    if Mode(mode) is Mode.CLASSIC:
        return classic_y_test(dataset, roles, thresholds)
    return heuristic_y_test(dataset, roles, thresholds, likelihoods)


@dataclass(frozen=True)
class PairChange:
    z: str
    w: str
    before: float
    after: float

    @property
    def change(self) -> float:
        return abs(self.after - self.before)


def rank_instrument_pairs(dataset: Dataset, exposure: str, instruments: Sequence[str],
                          controls: Sequence[str] = (),
                          thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[PairChange]:
    """Change in partial correlation of every instrument pair when the exposure
    joins the controls, largest first.

    Partial correlations are scale free, so the ranking does not depend on
    the units of the instruments.  Pairs keep the order given in
    ``instruments``; ties go to the earlier pair.
    """
    changes = []
    for z, w in itertools.combinations(instruments, 2):
        try:
            b = assoc(dataset, z, w, controls, thresholds)
            a = assoc(dataset, z, w, (*controls, exposure), thresholds)
        except RoleConflict:
            raise
        except YTestError:
            continue
        changes.append(PairChange(z, w, b.partial_correlation, a.partial_correlation))
    return sorted(changes, key=lambda c: -c.change)


def select_instrument_pair(dataset: Dataset, exposure: str, instruments: Sequence[str],
                           controls: Sequence[str] = (),
                           thresholds: Thresholds = DEFAULT_THRESHOLDS):
    ranked = rank_instrument_pairs(dataset, exposure, instruments, controls, thresholds)
    if not ranked:
        raise DataError("no instrument pair admits a non-degenerate regression")
    return ranked[0], ranked
