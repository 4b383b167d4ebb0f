"""Monte-Carlo census of the eight three-variable graphs and the Bayesian
weighting of the strengthening/reversal indicator.

Replicate ``r`` of graph ``g`` always uses the stream ``make_rng(seed,
g.index, r)`` and replicates are processed in fixed-size units, so the table
is identical for any number of workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import _kernels
from .errors import DataError, EmptyRequest, InsufficientData, UnknownGraph
from .scm import DEFAULT_SIGMA, STUDY_GRAPHS, GraphId, make_rng, sample_graph

UNIT_SIZE = 250

HYPOTHESES = {
    "A": (GraphId.G1, GraphId.G2, GraphId.G3),
    "B": (GraphId.G6, GraphId.G7, GraphId.G8),
    "C": (GraphId.G4, GraphId.G5),
}
HYPOTHESIS_TEXT = {
    "A": "both instruments cause the exposure",
    "B": "the exposure causes an instrument",
    "C": "neither",
}


@dataclass(frozen=True)
class Counts:
    strengthening: int = 0
    reversal: int = 0
    either: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(self.strengthening + other.strengthening,
                      self.reversal + other.reversal,
                      self.either + other.either)


@dataclass(frozen=True)
class StudyTable:
    reps: int
    n_per_rep: int
    counts: Mapping[GraphId, Counts]
    degenerate: Mapping[GraphId, int] = field(default_factory=dict)
    root_seed: int | None = None
    sigma: float = DEFAULT_SIGMA
    sigma_everywhere: bool = False

    def __post_init__(self):
        object.__setattr__(self, "counts", {GraphId.parse(g): c for g, c in self.counts.items()})
        object.__setattr__(self, "degenerate", {
            g: int(self.degenerate.get(g, self.degenerate.get(g.value, 0))) for g in self.counts})
        for g, c in self.counts.items():
            if not (max(c.strengthening, c.reversal) <= c.either
                    <= min(self.reps, c.strengthening + c.reversal)):
                raise DataError(f"inconsistent counts for {GraphId(g).value}: {c}")

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "n_per_rep": self.n_per_rep,
            "root_seed": self.root_seed,
            "sigma": self.sigma,
            "sigma_everywhere": self.sigma_everywhere,
            "graphs": [
                {
                    "graph": g.value,
                    "strengthening": self.counts[g].strengthening,
                    "reversal": self.counts[g].reversal,
                    "either": self.counts[g].either,
                    "degenerate": int(self.degenerate.get(g, 0)),
                }
                for g in STUDY_GRAPHS if g in self.counts
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyTable":
        try:
            counts, degenerate = {}, {}
            for row in d["graphs"]:
                g = GraphId.parse(row["graph"])
                counts[g] = Counts(int(row["strengthening"]), int(row["reversal"]),
                                   int(row["either"]))
                degenerate[g] = int(row.get("degenerate", 0))
            return cls(reps=int(d["reps"]), n_per_rep=int(d["n_per_rep"]),
                       counts=counts, degenerate=degenerate,
                       root_seed=d.get("root_seed"),
                       sigma=float(d.get("sigma", DEFAULT_SIGMA)),
                       sigma_everywhere=bool(d.get("sigma_everywhere", False)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (UnknownGraph, DataError)):
                raise
            raise DataError(f"malformed study table: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path) -> "StudyTable":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"no such file: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
        # accept the full document written by the study command as well
        if isinstance(doc, dict) and isinstance(doc.get("table"), dict):
            doc = doc["table"]
        return cls.from_dict(doc)

    def format_text(self) -> str:
        lines = [f"{'Graph':<6} {'Strengthening':>13} {'Reversal':>9} "
                 f"{'Strengthening or reversal':>26} {'Degenerate':>10}"]
        for g in STUDY_GRAPHS:
            if g not in self.counts:
                continue
            c = self.counts[g]
            lines.append(f"{g.label:<6} {c.strengthening:>13} {c.reversal:>9} "
                         f"{c.either:>26} {self.degenerate.get(g, 0):>10}")
        lines.append(f"reps={self.reps} n={self.n_per_rep} seed={self.root_seed}")
        return "\n".join(lines)


# Published census counts, 1000 representatives of 50 rows each.
REFERENCE_TABLE = StudyTable(
    reps=1000,
    n_per_rep=50,
    counts={
        GraphId.G1: Counts(230, 526, 756),
        GraphId.G2: Counts(848, 449, 962),
        GraphId.G3: Counts(651, 351, 797),
        GraphId.G4: Counts(549, 64, 594),
        GraphId.G5: Counts(548, 334, 779),
        GraphId.G6: Counts(111, 498, 518),
        GraphId.G7: Counts(532, 245, 561),
        GraphId.G8: Counts(552, 323, 632),
    },
)


def sample_replicates(gid: GraphId, start: int, stop: int, n: int, root_seed: int,
                      sigma: float = DEFAULT_SIGMA, sigma_everywhere: bool = False):
    """Stacked (Z, X, W) arrays of shape (stop - start, n)."""
    Z = np.empty((stop - start, n))
    X = np.empty_like(Z)
    W = np.empty_like(Z)
    for i, r in enumerate(range(start, stop)):
        ds = sample_graph(gid, n, make_rng(root_seed, gid.index, r),
                          sigma=sigma, sigma_everywhere=sigma_everywhere)
        Z[i], X[i], W[i] = ds["Z"], ds["X"], ds["W"]
    return Z, X, W


def classify_replicates(Z, X, W):
    """Per-replicate (strengthening, reversal, degenerate) flags.

    Before: ``Z ~ W``; after: ``Z ~ W + X``.  Strengthening is a strictly
    smaller p-value of W after adding X, reversal a strict sign change of the
    W coefficient.  Degenerate replicates have both flags cleared.
    """
    df_before = Z.shape[1] - 2
    df_after = Z.shape[1] - 3
    cb, sb, _, stb = _kernels.ols_batch(W[:, :, None], Z)
    ca, sa, _, sta = _kernels.ols_batch(np.stack([W, X], axis=2), Z)
    degenerate = (stb != _kernels.OK) | (sta != _kernels.OK)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_before = _kernels.t_two_sided(cb[:, 1] / sb[:, 1], df_before)
        p_after = _kernels.t_two_sided(ca[:, 1] / sa[:, 1], df_after)
    strengthening = (p_after < p_before) & ~degenerate
    reversal = (np.sign(cb[:, 1]) * np.sign(ca[:, 1]) < 0) & ~degenerate
    return strengthening, reversal, degenerate


def _run_unit(args):
    gid, start, stop, n, root_seed, sigma, sigma_everywhere = args
    Z, X, W = sample_replicates(gid, start, stop, n, root_seed, sigma, sigma_everywhere)
    s, r, d = classify_replicates(Z, X, W)
    return gid, Counts(int(s.sum()), int(r.sum()), int((s | r).sum())), int(d.sum())


def run_graph_study(reps: int = 1000, n_per_rep: int = 50, root_seed: int = 0,
                    workers: int = 1, sigma: float = DEFAULT_SIGMA,
                    sigma_everywhere: bool = False, graphs=STUDY_GRAPHS) -> StudyTable:
    """Count strengthening and reversal events over ``reps`` random
    representatives of each graph, ``n_per_rep`` rows each."""
    if reps < 1:
        raise EmptyRequest("reps must be at least 1")
    if n_per_rep <= 5:
        raise InsufficientData("n_per_rep must exceed 5")
    graphs = tuple(GraphId.parse(g) for g in graphs)
    units = [(g, start, min(start + UNIT_SIZE, reps), n_per_rep, int(root_seed),
              float(sigma), bool(sigma_everywhere))
             for g in graphs for start in range(0, reps, UNIT_SIZE)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_unit, units))
    else:
        results = [_run_unit(u) for u in units]
    counts = {g: Counts() for g in graphs}
    degenerate = {g: 0 for g in graphs}
    for g, c, d in results:
        counts[g] = counts[g] + c
        degenerate[g] += d
    return StudyTable(reps=reps, n_per_rep=n_per_rep, counts=counts,
                      degenerate=degenerate, root_seed=int(root_seed),
                      sigma=float(sigma), sigma_everywhere=bool(sigma_everywhere))


@dataclass(frozen=True)
class HypothesisPriors:
    """Relative prior weight of each graph within its hypothesis."""

    weights: Mapping[GraphId, float]

    def __post_init__(self):
        for g, w in self.weights.items():
            if not w > 0:
                raise DataError(f"prior weight of {GraphId(g).value} must be positive")

    @classmethod
    def default(cls) -> "HypothesisPriors":
        # graphs with a mirror image under swapping the instruments count twice
        doubled = {GraphId.G2, GraphId.G5, GraphId.G6, GraphId.G8}
        return cls({g: 2.0 if g in doubled else 1.0 for g in STUDY_GRAPHS})

    @classmethod
    def parse(cls, text: str, base: "HypothesisPriors | None" = None) -> "HypothesisPriors":
        """Lines of ``g<k> <weight>``; graphs not listed keep ``base`` weights."""
        weights = dict((base or cls.default()).weights)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"priors line {lineno}: expected 'g<k> <weight>'")
            try:
                g = GraphId.parse(parts[0])
            except UnknownGraph as exc:
                raise DataError(f"priors line {lineno}: {exc}") from None
            if g not in STUDY_GRAPHS:
                raise DataError(f"priors line {lineno}: {g.value} is not a study graph")
            try:
                weights[g] = float(parts[1])
            except ValueError:
                raise DataError(f"priors line {lineno}: bad weight {parts[1]!r}") from None
        return cls(weights)

    @classmethod
    def load(cls, path) -> "HypothesisPriors":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"no such file: {path}")
        return cls.parse(path.read_text())


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.nan if num == 0.0 else math.inf
    return num / den


@dataclass(frozen=True)
class LikelihoodReport:
    p_e_given: dict[str, float]
    p_not_e_given: dict[str, float]

    @property
    def lr_e_a_vs_b(self) -> float:
        return _ratio(self.p_e_given["A"], self.p_e_given["B"])

    @property
    def lr_not_e_a_vs_b(self) -> float:
        return _ratio(self.p_not_e_given["A"], self.p_not_e_given["B"])

    def lr_a_vs_b(self, e: bool) -> float:
        return self.lr_e_a_vs_b if e else self.lr_not_e_a_vs_b

    def to_dict(self) -> dict:
        return {
            "p_e_given": dict(self.p_e_given),
            "p_not_e_given": dict(self.p_not_e_given),
            "lr_e_a_vs_b": self.lr_e_a_vs_b,
            "lr_not_e_a_vs_b": self.lr_not_e_a_vs_b,
        }

    def format_text(self) -> str:
        hs = list(self.p_e_given)
        lines = [
            "P(E|A):P(E|B):P(E|C)    = " + " : ".join(f"{self.p_e_given[h]:.4f}" for h in hs),
            "P(~E|A):P(~E|B):P(~E|C) = " + " : ".join(f"{self.p_not_e_given[h]:.4f}" for h in hs),
            f"likelihood ratio A vs B given E  = {self.lr_e_a_vs_b:.4f}",
            f"likelihood ratio A vs B given ~E = {self.lr_not_e_a_vs_b:.4f}",
        ]
        return "\n".join(lines)


def hypothesis_likelihoods(table: StudyTable,
                           priors: HypothesisPriors | None = None) -> LikelihoodReport:
    """Prior-weighted mixture of per-graph event rates for each hypothesis."""
    priors = priors or HypothesisPriors.default()
    p_e = {}
    for h, group in HYPOTHESES.items():
        members = [g for g in group if g in table.counts]
        if not members:
            raise EmptyRequest(f"hypothesis {h} has no graphs in the table")
        total = sum(priors.weights[g] for g in members)
        acc = 0.0
        for g in members:
            either = table.counts[g].either
            if either > table.reps:
                raise DataError(f"{g.value}: count exceeds reps")
            acc += either / table.reps * priors.weights[g]
        p_e[h] = acc / total
    return LikelihoodReport(p_e_given=p_e,
                            p_not_e_given={h: 1.0 - v for h, v in p_e.items()})


def reference_likelihoods() -> LikelihoodReport:
    return hypothesis_likelihoods(REFERENCE_TABLE, HypothesisPriors.default())
