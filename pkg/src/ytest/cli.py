"""Command line front end.

Exit codes: 0 pass, 1 fail, 2 inconclusive (``run`` only), 3 any other
error, 64 usage error.  ``simulate`` and ``study`` exit 0 on success.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .citest import Thresholds
from .data import dataset_to_csv, load_csv, write_csv
from .errors import RoleConflict, YTestError
from .scm import DEFAULT_SIGMA, GraphId, load_model, sample_custom, sample_graph, make_rng
from .study import HypothesisPriors, StudyTable, hypothesis_likelihoods, run_graph_study
from .ystructure import Mode, Outcome, Roles, select_instrument_pair, y_test

log = logging.getLogger("ytest")

EXIT_CODES = {Outcome.PASS: 0, Outcome.FAIL: 1, Outcome.INCONCLUSIVE: 2}
EXIT_ERROR = 3
EXIT_USAGE = 64

SUMMARY_NOTE = ("the reference summary ratios 0.189:0.2072:0.198 and 0.811:0.7928:0.802 "
                "cannot be reconciled with the mixture formula or its own worked value "
                "P(E|A)=0.86925; the figures above are computed from the counts")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


@dataclass(frozen=True)
class RunConfig:
    data_path: Path
    exposure: str
    outcome: str
    instruments: tuple[str, ...]
    controls: tuple[str, ...]
    mode: Mode
    thresholds: Thresholds
    output: str = "text"

    def __post_init__(self):
        if len(self.instruments) < 2 or len(set(self.instruments)) != len(self.instruments):
            raise UsageError("--instruments needs at least two distinct names")
        roles = [self.exposure, self.outcome, *self.instruments, *self.controls]
        if len(set(roles)) != len(roles):
            raise UsageError("exposure, outcome, instruments and controls must be distinct")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ytest", description="Falsify control sets with Y-structure tests.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a Y-test on a CSV file")
    run.add_argument("--data", required=True)
    run.add_argument("--exposure", required=True)
    run.add_argument("--outcome", required=True)
    run.add_argument("--instruments", required=True, help="comma separated, at least two")
    run.add_argument("--controls", default="", help="comma separated")
    run.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CLASSIC.value)
    run.add_argument("--dep-p", type=float, default=0.05)
    run.add_argument("--indep-p", type=float, default=0.1)
    run.add_argument("--output", choices=["text", "json"], default="text")
    run.add_argument("--study-table", help="JSON from `ytest study --output json`; "
                     "its likelihoods drive the heuristic verdict")
    run.add_argument("--priors-file")

    sim = sub.add_parser("simulate", help="write a simulated sample as CSV")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph")
    src.add_argument("--model", help="model file: 'name scale' and 'parent child coef' lines")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    sim.add_argument("--out", help="output path (stdout when omitted)")

    st = sub.add_parser("study", help="strengthening/reversal census of graphs G1..G8")
    st.add_argument("--reps", type=int, default=1000)
    st.add_argument("--n", type=int, default=50)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--workers", type=int, default=1)
    st.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    st.add_argument("--sigma-all", action="store_true",
                    help="scale every noise term by sigma, not only G1's confounder")
    st.add_argument("--priors-file")
    st.add_argument("--output", choices=["text", "json"], default="text")
    return parser


def _thresholds(args) -> Thresholds:
    try:
        return Thresholds(args.dep_p, args.indep_p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_run(args, out) -> int:
    cfg = RunConfig(
        data_path=Path(args.data),
        exposure=args.exposure,
        outcome=args.outcome,
        instruments=tuple(_names(args.instruments)),
        controls=tuple(_names(args.controls)),
        mode=Mode(args.mode),
        thresholds=_thresholds(args),
        output=args.output,
    )
    dataset = load_csv(cfg.data_path)
    likelihoods = None
    if args.study_table:
        priors = HypothesisPriors.load(args.priors_file) if args.priors_file else None
        likelihoods = hypothesis_likelihoods(StudyTable.load(args.study_table), priors)

    notes = []
    z, w = cfg.instruments[0], cfg.instruments[1]
    if len(cfg.instruments) > 2:
        best, ranked = select_instrument_pair(dataset, cfg.exposure, cfg.instruments,
                                              cfg.controls, cfg.thresholds)
        z, w = best.z, best.w
        for pc in ranked:
            notes.append(f"pair {pc.z},{pc.w}: partial correlation {pc.before:.4f} -> "
                         f"{pc.after:.4f} (change {pc.change:.4f})")
        notes.append(f"selected pair {z},{w} (largest change after controlling for "
                     f"{cfg.exposure})")
    try:
        roles = Roles(cfg.exposure, cfg.outcome, z, w, cfg.controls)
    except RoleConflict as exc:
        raise UsageError(str(exc)) from None
    report = y_test(dataset, roles, cfg.mode, cfg.thresholds, likelihoods)
    if notes:
        report = replace(report, notes=tuple(notes) + report.notes)
    out.write((report.to_json() if cfg.output == "json" else report.format_text()) + "\n")
    return EXIT_CODES[report.overall]


def cmd_simulate(args, out) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if args.graph is not None:
        try:
            gid = GraphId.parse(args.graph)
        except YTestError as exc:
            raise UsageError(str(exc)) from None
        dataset = sample_graph(gid, args.n, make_rng(args.seed), sigma=args.sigma)
    else:
        dataset = sample_custom(load_model(args.model), args.n, make_rng(args.seed))
    if args.out:
        write_csv(dataset, args.out)
        log.info("wrote %d rows to %s", dataset.n_rows, args.out)
    else:
        out.write(dataset_to_csv(dataset))
    return 0


def cmd_study(args, out) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    if args.n <= 5:
        raise UsageError("--n must exceed 5")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    priors = HypothesisPriors.load(args.priors_file) if args.priors_file else None
    t0 = time.perf_counter()
    table = run_graph_study(args.reps, args.n, args.seed, workers=args.workers,
                            sigma=args.sigma, sigma_everywhere=args.sigma_all)
    log.info("study finished in %.2f s", time.perf_counter() - t0)
    lik = hypothesis_likelihoods(table, priors)
    if args.output == "json":
        doc = {"table": table.to_dict(), "likelihoods": lik.to_dict(), "notes": [SUMMARY_NOTE]}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(table.format_text() + "\n\n" + lik.format_text() + "\n")
        out.write(f"note: {SUMMARY_NOTE}\n")
    return 0


COMMANDS = {"run": cmd_run, "simulate": cmd_simulate, "study": cmd_study}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.cmd](args, out)
    except UsageError as exc:
        print(f"ytest {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (YTestError, OSError) as exc:
        print(f"ytest {args.cmd}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
