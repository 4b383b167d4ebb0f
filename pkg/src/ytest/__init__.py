"""Falsification tests for proposed control sets (Y-structure tests)."""

from ._kernels import BACKEND
from .citest import AssocRecord, Thresholds, Verdict, assoc
from .data import Dataset, load_csv, write_csv
from .errors import (DataError, DegenerateDesign, DegenerateFit, EmptyRequest,
                     InsufficientData, RoleConflict, UnknownGraph, YTestError)
from .regress import OlsFit, ols_fit, t_two_sided_p
from .scm import (GraphId, LinearScm, make_rng, parse_model, sample_coefficients,
                  sample_custom, sample_graph)
from .study import (HypothesisPriors, LikelihoodReport, StudyTable,
                    hypothesis_likelihoods, run_graph_study)
from .ystructure import (IndicatorE, Mode, Outcome, Roles, YTestReport,
                         classic_y_test, heuristic_y_test, indicator_e)

__version__ = "0.1.0"
