"""The inequality catalog, the test corpus and the experiment drivers."""
from .cases import CaseTag, InequalityCase, default_params, derived_alpha, validate_params
from .corpus import Corpus, standard_corpus
from .evaluate import EvalContext, SuiteResult, evaluate_case, run_suite
from .experiments import (al_gt1_experiment, counterexample_growth, hardy_atom_test,
                          hardy_sweep, riesz_riesz_experiment, scaling_p_experiment,
                          sharpness_scan, truncation_upgrade)
from .report import InequalityReport, reports_to_csv, reports_to_json, write_reports

__all__ = [
    "CaseTag", "InequalityCase", "default_params", "derived_alpha", "validate_params",
    "Corpus", "standard_corpus", "EvalContext", "SuiteResult", "evaluate_case", "run_suite",
    "al_gt1_experiment", "counterexample_growth", "hardy_atom_test", "hardy_sweep",
    "riesz_riesz_experiment", "scaling_p_experiment", "sharpness_scan", "truncation_upgrade",
    "InequalityReport", "reports_to_csv", "reports_to_json", "write_reports",
]
