"""Propensity-score-matched restricted mean survival time (RMST) differences."""
from ._kernels import BACKEND
from .estimator import (AttResult, analyze, iptw_km_rmst_att, matched_rmst_att,
                        summarize_replicates)
from .ingest import Dataset, read_csv, write_csv
from .km import KMCurve, km_curve, rmst, rmst_variance_hosmer
from .matching import MatchedPairs, optimal_pair_match
from .paired_cov import (PairedSample, estimate_G01, murray_covariance,
                         murray_marginal_variance)
from .propensity import fit_logistic, standardized_mean_differences
from .sensitivity import bounding_factor, effect_bound, sensitivity_grid
from .simulate import (TABLE_PS_INTERCEPT, ScenarioConfig, censoring_rate,
                       expected_treated_fraction, simulate_dataset, table_scenario, true_att)
from .study import StudyResult, run_study

__version__ = "0.1.0"

__all__ = [
    "AttResult", "BACKEND", "StudyResult", "TABLE_PS_INTERCEPT", "Dataset", "KMCurve", "MatchedPairs", "PairedSample",
    "ScenarioConfig", "analyze", "bounding_factor", "censoring_rate", "effect_bound", "estimate_G01", "expected_treated_fraction",
    "fit_logistic", "iptw_km_rmst_att", "km_curve", "matched_rmst_att",
    "murray_covariance", "murray_marginal_variance", "optimal_pair_match", "read_csv",
    "rmst", "rmst_variance_hosmer", "run_study", "sensitivity_grid", "simulate_dataset",
    "standardized_mean_differences", "summarize_replicates", "table_scenario",
    "true_att", "write_csv",
]
