"""Matched RMST difference (ATT) with paired variance, and the IPTW-KM comparator."""
from __future__ import annotations

from dataclasses import asdict, dataclass
import math
from statistics import NormalDist
import warnings

import numpy as np

from .errors import EmptyMatch, ValidationError
from .km import check_tau, km_curve, rmst, rmst_variance_hosmer
from .matching import MatchedPairs, optimal_pair_match
from .paired_cov import PairedSample, murray_covariance, murray_marginal_variance
from .propensity import fit_logistic, standardized_mean_differences

VARIANCE_METHODS = ("murray", "hosmer")


class ExtremePSWeight(UserWarning):
    """A control received an ATT weight e/(1-e) above 100."""


@dataclass(frozen=True)
class AttResult:
    estimate: float
    se: float
    ci_low: float
    ci_high: float
    var0: float
    var1: float
    cov: float
    rmst0: float
    rmst1: float
    tau: float
    n_pairs: int
    variance_method: str
    level: float = 0.95
    p_value: float = float("nan")

    @property
    def degenerate(self) -> bool:
        """True when the paired variance collapses to zero (e.g. self-comparison)."""
        return self.se == 0.0

    def to_dict(self):
        return asdict(self)


def row_pairs(treatment, pairs: MatchedPairs) -> np.ndarray:
    """Map arm-local pair indices to dataset row indices (treated_row, control_row)."""
    A = np.asarray(treatment)
    treated_rows = np.flatnonzero(A == 1)
    control_rows = np.flatnonzero(A == 0)
    return np.column_stack((treated_rows[pairs.treated], control_rows[pairs.control]))


def paired_sample(time, event, rows) -> PairedSample:
    rows = np.asarray(rows, dtype=np.int64)
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    return PairedSample(time[rows[:, 1]], time[rows[:, 0]], event[rows[:, 1]], event[rows[:, 0]])


def _z(level):
    if level == 0.95:
        return 1.96
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def paired_rmst_difference(sample: PairedSample, tau: float, variance_method: str = "murray",
                           level: float = 0.95) -> AttResult:
    """RMST(arm 1) - RMST(arm 0) on matched pairs with the paired variance

    var = var0 + var1 - 2 cov, cov from the matched-pair Ĝ01 estimate.
    """
    if variance_method not in VARIANCE_METHODS:
        raise ValidationError(f"variance_method must be one of {VARIANCE_METHODS}")
    if sample.n_pairs == 0:
        raise EmptyMatch("no matched pairs")
    c0 = km_curve(sample.time0, sample.event0)
    c1 = km_curve(sample.time1, sample.event1)
    check_tau(c0, tau, arm="control")
    check_tau(c1, tau, arm="treated")
    mu0, mu1 = rmst(c0, tau), rmst(c1, tau)
    if variance_method == "murray":
        var0 = murray_marginal_variance(sample.time0, sample.event0, tau, c0)
        var1 = murray_marginal_variance(sample.time1, sample.event1, tau, c1)
    else:
        var0 = rmst_variance_hosmer(c0, tau)
        var1 = rmst_variance_hosmer(c1, tau)
    cov = murray_covariance(sample, tau, c0, c1)
    var = var0 + var1 - 2.0 * cov
    se = math.sqrt(var) if var > 0 else 0.0
    est = mu1 - mu0
    z = _z(level)
    p = math.erfc(abs(est / se) / math.sqrt(2.0)) if se > 0 else float("nan")
    return AttResult(est, se, est - z * se, est + z * se, var0, var1, cov, mu0, mu1,
                     float(tau), sample.n_pairs, variance_method, level, p)


def matched_rmst_att(dataset, pairs, tau: float, variance_method: str = "murray",
                     level: float = 0.95) -> AttResult:
    """ATT estimate from a matched sample.

    ``pairs`` is a :class:`MatchedPairs` (arm-local indices) or an (n, 2)
    array of dataset rows ``(treated_row, control_row)``.
    """
    rows = row_pairs(dataset.treatment, pairs) if isinstance(pairs, MatchedPairs) else pairs
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise EmptyMatch("no matched pairs")
    return paired_rmst_difference(paired_sample(dataset.time, dataset.event, rows), tau,
                                  variance_method, level)


def iptw_km_rmst_att(dataset, scores, tau: float) -> float:
    """RMST difference of ATT-weighted KM curves (treated weight 1, control e/(1-e))."""
    scores = np.asarray(scores, dtype=float)
    A = np.asarray(dataset.treatment)
    if np.any(scores <= 0) or np.any(scores >= 1):
        raise ValidationError("propensity scores must lie strictly inside (0, 1)")
    t = np.asarray(dataset.time, dtype=float)
    d = np.asarray(dataset.event, dtype=float)
    ctrl = A == 0
    w0 = scores[ctrl] / (1.0 - scores[ctrl])
    if np.any(w0 > 100):
        warnings.warn(f"{int(np.sum(w0 > 100))} control weights exceed 100", ExtremePSWeight)
    c1 = km_curve(t[~ctrl], d[~ctrl])
    c0 = km_curve(t[ctrl], d[ctrl], weights=w0)
    check_tau(c0, tau, arm="control")
    check_tau(c1, tau, arm="treated")
    return rmst(c1, tau) - rmst(c0, tau)


@dataclass(frozen=True)
class PerformanceSummary:
    n_reps: int
    truth: float
    mean_estimate: float
    bias: float
    bias_pct: float      # nan when truth == 0
    cp: float
    sem: float
    see: float

    @property
    def bias_column(self) -> float:
        """Percentage bias, or the raw bias when the truth is zero."""
        return self.bias if math.isnan(self.bias_pct) else self.bias_pct


def summarize_replicates(estimates, ses=None, ci_lows=None, ci_highs=None, truth: float = 0.0,
                         zero_tol: float = 1e-12) -> PerformanceSummary:
    est = np.asarray(estimates, dtype=float)
    if est.size < 2:
        raise ValidationError("need at least 2 replicates")
    mean = float(est.mean())
    bias = mean - truth
    bias_pct = float("nan") if abs(truth) <= zero_tol else 100.0 * bias / truth
    see = float(est.std(ddof=1))
    sem = cp = float("nan")
    if ses is not None:
        sem = float(np.mean(ses))
    if ci_lows is not None and ci_highs is not None:
        lo = np.asarray(ci_lows, dtype=float)
        hi = np.asarray(ci_highs, dtype=float)
        cp = float(np.mean((lo <= truth) & (truth <= hi)))
    return PerformanceSummary(int(est.size), float(truth), mean, bias, bias_pct, cp, sem, see)


@dataclass(frozen=True)
class Analysis:
    """Everything the full pipeline produces on one dataset."""
    result: AttResult
    propensity: object
    pairs: MatchedPairs
    rows: np.ndarray
    balance: object
    scores: np.ndarray


def analyze(dataset, tau: float, variance_method: str = "murray", metric: str = "logit",
            covariate_columns=None, scores=None, level: float = 0.95) -> Analysis:
    """Propensity fit -> optimal pair match -> matched RMST difference.

    ``scores`` bypasses the logistic fit (e.g. a fixed or misspecified model).
    """
    X = dataset.covariates if covariate_columns is None else dataset.covariates[:, covariate_columns]
    A = np.asarray(dataset.treatment)
    fit = None
    if scores is None:
        fit = fit_logistic(X, A)
        scores = fit.scores
    pairs = optimal_pair_match(scores[A == 1], scores[A == 0], metric=metric)
    rows = row_pairs(A, pairs)
    result = matched_rmst_att(dataset, rows, tau, variance_method, level)
    names = list(dataset.covariate_names)
    if covariate_columns is not None:
        names = [names[j] for j in covariate_columns]
    balance = standardized_mean_differences(X, A, names, rows)
    return Analysis(result, fit, pairs, rows, balance, np.asarray(scores))
