"""Logistic propensity model fitted by IRLS, and covariate balance."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged, RankDeficient, Separation, ValidationError, ZeroVariance

TOL = 1e-8
MAX_ITER = 50
SCORE_FLOOR = 1e-12


def expit(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def logit(p):
    p = np.asarray(p, dtype=float)
    return np.log(p) - np.log1p(-p)


@dataclass(frozen=True)
class PropensityFit:
    coefficients: np.ndarray          # intercept first
    scores: np.ndarray
    iterations: int
    converged: bool
    max_abs_score_gradient: float
    standard_errors: np.ndarray
    log_likelihood: float
    history: list = field(default_factory=list, repr=False)


def design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack((np.ones(X.shape[0]), X))


def log_likelihood(beta, Xd, y) -> float:
    eta = Xd @ beta
    return float(np.dot(y, eta) - np.logaddexp(0.0, eta).sum())


def score_vector(beta, Xd, y) -> np.ndarray:
    """Gradient of the log-likelihood."""
    return Xd.T @ (y - expit(Xd @ beta))


def fit_logistic(X, A, tol: float = TOL, max_iter: int = MAX_ITER) -> PropensityFit:
    """Maximum-likelihood logistic regression of ``A`` on ``X`` (intercept added).

    Newton-Raphson / IRLS with step halving whenever a full step lowers the
    log-likelihood.  Converged means max |gradient| < ``tol``.
    """
    Xd = design(X)
    y = np.asarray(A, dtype=float)
    n, k = Xd.shape
    if y.shape != (n,):
        raise ValidationError("treatment vector must align with the covariate rows")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("treatment must be binary")
    if n <= k:
        raise ValidationError(f"need more observations ({n}) than parameters ({k})")
    if np.linalg.matrix_rank(Xd) < k:
        raise RankDeficient("design matrix is not of full column rank")

    ybar = y.mean()
    if ybar in (0.0, 1.0):
        raise Separation("treatment is constant; the intercept is unbounded")
    beta = np.zeros(k)
    beta[0] = np.log(ybar / (1 - ybar))
    ll = log_likelihood(beta, Xd, y)
    history = [ll]

    for it in range(max_iter + 1):
        p = expit(Xd @ beta)
        grad = Xd.T @ (y - p)
        gmax = float(np.max(np.abs(grad)))
        if gmax < tol:
            break
        if np.any(p < SCORE_FLOOR) or np.any(p > 1 - SCORE_FLOOR):
            raise Separation(
                f"fitted scores reached the [{SCORE_FLOOR:g}, 1 - {SCORE_FLOOR:g}] "
                f"boundary at iteration {it} with max |gradient| {gmax:.3g}"
            )
        if it == max_iter:
            raise NotConverged(it, gmax)
        w = p * (1 - p)
        hess = (Xd * w[:, None]).T @ Xd
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise RankDeficient("information matrix is singular") from exc
        t = 1.0
        for _ in range(40):
            cand = beta + t * step
            ll_new = log_likelihood(cand, Xd, y)
            if ll_new >= ll - 1e-12 * max(1.0, abs(ll)):
                break
            t *= 0.5
        beta, ll = cand, max(ll_new, ll)
        history.append(ll_new)

    p = expit(Xd @ beta)
    w = p * (1 - p)
    info = (Xd * w[:, None]).T @ Xd
    se = np.sqrt(np.diag(np.linalg.inv(info)))
    return PropensityFit(beta, p, it, True, gmax, se, log_likelihood(beta, Xd, y), history)


def constant_scores(A) -> np.ndarray:
    """Deliberately misspecified model: every subject gets the treated fraction."""
    A = np.asarray(A, dtype=float)
    return np.full(A.shape, A.mean())


@dataclass(frozen=True)
class BalanceTable:
    names: list
    smd_before: np.ndarray
    smd_after: np.ndarray | None

    def rows(self):
        after = self.smd_after if self.smd_after is not None else [float("nan")] * len(self.names)
        return [(n, float(b), float(a)) for n, b, a in zip(self.names, self.smd_before, after)]

    @property
    def max_abs_after(self) -> float:
        src = self.smd_after if self.smd_after is not None else self.smd_before
        return float(np.max(np.abs(src))) if len(src) else 0.0


def standardized_mean_differences(X, A, names=None, matched_rows=None) -> BalanceTable:
    """Standardized mean differences before and (optionally) after matching.

    ``matched_rows`` is an (n_pairs, 2) array of dataset row indices
    ``(treated_row, control_row)``.  The pooled SD sqrt((s_t^2 + s_c^2)/2)
    is taken from the unmatched sample and reused after matching so both
    columns share one scale.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    A = np.asarray(A).astype(bool)
    if names is None:
        names = [f"x{j + 1}" for j in range(X.shape[1])]
    xt, xc = X[A], X[~A]
    if len(xt) < 2 or len(xc) < 2:
        raise ValidationError("each arm needs at least two subjects")
    pooled = np.sqrt((xt.var(axis=0, ddof=1) + xc.var(axis=0, ddof=1)) / 2.0)
    zero = np.flatnonzero(pooled == 0)
    if zero.size:
        raise ZeroVariance(names[zero[0]])
    before = (xt.mean(axis=0) - xc.mean(axis=0)) / pooled
    after = None
    if matched_rows is not None:
        rows = np.asarray(matched_rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != 2 or rows.size == 0:
            raise ValidationError("matched_rows must be a non-empty (n, 2) array")
        if rows.min() < 0 or rows.max() >= X.shape[0]:
            raise ValidationError("matched row index out of range")
        if not (A[rows[:, 0]].all() and not A[rows[:, 1]].any()):
            raise ValidationError("matched_rows must list (treated, control) row pairs")
        after = (X[rows[:, 0]].mean(axis=0) - X[rows[:, 1]].mean(axis=0)) / pooled
    return BalanceTable(list(names), before, after)
