"""Kaplan-Meier curves, restricted mean survival time and Hosmer's variance."""
from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np

from . import _kernels
from .errors import TauBeyondFollowUp, TooFewEvents, ValidationError


@dataclass(frozen=True)
class KMCurve:
    """Product-limit estimate stored at the distinct event times.

    ``at_risk`` and ``events`` are counts for unweighted curves and weight
    sums for weighted ones.  ``max_time`` is the largest follow-up time
    (event or censored) in the data the curve was fitted on.
    """
    event_times: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    survival: np.ndarray
    n_subjects: int
    max_time: float

    def __call__(self, t):
        """Right-continuous step evaluation of S(t)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.event_times, t, side="right")
        s = np.concatenate(([1.0], self.survival))
        return s[idx]

    def rows(self):
        return list(zip(self.event_times.tolist(), self.at_risk.tolist(),
                        self.events.tolist(), self.survival.tolist()))


@dataclass(frozen=True)
class RmstEstimate:
    value: float
    variance: float
    method: str
    tau: float
    n_events_before_tau: int


def km_curve(time, event, weights=None) -> KMCurve:
    """Fit the product-limit estimator.

    At a time carrying both events and censorings the events are counted
    first, i.e. subjects censored at ``t`` are still at risk at ``t``.
    """
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    if time.ndim != 1 or time.shape != event.shape:
        raise ValidationError("time and event must be 1-d arrays of equal length")
    if time.size == 0:
        raise ValidationError("cannot fit a survival curve to zero subjects")
    if np.any(time <= 0) or not np.all(np.isfinite(time)):
        raise ValidationError("survival times must be finite and strictly positive")
    if np.any((event != 0) & (event != 1)):
        raise ValidationError("event flags must be 0 or 1")
    if weights is None:
        weights = np.ones_like(time)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != time.shape or np.any(weights < 0):
            raise ValidationError("weights must be nonnegative and aligned with time")

    order = np.argsort(time, kind="stable")
    times, at_risk, events = _kernels.risk_table(
        np.ascontiguousarray(time[order]),
        np.ascontiguousarray(event[order]),
        np.ascontiguousarray(weights[order]),
    )
    survival = np.cumprod(1.0 - events / at_risk)
    return KMCurve(times, at_risk, events, survival, int(time.size), float(time.max()))


def check_tau(curve: KMCurve, tau: float, arm=None) -> None:
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau!r}")
    if tau > curve.max_time:
        raise TauBeyondFollowUp(tau, curve.max_time, arm)


def _grid_before(curve: KMCurve, tau: float) -> int:
    # N_tau: number of event times strictly below tau
    return int(np.searchsorted(curve.event_times, tau, side="left"))


def rmst(curve: KMCurve, tau: float) -> float:
    """Area under the KM step function on [0, tau]."""
    check_tau(curve, tau)
    k = _grid_before(curve, tau)
    t = np.concatenate(([0.0], curve.event_times[:k], [tau]))
    s = np.concatenate(([1.0], curve.survival[:k]))
    return float(np.sum(s * np.diff(t)))


def tail_areas(curve: KMCurve, tau: float):
    """Event times below tau and the tail areas A_k = int_{t_k}^tau S(t) dt."""
    k = _grid_before(curve, tau)
    t = curve.event_times[:k]
    widths = np.diff(np.concatenate((t, [tau])))
    pieces = curve.survival[:k] * widths
    areas = np.cumsum(pieces[::-1])[::-1]
    return t, areas


def rmst_variance_hosmer(curve: KMCurve, tau: float) -> float:
    check_tau(curve, tau)
    k = _grid_before(curve, tau)
    d = curve.events[:k]
    y = curve.at_risk[:k]
    m = float(d.sum())
    if m < 2:
        raise TooFewEvents(int(m))
    _, areas = tail_areas(curve, tau)
    full = y == d
    if np.any(areas[full] > 0):
        # unreachable for a product-limit curve: S is 0 from t_k on
        warnings.warn("risk set exhausted with positive tail area; Hosmer variance undefined")
        return float("nan")
    keep = ~full
    terms = d[keep] * areas[keep] ** 2 / (y[keep] * (y[keep] - d[keep]))
    return float(m / (m - 1.0) * terms.sum())


def rmst_estimate_hosmer(curve: KMCurve, tau: float) -> RmstEstimate:
    k = _grid_before(curve, tau)
    return RmstEstimate(
        value=rmst(curve, tau),
        variance=rmst_variance_hosmer(curve, tau),
        method="hosmer",
        tau=float(tau),
        n_events_before_tau=int(round(curve.events[:k].sum())),
    )
