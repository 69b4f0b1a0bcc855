"""Optimal 1:1 propensity-score matching without replacement.

The distance between a treated and a control subject is the absolute
difference of their (logit or raw) propensity scores, so both sides live on
a line.  For such costs some optimal assignment never crosses: after
sorting both sides, treated subject ``i`` is matched to a control ranked
above the one used by treated subject ``i - 1``.  Searching only
order-preserving assignments therefore finds the global optimum of the
full assignment problem, in O(n_treated * n_control) time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InsufficientControls, ValidationError

METRICS = ("logit", "raw")


@dataclass(frozen=True)
class MatchedPairs:
    """``pairs[k] = (treated_index, control_index)``, sorted by treated index.

    Indices refer to positions within the treated and control score vectors
    passed to :func:`optimal_pair_match`.
    """
    pairs: np.ndarray
    total_distance: float
    distance_metric: str
    distances: np.ndarray

    def __len__(self):
        return int(self.pairs.shape[0])

    @property
    def treated(self):
        return self.pairs[:, 0]

    @property
    def control(self):
        return self.pairs[:, 1]


def _transform(scores, metric):
    scores = np.asarray(scores, dtype=float)
    if np.any(~np.isfinite(scores)) or np.any(scores <= 0) or np.any(scores >= 1):
        raise ValidationError("propensity scores must lie strictly inside (0, 1)")
    if metric == "logit":
        return np.log(scores) - np.log1p(-scores)
    if metric == "raw":
        return scores
    raise ValidationError(f"metric must be one of {METRICS}, got {metric!r}")


def optimal_pair_match(scores_treated, scores_control, metric: str = "logit") -> MatchedPairs:
    """Minimum total-distance 1:1 matching of every treated subject.

    Ties among equal-cost assignments are resolved deterministically: equal
    scores are ordered by index and, within the search, a control ranked
    earlier is preferred.
    """
    st = _transform(scores_treated, metric)
    sc = _transform(scores_control, metric)
    nt, nc = st.size, sc.size
    if nt < 1 or nc < nt:
        raise InsufficientControls(nt, nc)

    ot = np.argsort(st, kind="stable")
    oc = np.argsort(sc, kind="stable")
    pos, _ = _kernels.monotone_match(np.ascontiguousarray(st[ot]), np.ascontiguousarray(sc[oc]))
    treated = ot
    control = oc[pos]
    order = np.argsort(treated, kind="stable")
    pairs = np.column_stack((treated[order], control[order])).astype(np.int64)
    dist = np.abs(st[pairs[:, 0]] - sc[pairs[:, 1]])
    return MatchedPairs(pairs, float(dist.sum()), metric, dist)


def assignment_cost(scores_treated, scores_control, control_for_treated, metric="logit") -> float:
    """Total distance of an explicit assignment (treated i -> control_for_treated[i])."""
    st = _transform(scores_treated, metric)
    sc = _transform(scores_control, metric)
    return float(np.abs(st - sc[np.asarray(control_for_treated)]).sum())
