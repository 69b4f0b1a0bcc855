"""E-value style sensitivity analysis for a matched RMST difference.

An unmeasured binary confounder U is described by two parameters, both
>= 1: ``rr_au``, the largest risk ratio of treatment on a level of U, and
``mr_uz``, the largest ratio of mean restricted survival across levels of
U.  They combine into the bounding factor

    BF = rr_au * mr_uz / (rr_au + mr_uz - 1)

which turns the arm means m1 = E(Z | A=1) and m0 = E(Z | A=0) into a
bound on the true effect.  For a treated fraction f (1/2 in a 1:1 matched
sample) the bounds are

    positive effect:  ACE >= (m1 - m0 * BF) * (f + (1 - f) / BF)
    negative effect:  ACE <= (m1 - m0 / BF) * (f * BF + 1 - f)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingMeans, NegativeMean, ParamBelowOne, ValidationError

POSITIVE = "positive-effect-lower-bound"
NEGATIVE = "negative-effect-upper-bound"


@dataclass(frozen=True)
class SensitivityParams:
    rr_au: float
    mr_uz: float

    def __post_init__(self):
        if not (self.rr_au >= 1 and self.mr_uz >= 1):
            raise ParamBelowOne(f"sensitivity parameters must be >= 1, got "
                                f"RR_AU={self.rr_au!r}, MR_UZ={self.mr_uz!r}")


def bounding_factor(rr_au, mr_uz=None):
    """BF for scalar or array arguments; accepts a SensitivityParams too."""
    if isinstance(rr_au, SensitivityParams):
        rr_au, mr_uz = rr_au.rr_au, rr_au.mr_uz
    rr = np.asarray(rr_au, dtype=float)
    mr = np.asarray(mr_uz, dtype=float)
    if np.any(rr < 1) or np.any(mr < 1) or np.any(np.isnan(rr)) or np.any(np.isnan(mr)):
        raise ParamBelowOne("sensitivity parameters must be >= 1")
    # same as rr * mr / (rr + mr - 1), but exactly 1 on either edge and never below it
    bf = 1.0 + (rr - 1.0) * (mr - 1.0) / (rr + mr - 1.0)
    return float(bf) if bf.ndim == 0 else bf


def effect_bound(m1: float, m0: float, bf, observed_sign: str, treated_fraction: float = 0.5):
    """Worst-case bound on the true effect given bounding factor ``bf``.

    ``observed_sign="positive"`` gives the lower bound of a positive effect,
    ``"negative"`` the upper bound of a negative one.
    """
    if m1 is None or m0 is None:
        raise MissingMeans("both arm means are required")
    if m1 < 0 or m0 < 0:
        raise NegativeMean(f"arm means must be nonnegative, got m1={m1!r}, m0={m0!r}")
    if not 0 <= treated_fraction <= 1:
        raise ValidationError("treated_fraction must lie in [0, 1]")
    bf = np.asarray(bf, dtype=float)
    if np.any(bf < 1):
        raise ParamBelowOne("bounding factor must be >= 1")
    f = treated_fraction
    if observed_sign == "positive":
        out = (m1 - m0 * bf) * (f + (1 - f) / bf)
    elif observed_sign == "negative":
        out = (m1 - m0 / bf) * (f * bf + 1 - f)
    else:
        raise ValidationError("observed_sign must be 'positive' or 'negative'")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SensitivityGrid:
    rr_values: np.ndarray
    mr_values: np.ndarray
    bounds: np.ndarray            # bounds[i, j] at (rr_values[i], mr_values[j])
    zero_contour: list
    direction: str
    m1: float
    m0: float

    def rows(self):
        return [(float(r), float(m), float(self.bounds[i, j]))
                for i, r in enumerate(self.rr_values) for j, m in enumerate(self.mr_values)]

    def is_monotone(self) -> bool:
        """Bounds move weakly toward (and past) zero along both axes."""
        b = self.bounds
        tol = 1e-12 * max(1.0, float(np.max(np.abs(b))))
        if self.direction == NEGATIVE:
            return bool(np.all(np.diff(b, axis=0) >= -tol) and np.all(np.diff(b, axis=1) >= -tol))
        return bool(np.all(np.diff(b, axis=0) <= tol) and np.all(np.diff(b, axis=1) <= tol))

    def diagonal_crossing(self) -> float | None:
        """Smallest rr = mr on the diagonal where the bound reaches zero."""
        return _diagonal_zero(self.m1, self.m0, self.direction)


def _diagonal_zero(m1, m0, direction):
    # bound is zero when BF equals m1/m0 (positive) or m0/m1 (negative)
    target = (m1 / m0 if direction == POSITIVE else m0 / m1) if min(m0, m1) > 0 else None
    if target is None or target < 1:
        return None
    # r^2 / (2r - 1) = target
    return float(target + np.sqrt(target * target - target))


def zero_contour(rr_values, mr_values, bounds) -> list:
    """Points where the bound equals or crosses zero, interpolated along mr."""
    pts = []
    for i, rr in enumerate(rr_values):
        row = bounds[i]
        for j in range(len(mr_values)):
            if row[j] == 0.0:
                pts.append((float(rr), float(mr_values[j])))
            if j + 1 < len(mr_values):
                a, b = row[j], row[j + 1]
                if a != 0.0 and b != 0.0 and (a < 0) != (b < 0):
                    frac = a / (a - b)
                    mr = mr_values[j] + frac * (mr_values[j + 1] - mr_values[j])
                    pts.append((float(rr), float(mr)))
    return pts


def sensitivity_grid(m1: float, m0: float, rr_range=(1.0, 3.0), mr_range=(1.0, 3.0),
                     steps: int = 81) -> SensitivityGrid:
    """Effect bounds over an (RR_AU, MR_UZ) grid; direction from sign(m1 - m0)."""
    if rr_range[0] < 1 or mr_range[0] < 1:
        raise ParamBelowOne("grid ranges must start at >= 1")
    if steps < 2:
        raise ValidationError("steps must be >= 2")
    rr = np.linspace(rr_range[0], rr_range[1], steps)
    mr = np.linspace(mr_range[0], mr_range[1], steps)
    sign = "positive" if m1 >= m0 else "negative"
    bf = bounding_factor(rr[:, None], mr[None, :])
    bounds = effect_bound(m1, m0, bf, sign)
    direction = POSITIVE if sign == "positive" else NEGATIVE
    return SensitivityGrid(rr, mr, bounds, zero_contour(rr, mr, bounds), direction,
                           float(m1), float(m0))
