"""Covariance of the two arms' RMST estimates in a 1:1 matched sample.

Ĝ01(u, v) is estimated with counting-process sums over the pairs (one
treated and one control subject per pair) and integrated against the
arms' KM tail areas.  Two equivalent evaluations are provided:

* ``method="grid"`` builds the full |u| x |v| table of Ĝ01 and takes the
  double sum;
* ``method="influence"`` (default) uses the exact factorisation of that
  double sum into per-pair terms,
  ``cov = sum_k psi0_k * psi1_k`` with
  ``psi_k = delta_k w(x_k) - sum_{u <= x_k} w(u) dN(u) / Y(u)`` and
  ``w(u) = tail(u) / Y(u)``.  It needs O(n log n) time and no grid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .km import KMCurve, check_tau, km_curve

PAIRINGS = ("derived", "printed")


@dataclass(frozen=True)
class PairedSample:
    """Observed times and event flags of ``n`` matched pairs.

    Arm 0 is the control member of each pair, arm 1 the treated member.
    """
    time0: np.ndarray
    time1: np.ndarray
    event0: np.ndarray
    event1: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in
                  (self.time0, self.time1, self.event0, self.event1)]
        if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
            raise ValidationError("paired arrays must be 1-d and aligned by pair")
        for name, a in zip(("time0", "time1", "event0", "event1"), arrays):
            object.__setattr__(self, name, a)

    @property
    def n_pairs(self) -> int:
        return int(self.time0.shape[0])

    def swapped(self) -> "PairedSample":
        return PairedSample(self.time1, self.time0, self.event1, self.event0)

    def take(self, idx) -> "PairedSample":
        return PairedSample(self.time0[idx], self.time1[idx],
                            self.event0[idx], self.event1[idx])

    @classmethod
    def duplicated(cls, time, event) -> "PairedSample":
        """Pair every subject with itself (covariance becomes variance)."""
        return cls(time, time, event, event)


@dataclass(frozen=True)
class GGrid:
    u_grid: np.ndarray
    v_grid: np.ndarray
    g_values: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    y01: np.ndarray
    n_pairs: int

    def rows(self, skip_zero=True):
        """``(u, v, g)`` triples, skipping cells whose four terms all vanish."""
        out = []
        for i, u in enumerate(self.u_grid.tolist()):
            for j, v in enumerate(self.v_grid.tolist()):
                g = float(self.g_values[i, j])
                if skip_zero and g == 0.0:
                    continue
                out.append((u, v, g))
        return out


def _event_grid(time, event, tau):
    t = np.unique(time[(event == 1) & (time < tau if tau is not None else True)])
    return t


def estimate_G01(sample: PairedSample, tau: float | None = None) -> GGrid:
    """Estimate Ĝ01 on (arm-0 event times) x (arm-1 event times).

    With ``tau`` given only event times strictly below it are kept; cells at
    or beyond tau carry zero tail area in every use of the grid.
    """
    n = sample.n_pairs
    if n < 2:
        raise ValidationError("need at least 2 pairs")
    x0, x1 = sample.time0, sample.time1
    d0, d1 = sample.event0, sample.event1
    u = _event_grid(x0, d0, tau)
    v = _event_grid(x1, d1, tau)
    nu, nv = u.size, v.size

    # a_k > i  <=>  x0_k >= u_i
    a = np.searchsorted(u, x0, side="right")
    b = np.searchsorted(v, x1, side="right")
    ev0 = (d0 == 1) & (a > 0)
    ev0[ev0] = u[a[ev0] - 1] == x0[ev0]
    ev1 = (d1 == 1) & (b > 0)
    ev1[ev1] = v[b[ev1] - 1] == x1[ev1]

    def _rev_cumsum(h, axis):
        return np.flip(np.cumsum(np.flip(h, axis=axis), axis=axis), axis=axis)

    h = np.zeros((nu + 1, nv + 1))
    np.add.at(h, (a, b), 1.0)
    y01 = _rev_cumsum(_rev_cumsum(h, 0), 1)[1:, 1:]
    y0 = np.bincount(a, minlength=nu + 1)[::-1].cumsum()[::-1][1:].astype(float)
    y1 = np.bincount(b, minlength=nv + 1)[::-1].cumsum()[::-1][1:].astype(float)

    dn0 = np.bincount(a[ev0] - 1, minlength=nu).astype(float)
    dn1 = np.bincount(b[ev1] - 1, minlength=nv).astype(float)

    both = ev0 & ev1
    dn01 = np.zeros((nu, nv))
    np.add.at(dn01, (a[both] - 1, b[both] - 1), 1.0)

    # events in arm 0 at u_i with the partner still at risk at v_j
    e0 = np.zeros((nu, nv + 1))
    np.add.at(e0, (a[ev0] - 1, b[ev0]), 1.0)
    dn0_given1 = _rev_cumsum(e0, 1)[:, 1:]
    e1 = np.zeros((nu + 1, nv))
    np.add.at(e1, (a[ev1], b[ev1] - 1), 1.0)
    dn1_given0 = _rev_cumsum(e1, 0)[1:, :]

    Y0 = y0[:, None]
    Y1 = y1[None, :]
    D0 = dn0[:, None]
    D1 = dn1[None, :]
    # n Y01/(Y0 Y1) [dN01/Y01 - ...] with the Y01 factor cancelled
    g = n / (Y0 * Y1) * (
        dn01
        - dn0_given1 * D1 / Y1
        - dn1_given0 * D0 / Y0
        + y01 * D0 * D1 / (Y0 * Y1)
    )
    return GGrid(u, v, g, y0, y1, y01, n)


def area_to(curve: KMCurve, x) -> np.ndarray:
    """int_0^x S(t) dt for an array of x."""
    x = np.asarray(x, dtype=float)
    knots = np.concatenate(([0.0], curve.event_times))
    s = np.concatenate(([1.0], curve.survival))
    cum = np.concatenate(([0.0], np.cumsum(s[:-1] * np.diff(knots))))
    idx = np.searchsorted(knots, x, side="right") - 1
    return cum[idx] + s[idx] * (x - knots[idx])


def tail_area(curve: KMCurve, s, tau: float) -> np.ndarray:
    """int_s^tau S(t) dt, zero for s >= tau."""
    s = np.asarray(s, dtype=float)
    out = area_to(curve, tau) - area_to(curve, np.minimum(s, tau))
    return np.where(s >= tau, 0.0, out)


def _influence(time, event, curve: KMCurve, tail_fn, tau):
    """Per-subject terms psi_k for one arm."""
    k = int(np.searchsorted(curve.event_times, tau, side="left"))
    u = curve.event_times[:k]
    y = curve.at_risk[:k]
    dn = curve.events[:k]
    if k == 0:
        return np.zeros_like(time)
    w = tail_fn(u) / y
    cum = np.cumsum(w * dn / y)
    idx = np.searchsorted(u, time, side="right")
    compensator = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    hit = (event == 1) & (idx > 0)
    hit[hit] = u[idx[hit] - 1] == time[hit]
    jump = np.zeros_like(time)
    jump[hit] = w[idx[hit] - 1]
    return jump - compensator


def murray_covariance(sample: PairedSample, tau: float, curve0: KMCurve | None = None,
                      curve1: KMCurve | None = None, pairing: str = "derived",
                      method: str = "influence") -> float:
    """Covariance of the arm-0 and arm-1 RMST estimates over [0, tau].

    ``pairing="derived"`` weights Ĝ01(u, v) by int_u^tau S0 * int_v^tau S1;
    ``pairing="printed"`` uses int_v^tau S0 * int_u^tau S1 instead and is
    kept only for comparison.
    """
    if pairing not in PAIRINGS:
        raise ValidationError(f"pairing must be one of {PAIRINGS}")
    if curve0 is None:
        curve0 = km_curve(sample.time0, sample.event0)
    if curve1 is None:
        curve1 = km_curve(sample.time1, sample.event1)
    check_tau(curve0, tau, arm=0)
    check_tau(curve1, tau, arm=1)

    if pairing == "derived":
        f0 = lambda s: tail_area(curve0, s, tau)  # noqa: E731
        f1 = lambda s: tail_area(curve1, s, tau)  # noqa: E731
    else:
        f0 = lambda s: tail_area(curve1, s, tau)  # noqa: E731
        f1 = lambda s: tail_area(curve0, s, tau)  # noqa: E731

    if method == "influence":
        psi0 = _influence(sample.time0, sample.event0, curve0, f0, tau)
        psi1 = _influence(sample.time1, sample.event1, curve1, f1, tau)
        return float(np.dot(psi0, psi1))
    if method == "grid":
        grid = estimate_G01(sample, tau)
        return float(f0(grid.u_grid) @ grid.g_values @ f1(grid.v_grid)) / sample.n_pairs
    raise ValidationError(f"unknown method {method!r}")


def murray_marginal_variance(time, event, tau: float, curve: KMCurve | None = None,
                             method: str = "influence") -> float:
    """Variance of one arm's RMST estimate as its covariance with itself."""
    time = np.asarray(time, dtype=float)
    event = np.asarray(event, dtype=float)
    if curve is None:
        curve = km_curve(time, event)
    sample = PairedSample.duplicated(time, event)
    return murray_covariance(sample, tau, curve, curve, method=method)
