import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmstmatch.errors import TauBeyondFollowUp, TooFewEvents, ValidationError
from rmstmatch.km import (check_tau, km_curve, rmst, rmst_estimate_hosmer,
                          rmst_variance_hosmer, tail_areas)

import oracles

TIMES = [1.0, 2.0, 3.0, 4.0]
EVENTS = [1, 0, 1, 0]


def test_four_subject_curve():
    c = km_curve(TIMES, EVENTS)
    assert c.event_times.tolist() == [1.0, 3.0]
    assert c.at_risk.tolist() == [4.0, 2.0]
    assert c.survival.tolist() == [0.75, 0.375]
    assert c(0.5) == 1.0 and c(1.0) == 0.75 and c(2.9) == 0.75 and c(3.5) == 0.375


def test_four_subject_rmst_tails_and_hosmer():
    c = km_curve(TIMES, EVENTS)
    assert rmst(c, 4.0) == pytest.approx(2.875, abs=1e-14)
    _, areas = tail_areas(c, 4.0)
    # A_1 = int_1^4 S = 0.75 * 2 + 0.375 * 1
    assert areas.tolist() == pytest.approx([1.875, 0.375], abs=1e-14)
    assert rmst_variance_hosmer(c, 4.0) == pytest.approx(0.7265625, abs=1e-14)
    est = rmst_estimate_hosmer(c, 4.0)
    assert est.n_events_before_tau == 2 and est.method == "hosmer"


def test_four_subject_values_match_exact_oracle():
    assert float(oracles.rmst(TIMES, EVENTS, 4)) == 2.875
    assert float(oracles.hosmer_variance(TIMES, EVENTS, 4)) == 0.7265625


def test_no_censoring_is_empirical_survivor():
    t = np.array([3.0, 1.0, 2.0, 2.0, 5.0])
    c = km_curve(t, np.ones(5))
    for x in (0.5, 1.0, 1.5, 2.0, 4.0, 5.0):
        assert c(x) == pytest.approx(np.mean(t > x), abs=1e-15)


def test_events_precede_censorings_at_ties():
    c = km_curve([2.0, 2.0, 3.0], [1, 0, 1])
    assert c.at_risk[0] == 3.0
    assert c.survival[0] == pytest.approx(2 / 3)


def test_censoring_after_last_event_keeps_step_locations():
    a = km_curve([1.0, 2.0, 3.0], [1, 1, 0])
    b = km_curve([1.0, 2.0, 3.0, 7.0], [1, 1, 0, 0])
    assert a.event_times.tolist() == b.event_times.tolist()
    # the extra subject is at risk at every event time, so the values move
    assert b.survival.tolist() == pytest.approx([0.75, 0.5])
    assert b.max_time == 7.0


def test_tau_beyond_follow_up():
    c = km_curve(TIMES, EVENTS)
    check_tau(c, 4.0)
    with pytest.raises(TauBeyondFollowUp) as err:
        rmst(c, 4.5)
    assert "4" in str(err.value)


def test_too_few_events():
    c = km_curve([1.0, 2.0, 3.0], [1, 0, 0])
    with pytest.raises(TooFewEvents):
        rmst_variance_hosmer(c, 3.0)


@pytest.mark.parametrize("time,event", [
    ([], []), ([0.0, 1.0], [1, 1]), ([-1.0], [1]), ([1.0, 2.0], [1, 2]), ([np.nan], [1]),
])
def test_bad_input(time, event):
    with pytest.raises(ValidationError):
        km_curve(time, event)


def test_unit_weights_equal_unweighted():
    rng = np.random.default_rng(1)
    t = rng.exponential(size=50)
    d = rng.integers(0, 2, 50)
    a = km_curve(t, d)
    b = km_curve(t, d, weights=np.ones(50))
    assert np.array_equal(a.survival, b.survival)


def test_integer_weights_equal_replication():
    t = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    d = np.array([1, 0, 1, 1, 0])
    w = np.array([2.0, 1.0, 3.0, 1.0, 2.0])
    a = km_curve(t, d, weights=w)
    b = km_curve(np.repeat(t, w.astype(int)), np.repeat(d, w.astype(int)))
    assert np.allclose(a.survival, b.survival, atol=1e-15)


small_data = st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1, 8), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n)))


@given(small_data, st.integers(1, 8))
def test_matches_exact_oracle(data, tau_int):
    times, events = data
    t = np.array(times, dtype=float)
    tau = min(float(tau_int), t.max())
    c = km_curve(t, events)
    assert rmst(c, tau) == pytest.approx(float(oracles.rmst(times, events, tau)), abs=1e-10)
    steps = oracles.km_steps(times, events)
    assert c.survival.tolist() == pytest.approx([float(s[3]) for s in steps], abs=1e-12)
    m = sum(e for x, e in zip(times, events) if e == 1 and x < tau)
    if m >= 2:
        assert rmst_variance_hosmer(c, tau) == pytest.approx(
            float(oracles.hosmer_variance(times, events, tau)), abs=1e-10)


@given(small_data)
def test_survival_monotone_and_rmst_bounded(data):
    times, events = data
    c = km_curve(np.array(times, float), events)
    assert np.all(np.diff(c.survival) <= 0)
    assert np.all((c.survival >= 0) & (c.survival <= 1))
    tau = float(max(times))
    assert 0 < rmst(c, tau) <= tau
