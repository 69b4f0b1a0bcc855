import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linear_sum_assignment

from rmstmatch._kernels import _numpy
from rmstmatch.errors import InsufficientControls, ValidationError
from rmstmatch.matching import assignment_cost, optimal_pair_match
from rmstmatch.propensity import logit

import oracles

try:
    from rmstmatch._kernels import _core
except ImportError:
    _core = None


def lsa_cost(st_, sc_, metric="logit"):
    f = logit if metric == "logit" else (lambda x: np.asarray(x))
    cost = np.abs(f(st_)[:, None] - f(sc_)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].sum()


def test_simple_instance():
    m = optimal_pair_match([0.5, 0.2], [0.19, 0.8, 0.51, 0.3], metric="raw")
    assert m.pairs.tolist() == [[0, 2], [1, 0]]
    assert m.total_distance == pytest.approx(0.02)
    assert len(m) == 2 and m.distances.tolist() == pytest.approx([0.01, 0.01])


def test_greedy_is_not_optimal_here():
    # greedy nearest-first would take 0.5 -> 0.5 and leave 0.4 with 0.9
    m = optimal_pair_match([0.5, 0.4], [0.5, 0.9, 0.1], metric="raw")
    assert m.total_distance == pytest.approx(lsa_cost(np.array([0.5, 0.4]),
                                                      np.array([0.5, 0.9, 0.1]), "raw"))


def test_equal_sizes_match_by_rank():
    rng = np.random.default_rng(0)
    a, b = rng.random(30) * 0.98 + 0.01, rng.random(30) * 0.98 + 0.01
    m = optimal_pair_match(a, b)
    assert np.array_equal(np.argsort(np.argsort(a))[m.treated], np.argsort(np.argsort(b))[m.control])


def test_insufficient_controls_and_bad_scores():
    with pytest.raises(InsufficientControls):
        optimal_pair_match([0.2, 0.3], [0.4])
    with pytest.raises(InsufficientControls):
        optimal_pair_match([], [0.4])
    with pytest.raises(ValidationError):
        optimal_pair_match([0.2], [1.0])
    with pytest.raises(ValidationError):
        optimal_pair_match([0.2], [0.3], metric="mahalanobis")


def test_ties_are_deterministic():
    m1 = optimal_pair_match([0.3, 0.3], [0.3, 0.3, 0.3])
    m2 = optimal_pair_match([0.3, 0.3], [0.3, 0.3, 0.3])
    assert np.array_equal(m1.pairs, m2.pairs)
    assert m1.pairs.tolist() == [[0, 0], [1, 1]]


def test_metrics_can_disagree():
    t, c = [0.5, 0.95], [0.6, 0.9, 0.99]
    raw = optimal_pair_match(t, c, metric="raw")
    lg = optimal_pair_match(t, c, metric="logit")
    assert raw.total_distance == pytest.approx(lsa_cost(np.array(t), np.array(c), "raw"))
    assert lg.total_distance == pytest.approx(lsa_cost(np.array(t), np.array(c), "logit"))


scores = st.floats(0.01, 0.99)


@given(st.integers(1, 7).flatmap(lambda nt: st.tuples(
    st.lists(scores, min_size=nt, max_size=nt),
    st.lists(scores, min_size=nt, max_size=8))))
def test_brute_force(data):
    t, c = data
    if len(c) < len(t):
        return
    lt, lc = logit(t), logit(c)
    cost = np.abs(lt[:, None] - lc[None, :]).tolist()
    m = optimal_pair_match(t, c)
    assert m.total_distance == pytest.approx(oracles.brute_force_match(cost), abs=1e-12)
    assert len(set(m.control.tolist())) == len(t)


@given(st.integers(1, 60).flatmap(lambda nt: st.tuples(
    st.lists(st.integers(1, 30).map(lambda k: k / 31), min_size=nt, max_size=nt),
    st.lists(st.integers(1, 30).map(lambda k: k / 31), min_size=nt, max_size=150))),
    st.sampled_from(["logit", "raw"]))
def test_matches_linear_sum_assignment(data, metric):
    t, c = (np.array(x) for x in data)
    if len(c) < len(t):
        return
    m = optimal_pair_match(t, c, metric=metric)
    assert m.total_distance == pytest.approx(lsa_cost(t, c, metric), rel=1e-12, abs=1e-12)
    assert m.total_distance == pytest.approx(assignment_cost(t, c, m.control, metric), abs=1e-12)


@given(st.lists(scores, min_size=1, max_size=20), st.lists(scores, min_size=20, max_size=40),
       st.randoms(use_true_random=False))
def test_input_order_does_not_change_cost(t, c, rnd):
    t, c = np.array(t), np.array(c)
    pt, pc = list(range(len(t))), list(range(len(c)))
    rnd.shuffle(pt)
    rnd.shuffle(pc)
    a = optimal_pair_match(t, c)
    b = optimal_pair_match(t[pt], c[pc])
    assert a.total_distance == pytest.approx(b.total_distance, abs=1e-12)


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
@given(st.lists(st.integers(0, 20), min_size=1, max_size=30),
       st.lists(st.integers(0, 20), min_size=30, max_size=60))
def test_kernels_agree_including_ties(t, c):
    t = np.sort(np.array(t, dtype=float))
    c = np.sort(np.array(c, dtype=float))
    pa, ca = _numpy.monotone_match(t, c)
    pb, cb = _core.monotone_match(t, c)
    assert np.array_equal(pa, pb) and ca == cb


def test_single_nearest_match():
    m = optimal_pair_match([0.5], [0.4, 0.9])
    assert m.pairs.tolist() == [[0, 0]]


def test_two_by_two_against_exhaustive_search():
    t, c = [0.3, 0.7], [0.69, 0.31]
    m = optimal_pair_match(t, c)
    assert m.pairs.tolist() == [[0, 1], [1, 0]]
    cost = np.abs(logit(t)[:, None] - logit(c)[None, :]).tolist()
    assert m.total_distance == pytest.approx(oracles.brute_force_match(cost), abs=1e-15)
    assert m.total_distance == pytest.approx(2 * (logit(0.31) - logit(0.3)), abs=1e-15)
    assert m.total_distance == pytest.approx(0.094357, abs=1e-6)


def test_beats_random_assignments():
    rng = np.random.default_rng(11)
    t, c = rng.uniform(0.05, 0.95, 25), rng.uniform(0.05, 0.95, 60)
    best = optimal_pair_match(t, c).total_distance
    for _ in range(1000):
        assert best <= assignment_cost(t, c, rng.permutation(60)[:25]) + 1e-12
