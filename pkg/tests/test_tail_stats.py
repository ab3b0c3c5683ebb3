import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paretotails.errors import DegenerateTail, EmptySample, TooFewTailObs
from paretotails.tail_stats import clean_sample, hill, hill_default, log_rank_points, tail_count


def test_clean_sample_drops_missing_and_nonpositive():
    s = clean_sample([3.0, None, -1.0, 0.0, float("nan"), 5.0, 1.0])
    assert s.values.tolist() == [5.0, 3.0, 1.0]
    assert s.n_raw == 7 and s.n_pos == 3


def test_clean_sample_empty():
    with pytest.raises(EmptySample):
        clean_sample([0.0, -2.0, None])


def test_hand_example():
    s = clean_sample([8, 4, 2, 1])
    est = hill(s, 3)
    # threshold X_(3) = 2: logs are log 4, log 2, 0
    assert est.threshold == 2.0
    assert est.alpha == pytest.approx(1.0 / math.log(2.0), abs=1e-12)
    assert est.se == pytest.approx(est.alpha / math.sqrt(3.0), abs=1e-12)


@pytest.mark.parametrize("n,f,k", [(1000, 0.05, 50), (100, 0.05, 5), (59, 0.05, 2), (999, 0.05, 49)])
def test_tail_count(n, f, k):
    assert tail_count(n, f) == k


def test_tail_count_too_small():
    with pytest.raises(TooFewTailObs):
        tail_count(39, 0.05)


def test_degenerate_tail():
    with pytest.raises(DegenerateTail):
        hill(clean_sample([5.0] * 10), 4)


def test_k_bigger_than_sample():
    with pytest.raises(ValueError):
        hill(clean_sample([3.0, 2.0, 1.0]), 4)


def test_log_rank_points():
    pts = log_rank_points(clean_sample([1.0, 10.0, 100.0]))
    np.testing.assert_allclose(pts[:, 0], np.log([100.0, 10.0, 1.0]))
    np.testing.assert_allclose(pts[:, 1], np.log([1, 2, 3]))


def test_recovers_exponent(rng):
    x = rng.random(200_000) ** (-1 / 2.5)
    est = hill_default(clean_sample(x))
    assert abs(est.alpha - 2.5) < 3 * est.se


positive = st.lists(st.integers(1, 10**6), min_size=40, max_size=200, unique=True).map(
    lambda v: [float(x) for x in v])


@settings(max_examples=60, deadline=None)
@given(positive, st.floats(1e-3, 1e3))
def test_scale_invariance(xs, c):
    a = hill_default(clean_sample(xs))
    b = hill_default(clean_sample(np.asarray(xs) * c))
    assert b.alpha == pytest.approx(a.alpha, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(positive, st.randoms(use_true_random=False))
def test_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert hill_default(clean_sample(ys)).alpha == hill_default(clean_sample(xs)).alpha
