import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from paretotails.equality_test import (CriticalValueTable, hoga_statistic, inverse_hill_path,
                                       paired_samples, simulate_critical_value,
                                       simulate_functional, test_equality)
from paretotails.errors import BelowMinimumSample, TailTooShort
from paretotails.tail_stats import clean_sample

from conftest import pareto_sample


def test_inverse_hill_path_hand_example():
    s = clean_sample([8, 4, 2, 1])
    path = inverse_hill_path(s, 3, t0=2 / 3)
    np.testing.assert_allclose(path.t_grid, [2 / 3, 1.0])
    np.testing.assert_allclose(path.gamma_values, [math.log(2) / 2, math.log(2)], atol=1e-15)
    assert path.at_one == pytest.approx(math.log(2))


def test_inverse_hill_path_too_short():
    with pytest.raises(TailTooShort):
        inverse_hill_path(clean_sample([8, 4, 2, 1]), 3, t0=0.5)


def test_path_matches_direct_hill(rng):
    s = clean_sample(pareto_sample(rng, 2.0, 5000))
    path = inverse_hill_path(s, 250, 0.2)
    for m, g in zip(path.counts, path.gamma_values):
        top = s.values[:m]
        assert g == pytest.approx(np.mean(np.log(top / top[-1])), rel=1e-12, abs=1e-15)


def _oracle_statistic(pl, pc):
    """Independent evaluation: adaptive quadrature of the step integrand."""
    k, t0 = pl.k, pl.t0
    lab = {m: g for m, g in zip(pl.counts, pl.gamma_values)}
    cap = {m: g for m, g in zip(pc.counts, pc.gamma_values)}

    def d(t):
        m = math.floor(k * t + 1e-9)
        return lab[m] - cap[m]

    d1 = d(1.0)
    breaks = [m / k for m in range(math.floor(k * t0) + 1, k)]
    den = 0.0
    edges = [t0] + breaks + [1.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        den += quad(lambda t: t * t * (d(mid) - d1) ** 2, lo, hi, epsabs=0, epsrel=1e-13)[0]
    return d1 * d1, den


def test_statistic_matches_quadrature_oracle(rng):
    lab = clean_sample(pareto_sample(rng, 2.0, 2000))
    cap = clean_sample(pareto_sample(rng, 1.5, 2000))
    for t0 in (0.2, 0.33):
        pl, pc = inverse_hill_path(lab, 100, t0), inverse_hill_path(cap, 100, t0)
        stat = hoga_statistic(pl, pc)
        num, den = _oracle_statistic(pl, pc)
        assert stat.numerator == pytest.approx(num, rel=1e-12)
        assert stat.denominator == pytest.approx(den, rel=1e-10)


def test_identical_samples_degenerate():
    s = clean_sample(np.arange(1.0, 101.0))
    p = inverse_hill_path(s, 50, 0.2)
    stat = hoga_statistic(p, p)
    assert stat.value == 0.0 and stat.degenerate == "zero"


def test_scaled_copy_gives_zero_statistic(rng):
    s = clean_sample(pareto_sample(rng, 2.0, 1000))
    res = test_equality(s, s.scaled(7.0), fraction=0.05)
    assert res.statistic == pytest.approx(0.0, abs=1e-12) or res.degenerate == "zero"
    assert not res.reject


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 50.0))
def test_swap_symmetry_and_scale_invariance(seed, c):
    r = np.random.default_rng(seed)
    lab = clean_sample(pareto_sample(r, 2.0, 1200))
    cap = clean_sample(pareto_sample(r, 2.5, 1200))
    a = test_equality(lab, cap, cv=55.44)
    b = test_equality(cap, lab, cv=55.44)
    c_ = test_equality(lab.scaled(c), cap, cv=55.44)
    assert a.statistic == pytest.approx(b.statistic, rel=1e-9)
    assert a.statistic == pytest.approx(c_.statistic, rel=1e-7)


def test_shared_k_from_capital(rng):
    lab = clean_sample(pareto_sample(rng, 2.0, 10_000))
    cap = clean_sample(pareto_sample(rng, 2.0, 4000))
    assert test_equality(lab, cap).k_used == 200


def test_nmin():
    s = clean_sample(np.arange(1.0, 101.0))
    with pytest.raises(BelowMinimumSample):
        test_equality(s, s, nmin=500)


def test_paired_samples_restriction():
    lab, cap = paired_samples([1, 2, 3, 4], [0, 5, float("nan"), 1])
    assert lab.values.tolist() == [4.0, 2.0]
    lab_all, _ = paired_samples([1, 2, 3, 4], [0, 5, float("nan"), 1], False)
    assert lab_all.n_pos == 4


def test_critical_value_table_roundtrip(tmp_path):
    t = CriticalValueTable()
    assert t.lookup() == 55.44 and t.provenance(0.2, 0.05) == "published"
    t.add(0.2, 0.05, 60.0)  # pinned entry is not overwritten
    assert t.lookup() == 55.44
    t.add(0.3, 0.1, 30.5)
    t.save(tmp_path / "cv.txt")
    u = CriticalValueTable.load(tmp_path / "cv.txt")
    assert u.items() == t.items()
    with pytest.raises(KeyError):
        u.lookup(0.4, 0.05, simulate_missing=False)


def test_functional_reproducible_and_backend_free():
    a = simulate_functional(0.2, n_paths=300, n_steps=500, seed=3, block_size=100)
    b = simulate_functional(0.2, n_paths=300, n_steps=500, seed=3, block_size=100, workers=3)
    c = simulate_functional(0.2, n_paths=300, n_steps=500, seed=3, block_size=100,
                            backend="python")
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a, c, rtol=1e-10)
    assert np.all(a > 0)


def test_small_critical_value_in_range():
    cv = simulate_critical_value(0.2, 0.05, n_paths=5000, n_steps=1000, seed=1)
    assert 45 < cv < 67


def test_rejects_different_exponents(rng):
    lab = clean_sample(pareto_sample(rng, 3.0, 100_000))
    cap = clean_sample(pareto_sample(rng, 1.5, 100_000))
    res = test_equality(lab, cap)
    assert res.reject and res.alpha_lab > res.alpha_cap
