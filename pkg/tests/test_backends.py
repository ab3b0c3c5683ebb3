import numpy as np
import pytest

from paretotails import _backend, _pykernels

ck = pytest.importorskip("paretotails._ckernels")


def test_active_backend_reported():
    assert _backend.BACKEND in ("cython", "python")
    assert _backend.get_kernels("python") is _pykernels
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


def test_interp_policy(table1_policy, rng):
    g, c, s = table1_policy.grid.points, table1_policy.consumption, table1_policy.mpc_theoretical
    a = rng.random(1000) * 3e4
    np.testing.assert_allclose(ck.interp_policy(a, g, c, s), _pykernels.interp_policy(a, g, c, s),
                               rtol=1e-13)


def test_policy_update(table1_model, table1_policy):
    g, c, s = table1_policy.grid.points, table1_policy.consumption, table1_policy.mpc_theoretical
    rt, bt = table1_model.detrended()
    w = table1_model.probs * bt * rt
    np.testing.assert_allclose(ck.policy_update(g, c * 1.01, s, rt, w, 2.0),
                               _pykernels.policy_update(g, c * 1.01, s, rt, w, 2.0), rtol=1e-12)


@pytest.mark.parametrize("t0", [0.2, 0.2003, 0.0])
def test_brownian_functional(rng, t0):
    z = rng.standard_normal((20, 1000))
    if t0 == 0.0:
        t0 = 1e-3
    np.testing.assert_allclose(ck.brownian_functional(z, t0), _pykernels.brownian_functional(z, t0),
                               rtol=1e-10)


def test_advance_agents(table1_model, table1_policy, rng):
    n, T = 500, 25
    pol = table1_policy
    cum = np.cumsum(table1_model.probs)[:-1]
    survive = (rng.random((T, n)) < 0.95).astype(np.uint8)
    u = rng.random((T, n))
    states = []
    for _ in range(2):
        w = 1.0 + rng.random(n) * 0 + np.linspace(1, 50, n)
        states.append((w.copy(), np.ones(n), np.zeros(n, dtype=np.int64)))
    outs = []
    for kern, (w, y, age) in zip((ck, _pykernels), states):
        cap = kern.advance_agents(w, y, age, pol.grid.points, pol.consumption, pol.mpc_theoretical,
                                  survive, u, cum, table1_model.returns, table1_model.growth, 1.0)
        outs.append((w, y, age, np.asarray(cap)))
    for x, y in zip(*outs):
        np.testing.assert_allclose(x, y, rtol=1e-12)
