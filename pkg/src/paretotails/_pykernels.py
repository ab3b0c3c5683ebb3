"""Pure numpy implementations of the hot kernels.

Signatures mirror ``_ckernels.pyx`` exactly; see ``_backend`` for selection.
"""

import numpy as np


def interp_policy(a, grid, cons, slope):
    """Piecewise-linear policy on ``grid``, linear with ``slope`` above the top node."""
    a = np.asarray(a, dtype=float)
    out = np.interp(a, grid, cons)
    above = a > grid[-1]
    if np.any(above):
        out = np.where(above, cons[-1] + slope * (a - grid[-1]), out)
    return out


def policy_update(grid, cons, slope, rtilde, weights, gamma):
    """One pass of c(a) = min{(sum_s w_s c(a'_s)^-gamma)^(-1/gamma), a}.

    ``weights[s]`` is prob_s * beta_tilde_s * R_tilde_s and
    ``a'_s = R_tilde_s (a - c(a)) + 1``.
    """
    saving = grid - cons
    a_next = rtilde[None, :] * saving[:, None] + 1.0
    c_next = interp_policy(a_next, grid, cons, slope)
    expect = (weights[None, :] * c_next ** (-gamma)).sum(axis=1)
    return np.minimum(expect ** (-1.0 / gamma), grid)


def brownian_functional(z, t0):
    """W(1)^2 / int_{t0}^1 (W(t) - t W(1))^2 dt for each row of standard normals.

    Row ``i`` of ``z`` holds the n_steps increments of one path, scaled by
    sqrt(n_steps) internally. The integral is trapezoidal on the step grid.
    """
    z = np.asarray(z, dtype=float)
    n_paths, n = z.shape
    w = np.cumsum(z, axis=1) / np.sqrt(n)
    w1 = w[:, -1]
    j0 = int(np.ceil(t0 * n - 1e-9))
    t = np.arange(j0, n + 1) / n
    if j0 == 0:
        wpath = np.concatenate([np.zeros((n_paths, 1)), w], axis=1)
    else:
        wpath = w[:, j0 - 1:]
    bridge = (wpath - t[None, :] * w1[:, None]) ** 2
    integral = (bridge[:, 1:] + bridge[:, :-1]).sum(axis=1) * (0.5 / n)
    # partial first cell when t0 is off the step grid
    integral += bridge[:, 0] * (t[0] - t0)
    return w1 * w1 / integral


def advance_agents(wealth, income, age, grid, cons, slope, survive, u_state, cum_probs,
                   state_returns, state_growth, newborn_wealth):
    """Advance a block of agents through ``survive.shape[0]`` periods in place.

    ``survive`` and ``u_state`` are (periods, agents). A surviving agent takes
    the first state whose entry in ``cum_probs`` (cumulative probabilities
    without the final 1) exceeds its uniform draw. Dead agents are replaced
    by newborns with income 1, normalized wealth ``newborn_wealth`` and age 0.
    Returns the capital income max(R - 1, 0) Y (a - c(a)) of the final
    period, zero for newborns.
    """
    cap = np.zeros(wealth.shape[0])
    for t in range(survive.shape[0]):
        alive = survive[t].astype(bool)
        k = np.searchsorted(cum_probs, u_state[t], side="right")
        r = state_returns[k]
        g = state_growth[k]
        saving = wealth - interp_policy(wealth, grid, cons, slope)
        cap = np.where(alive, np.maximum(r - 1.0, 0.0) * income * saving, 0.0)
        wealth[:] = np.where(alive, (r / g) * saving + 1.0, newborn_wealth)
        income[:] = np.where(alive, income * g, 1.0)
        age[:] = np.where(alive, age + 1, 0)
    return cap
