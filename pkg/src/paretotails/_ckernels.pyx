# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``; same signatures and results."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, ceil, fmax, fmin

cnp.import_array()


cdef inline double _interp(double a, const double[:] grid, const double[:] cons,
                           double slope) noexcept nogil:
    cdef Py_ssize_t n = grid.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if a >= grid[n - 1]:
        return cons[n - 1] + slope * (a - grid[n - 1])
    if a <= grid[0]:
        return cons[0]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if grid[mid] <= a:
            lo = mid
        else:
            hi = mid
    return cons[lo] + (cons[hi] - cons[lo]) * (a - grid[lo]) / (grid[hi] - grid[lo])


def interp_policy(a, grid, cons, double slope):
    cdef const double[:] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef const double[:] c = np.ascontiguousarray(cons, dtype=np.float64)
    arr = np.asarray(a, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    out = np.empty_like(flat)
    cdef const double[:] x = flat
    cdef double[:] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(x.shape[0]):
            o[i] = _interp(x[i], g, c, slope)
    return out.reshape(arr.shape)


def policy_update(grid, cons, double slope, rtilde, weights, double gamma):
    cdef const double[:] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef const double[:] c = np.ascontiguousarray(cons, dtype=np.float64)
    cdef const double[:] rt = np.ascontiguousarray(rtilde, dtype=np.float64)
    cdef const double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    out = np.empty(g.shape[0])
    cdef double[:] o = out
    cdef Py_ssize_t i, s
    cdef double saving, expect, cn
    # libm pow with a runtime exponent dominates; gamma = 2 is the common case
    cdef bint square = gamma == 2.0
    with nogil:
        for i in range(g.shape[0]):
            saving = g[i] - c[i]
            expect = 0.0
            for s in range(rt.shape[0]):
                cn = _interp(rt[s] * saving + 1.0, g, c, slope)
                if square:
                    expect += w[s] / (cn * cn)
                else:
                    expect += w[s] * pow(cn, -gamma)
            if square:
                o[i] = fmin(1.0 / sqrt(expect), g[i])
            else:
                o[i] = fmin(pow(expect, -1.0 / gamma), g[i])
    return out


def brownian_functional(z, double t0):
    cdef const double[:, :] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n_paths = zz.shape[0], n = zz.shape[1]
    out = np.empty(n_paths)
    cdef double[:] o = out
    cdef Py_ssize_t i, j, j0
    cdef double scale = 1.0 / sqrt(<double>n), inv_n = 1.0 / n
    cdef double w, w1, b, prev, integral, t
    j0 = <Py_ssize_t>ceil(t0 * n - 1e-9)
    with nogil:
        for i in range(n_paths):
            w1 = 0.0
            for j in range(n):
                w1 += zz[i, j]
            w1 *= scale
            w = 0.0
            integral = 0.0
            prev = 0.0
            # W(t_j) after j increments; t_j = j / n
            for j in range(n + 1):
                if j > 0:
                    w += zz[i, j - 1] * scale
                if j < j0:
                    continue
                t = j * inv_n
                b = w - t * w1
                b = b * b
                if j == j0:
                    integral += b * (t - t0)
                else:
                    integral += 0.5 * (b + prev) * inv_n
                prev = b
            o[i] = w1 * w1 / integral
    return out


def advance_agents(double[:] wealth, double[:] income, cnp.int64_t[:] age, grid, cons,
                   double slope, survive, u_state, cum_probs, state_returns, state_growth,
                   double newborn_wealth):
    cdef const double[:] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef const double[:] c = np.ascontiguousarray(cons, dtype=np.float64)
    cdef const cnp.uint8_t[:, :] sv = np.ascontiguousarray(survive, dtype=np.uint8)
    cdef const double[:, :] us = np.ascontiguousarray(u_state, dtype=np.float64)
    cdef const double[:] cum = np.ascontiguousarray(cum_probs, dtype=np.float64)
    cdef const double[:] rs = np.ascontiguousarray(state_returns, dtype=np.float64)
    cdef const double[:] gs = np.ascontiguousarray(state_growth, dtype=np.float64)
    cdef Py_ssize_t n = wealth.shape[0], periods = sv.shape[0], n_cut = cum.shape[0]
    cap_arr = np.zeros(n)
    cdef double[:] cap = cap_arr
    cdef Py_ssize_t i, t, k
    cdef double saving, r, u
    with nogil:
        for t in range(periods):
            for i in range(n):
                if sv[t, i]:
                    # first state whose cumulative probability exceeds u
                    u = us[t, i]
                    k = 0
                    while k < n_cut and u >= cum[k]:
                        k += 1
                    r = rs[k]
                    saving = wealth[i] - _interp(wealth[i], g, c, slope)
                    cap[i] = fmax(r - 1.0, 0.0) * income[i] * saving
                    wealth[i] = (r / gs[k]) * saving + 1.0
                    income[i] = income[i] * gs[k]
                    age[i] = age[i] + 1
                else:
                    cap[i] = 0.0
                    wealth[i] = newborn_wealth
                    income[i] = 1.0
                    age[i] = 0
    return cap_arr
