"""Policy iteration for the detrended income fluctuation problem.

State is normalized wealth a (wealth including current income, over
income). With R_tilde = R/G and beta_tilde = beta G^(1-gamma) the policy
solves

    c(a) = min{(E[beta_tilde R_tilde c(a')^-gamma])^(-1/gamma), a},
    a' = R_tilde (a - c(a)) + 1.

``solve_policy`` iterates this map directly (fast, no root finding, no
convergence guarantee) and falls back to time iteration with a per-point
root solve when it does not converge.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _backend
from .errors import ExistenceConditionError, InfeasibleGrid, NoConvergence
from .exponent_theory import ShockModel, asymptotic_mpc, check_existence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WealthGrid:
    points: np.ndarray
    count: int
    max: float
    median_target: float

    @property
    def median_index(self):
        return (self.count - 1) // 2


def build_grid(count: int = 100, max: float = 1e4, median_target: float = 10.0) -> WealthGrid:
    """0 followed by s (exp(i h) - 1), with s, h set so the middle and last points hit the anchors."""
    if count < 3:
        raise InfeasibleGrid("need at least 3 grid points")
    if not 0 < median_target < max:
        raise InfeasibleGrid(f"median target {median_target} must lie in (0, {max})")
    n_top = count - 1
    n_mid = (count - 1) // 2
    ratio = max / median_target
    linear_ratio = n_top / n_mid
    i = np.arange(count, dtype=float)
    if math.isclose(ratio, linear_ratio, rel_tol=1e-12):
        points = max * i / n_top
    elif ratio < linear_ratio:
        raise InfeasibleGrid("anchors would need a concave grid (no positive scale)")
    else:
        # (e^{N h} - 1) / (e^{M h} - 1) is increasing in h from N/M to infinity
        def gap(h):
            return (math.expm1(n_top * h) / math.expm1(n_mid * h)) - ratio

        hi = 1.0
        while gap(hi) < 0:
            hi *= 2.0
        h = brentq(gap, 1e-12, hi, xtol=1e-15, rtol=1e-15)
        scale = max / math.expm1(n_top * h)
        points = scale * np.expm1(h * i)
        points[-1] = max
    points[0] = 0.0
    return WealthGrid(points=points, count=count, max=float(max),
                      median_target=float(median_target))


@dataclass(frozen=True)
class QuadratureSpec:
    n_nodes: int
    mean_log: float
    sd_log: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def returns(self):
        return np.exp(self.nodes)


def discretize_returns(mu: float, sigma: float, delta_t: float, n_nodes: int = 7) -> QuadratureSpec:
    """Gauss-Hermite nodes for log R ~ N((mu - sigma^2/2) dt, sigma^2 dt).

    ``nodes`` are values of log R; ``weights`` sum to one.
    """
    if sigma <= 0 or delta_t <= 0:
        raise ValueError("sigma and delta_t must be positive")
    if n_nodes < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.hermite_e.hermegauss(n_nodes)
    w = w / w.sum()
    mean_log = (mu - 0.5 * sigma * sigma) * delta_t
    sd_log = sigma * math.sqrt(delta_t)
    return QuadratureSpec(n_nodes=n_nodes, mean_log=mean_log, sd_log=sd_log,
                          nodes=mean_log + sd_log * x, weights=w)


@dataclass(frozen=True)
class PolicySolution:
    grid: WealthGrid
    consumption: np.ndarray
    iterations: int
    sup_change: float
    mpc_theoretical: float
    converged: bool = True
    method: str = "fixed_point"

    def __call__(self, a):
        return _backend.kernels.interp_policy(a, self.grid.points, self.consumption,
                                              self.mpc_theoretical)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a_tilde", "c_tilde"])
            for a, c in zip(self.grid.points, self.consumption):
                w.writerow([f"{a:.6g}", f"{c:.6g}"])


def _euler_terms(model):
    rt, bt = model.detrended()
    return rt, model.probs * bt * rt


def initial_policy(grid: WealthGrid, mpc: float) -> np.ndarray:
    a = grid.points
    return np.minimum(a, 1.0 + mpc * a)


def solve_policy(model: ShockModel, grid: WealthGrid | None = None, tol: float = 1e-10,
                 max_iter: int = 10_000, enforce_existence: bool = True, fallback: bool = True,
                 fallback_max_iter: int = 10_000, backend: str | None = None) -> PolicySolution:
    """Iterate the consumption update map on ``grid`` until the sup-norm change is below ``tol``.

    Raises ``ExistenceConditionError`` before iterating when
    beta E[G^(1-gamma)] < 1 and beta E[R G^(-gamma)] < 1 fail, unless
    ``enforce_existence`` is False. That condition is only sufficient; with
    it disabled, convergence is the check. If the map stalls, time
    iteration takes over from the last iterate when ``fallback`` is set.
    """
    grid = grid or build_grid()
    check = check_existence(model)
    if not check.ok:
        msg = (f"existence condition fails: beta E[G^(1-gamma)] = {check.beta_growth_moment:.6g}, "
               f"beta E[R G^-gamma] = {check.beta_return_moment:.6g}")
        if enforce_existence:
            raise ExistenceConditionError(msg)
        log.warning("%s; solving anyway", msg)
    kern = _backend.get_kernels(backend)
    mpc = asymptotic_mpc(model, "discrete")
    rt, weights = _euler_terms(model)
    a = grid.points
    c = initial_policy(grid, mpc)
    sup = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        c_new = kern.policy_update(a, c, mpc, rt, weights, model.gamma)
        sup = float(np.max(np.abs(c_new - c)))
        c = c_new
        if not np.isfinite(sup):
            break
        if sup < tol:
            return PolicySolution(grid, c, it, sup, mpc)
    if not fallback:
        raise NoConvergence(f"no convergence after {it} iterations (sup change {sup:.3g})",
                            iterations=it, sup_change=sup)
    log.info("fixed-point map stalled (sup change %.3g); switching to time iteration", sup)
    start = c if np.all(np.isfinite(c)) else None
    return time_iteration(model, grid, tol=tol, max_iter=fallback_max_iter, start=start)


def time_iteration(model: ShockModel, grid: WealthGrid | None = None, tol: float = 1e-10,
                   max_iter: int = 10_000, start: np.ndarray | None = None,
                   bisection_steps: int = 60) -> PolicySolution:
    """Time iteration: at each grid point solve the Euler equation for c in (0, a].

    The root solve is a bisection vectorized over grid points; the Euler
    gap is monotone in c so the bracket (0, a] always contains the answer
    when the constraint does not bind.
    """
    grid = grid or build_grid()
    mpc = asymptotic_mpc(model, "discrete")
    rt, weights = _euler_terms(model)
    gam = model.gamma
    interp = _backend.kernels.interp_policy
    a = grid.points
    c = initial_policy(grid, mpc) if start is None else np.array(start, dtype=float)
    pos = a > 0
    ap = a[pos]

    def rhs(cand, cons):
        a_next = rt[None, :] * (ap - cand)[:, None] + 1.0
        return (weights[None, :] * interp(a_next, a, cons, mpc) ** (-gam)).sum(axis=1)

    sup = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        binds = ap ** (-gam) >= rhs(ap, c)
        lo = np.zeros_like(ap)
        hi = ap.copy()
        for _ in range(bisection_steps):
            mid = 0.5 * (lo + hi)
            # Euler gap c^-gamma - E[...] is decreasing in c
            positive = mid ** (-gam) > rhs(mid, c)
            lo = np.where(positive, mid, lo)
            hi = np.where(positive, hi, mid)
        c_new = c.copy()
        c_new[pos] = np.where(binds, ap, 0.5 * (lo + hi))
        c_new[~pos] = 0.0
        sup = float(np.max(np.abs(c_new - c)))
        c = c_new
        if sup < tol:
            return PolicySolution(grid, c, it, sup, mpc, True, "time_iteration")
    raise NoConvergence(f"time iteration did not converge after {it} iterations "
                        f"(sup change {sup:.3g})", iterations=it, sup_change=sup)


def euler_residuals(solution: PolicySolution, model: ShockModel) -> np.ndarray:
    """Relative Euler-equation errors in consumption units at each grid point.

    residual_i = (c_i - min{(E[beta_tilde R_tilde c(a')^-gamma])^(-1/gamma), a_i}) / c_i,
    zero at a = 0 and wherever the borrowing constraint binds on both sides.
    """
    rt, weights = _euler_terms(model)
    gam = model.gamma
    a = solution.grid.points
    c = solution.consumption
    a_next = rt[None, :] * (a - c)[:, None] + 1.0
    c_next = _backend.kernels.interp_policy(a_next, a, c, solution.mpc_theoretical)
    target = np.minimum((weights[None, :] * c_next ** (-gam)).sum(axis=1) ** (-1.0 / gam), a)
    res = np.zeros_like(a)
    pos = c > 0
    res[pos] = (c[pos] - target[pos]) / c[pos]
    return res
