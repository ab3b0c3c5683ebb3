"""Theoretical Pareto exponents of income and wealth in the savings model.

Income growth G and gross return R are iid over time. With survival
probability v the income exponent solves v E[G^z] = 1 and the normalized
wealth exponent solves v E[H^z] = 1 with H = rho R / G, where
rho = min{(E[beta R^(1-gamma)])^(1/gamma), 1}. Wealth and capital income
inherit min{alpha_tilde, alpha_Y}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import AssumptionViolated, NoRoot, Unbounded

# bracket scan z = 2^j * 1e-3, j = 0..24
_SCAN = 1e-3 * 2.0 ** np.arange(25)


@dataclass(frozen=True)
class ShockModel:
    """Joint discrete law of (R, G) plus preferences and survival.

    ``lognormal_return = (mean_log, sd_log)`` declares that R is lognormal and
    independent of G; the discrete ``returns`` are then a quadrature of it and
    exact moments are available through ``moments="exact"``.
    """

    returns: np.ndarray
    growth: np.ndarray
    probs: np.ndarray
    v: float
    beta: float
    gamma: float
    delta_t: float = 1.0
    lognormal_return: tuple[float, float] | None = None

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.returns, dtype=float))
        g = np.atleast_1d(np.asarray(self.growth, dtype=float))
        p = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if not r.shape == g.shape == p.shape:
            raise ValueError("returns, growth and probs must have equal length")
        if np.any(r <= 0) or np.any(g <= 0):
            raise ValueError("R and G must be positive")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if not 0 < self.v < 1:
            raise ValueError("survival probability v must lie in (0, 1)")
        if self.beta <= 0 or self.gamma <= 0:
            raise ValueError("beta and gamma must be positive")
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "growth", g)
        object.__setattr__(self, "probs", p)

    @property
    def n_states(self):
        return self.probs.size

    def growth_marginal(self):
        vals, inv = np.unique(self.growth, return_inverse=True)
        return vals, np.bincount(inv, weights=self.probs)

    def return_marginal(self):
        vals, inv = np.unique(self.returns, return_inverse=True)
        return vals, np.bincount(inv, weights=self.probs)

    def detrended(self):
        """(R_tilde, beta_tilde) per state: R/G and beta G^(1-gamma)."""
        return self.returns / self.growth, self.beta * self.growth ** (1.0 - self.gamma)

    def with_growth(self, growth_fn):
        """Copy with each growth state replaced by ``growth_fn(G)``."""
        return ShockModel(self.returns, growth_fn(self.growth), self.probs, self.v,
                          self.beta, self.gamma, self.delta_t, self.lognormal_return)


def deterministic_model(R, G, v, beta, gamma, delta_t=1.0):
    return ShockModel(np.array([R]), np.array([G]), np.array([1.0]), v, beta, gamma, delta_t)


def log_moment(model: ShockModel, a: float, b: float, moments: str = "discrete") -> float:
    """log E[R^a G^b] under the discrete law or with exact lognormal R."""
    if moments == "exact":
        if model.lognormal_return is None:
            raise ValueError("exact moments need a lognormal return declaration")
        m, s = model.lognormal_return
        gv, gp = model.growth_marginal()
        log_r = a * m + 0.5 * a * a * s * s
        return log_r + float(logsumexp(b * np.log(gv), b=gp))
    if moments != "discrete":
        raise ValueError(f"unknown moment backend {moments!r}")
    expo = a * np.log(model.returns) + b * np.log(model.growth)
    return float(logsumexp(expo, b=model.probs))


def _default_backend(model):
    return "exact" if model.lognormal_return is not None else "discrete"


@dataclass(frozen=True)
class ExistenceCheck:
    ok: bool
    beta_growth_moment: float
    beta_return_moment: float

    def __bool__(self):
        return self.ok


def check_existence(model: ShockModel, moments: str = "discrete") -> ExistenceCheck:
    """beta E[G^(1-gamma)] < 1 and beta E[R G^(-gamma)] < 1 (sufficient for a unique solution)."""
    gam = model.gamma
    m1 = model.beta * math.exp(log_moment(model, 0.0, 1.0 - gam, moments))
    m2 = model.beta * math.exp(log_moment(model, 1.0, -gam, moments))
    return ExistenceCheck(ok=(m1 < 1.0 and m2 < 1.0), beta_growth_moment=m1,
                          beta_return_moment=m2)


def discount_return_moment(model: ShockModel, moments: str | None = None) -> float:
    """E[beta R^(1-gamma)]."""
    moments = moments or _default_backend(model)
    return model.beta * math.exp(log_moment(model, 1.0 - model.gamma, 0.0, moments))


def asymptotic_mpc(model: ShockModel, moments: str | None = None) -> float:
    """Limit of c(a)/a as a -> infinity: 1 - (E[beta R^(1-gamma)])^(1/gamma), or 0."""
    m = discount_return_moment(model, moments)
    if m < 1.0:
        return 1.0 - m ** (1.0 / model.gamma)
    return 0.0


def contraction_factor(model: ShockModel, moments: str | None = None) -> float:
    """rho = min{(E[beta R^(1-gamma)])^(1/gamma), 1}."""
    return min(discount_return_moment(model, moments) ** (1.0 / model.gamma), 1.0)


def _positive_root(f, xtol=1e-15, max_iter=200):
    """Unique positive root of a convex f with f(0) < 0, or None if f < 0 on the scan."""
    lo = 0.0
    hi = None
    for z in _SCAN:
        fz = f(z)
        if math.isnan(fz) or math.isinf(fz):
            raise Unbounded(f"moment diverged at z = {z}")
        if fz > 0:
            hi = z
            break
        lo = z
    if hi is None:
        return None
    flo, fhi = f(lo), f(hi)
    # bisection with a regula falsi proposal when it stays well inside the bracket
    for _ in range(max_iter):
        width = hi - lo
        if width <= xtol * max(1.0, hi):
            break
        z = lo - flo * width / (fhi - flo)
        if not lo + 0.1 * width < z < hi - 0.1 * width:
            z = 0.5 * (lo + hi)
        fz = f(z)
        if fz == 0.0:
            return z
        if fz < 0:
            lo, flo = z, fz
        else:
            hi, fhi = z, fz
    return lo if abs(flo) < abs(fhi) else hi


def solve_income_exponent(model: ShockModel, moments: str | None = None) -> float:
    """alpha_Y: the positive root of v E[G^z] = 1."""
    moments = moments or _default_backend(model)
    if not np.any((model.growth > 1.0) & (model.probs > 0)):
        raise NoRoot("Pr(G > 1) = 0; income has no Pareto tail")
    log_v = math.log(model.v)
    root = _positive_root(lambda z: log_v + log_moment(model, 0.0, z, moments))
    if root is None:
        raise NoRoot("v E[G^z] < 1 over the whole search range")
    return float(root)


@dataclass(frozen=True)
class ExponentReport:
    alpha_Y: float
    alpha_tilde: float
    alpha_wealth: float
    rho: float
    mpc: float
    wealth_bounded: bool = False
    diagnostics: dict = field(default_factory=dict)


def solve_wealth_exponent(model: ShockModel, moments: str | None = None) -> ExponentReport:
    """alpha_tilde from v E[(rho R/G)^z] = 1, alpha_Y, and their minimum.

    ``alpha_tilde`` is inf with ``wealth_bounded`` set when the equation has no
    positive root; ``alpha_Y`` is inf when income has no Pareto tail.
    """
    moments = moments or _default_backend(model)
    rho = contraction_factor(model, moments)
    log_v, log_rho = math.log(model.v), math.log(rho)

    def f_wealth(z):
        return log_v + z * log_rho + log_moment(model, z, -z, moments)

    def f_income(z):
        return log_v + log_moment(model, 0.0, z, moments)

    h = rho * model.returns / model.growth
    bounded = False
    if not np.any((h > 1.0) & (model.probs > 0)) and moments == "discrete":
        alpha_tilde, bounded = math.inf, True
    else:
        root = _positive_root(f_wealth)
        if root is None:
            alpha_tilde, bounded = math.inf, True
        else:
            alpha_tilde = float(root)
    try:
        alpha_y = solve_income_exponent(model, moments)
    except NoRoot:
        alpha_y = math.inf
    diagnostics = {"moments": moments}
    if math.isfinite(alpha_tilde):
        diagnostics["wealth_residual"] = math.expm1(f_wealth(alpha_tilde))
    if math.isfinite(alpha_y):
        diagnostics["income_residual"] = math.expm1(f_income(alpha_y))
    return ExponentReport(alpha_Y=alpha_y, alpha_tilde=alpha_tilde,
                          alpha_wealth=min(alpha_tilde, alpha_y), rho=rho,
                          mpc=asymptotic_mpc(model, moments), wealth_bounded=bounded,
                          diagnostics=diagnostics)


def promotion_exponent_closed_form(v: float, p: float, g: float) -> float:
    """alpha_Y = log((1 - v + v p) / (v p)) / g for the two-point promotion process."""
    if not (0 < v < 1 and 0 < p <= 1 and g > 0):
        raise ValueError("need v in (0,1), p in (0,1], g > 0")
    return math.log((1.0 - v + v * p) / (v * p)) / g


def promotion_growth_for_exponent(v: float, p: float, alpha_y: float) -> float:
    """The promotion log growth g that yields income exponent ``alpha_y``."""
    if alpha_y <= 0:
        raise ValueError("alpha_y must be positive")
    return math.log((1.0 - v + v * p) / (v * p)) / alpha_y


def example1_exponents(delta: float | None, gamma: float, eta: float, r: float, g: float,
                       ) -> tuple[float, float]:
    """(alpha_cap, alpha_lab) with constant growth g, risk-free r, death rate eta.

    ``delta`` is the discount rate; ``None`` means delta = eta, the case in
    which alpha_cap = eta gamma / (r - eta - g gamma) for r > eta + 2 g gamma.
    Returns inf for alpha_cap when wealth is bounded.
    """
    if delta is None:
        delta = eta
    if -delta + r * (1.0 - gamma) >= 0:
        raise AssumptionViolated("need -delta + r (1 - gamma) < 0 so that beta R^(1-gamma) < 1")
    if g <= 0 or eta <= 0:
        raise ValueError("g and eta must be positive")
    alpha_lab = eta / g
    if r <= delta + 2.0 * g * gamma:
        return alpha_lab, alpha_lab
    denom = r - delta - g * gamma
    alpha_cap = eta * gamma / denom if denom > 0 else math.inf
    return min(alpha_cap, alpha_lab), alpha_lab


def example1_model(delta: float | None, gamma: float, eta: float, r: float, g: float,
                   delta_t: float = 1.0) -> ShockModel:
    """The degenerate ShockModel matching ``example1_exponents``."""
    if delta is None:
        delta = eta
    return deterministic_model(R=math.exp(r * delta_t), G=math.exp(g * delta_t),
                               v=math.exp(-eta * delta_t), beta=math.exp(-delta * delta_t),
                               gamma=gamma, delta_t=delta_t)
