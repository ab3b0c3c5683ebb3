"""Promotion-model calibration, key-value parameter files and the g sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .exponent_theory import (ShockModel, promotion_exponent_closed_form,
                              promotion_growth_for_exponent, solve_wealth_exponent)
from .ifp_solver import discretize_returns


@dataclass(frozen=True)
class PromotionParams:
    """Annualized parameters; one model period lasts ``delta_t`` years.

    ``g`` is the log income gain on promotion. When it is None it is
    implied by ``alpha_Y``.
    """

    delta_t: float = 0.25
    delta: float = 0.04
    gamma: float = 2.0
    eta: float = 0.025
    mu: float = 0.07
    sigma: float = 0.15
    L: float = 5.0
    alpha_Y: float = 3.0
    g: float | None = None
    n_nodes: int = 7

    @property
    def v(self):
        return math.exp(-self.eta * self.delta_t)

    @property
    def p(self):
        return 1.0 - math.exp(-self.delta_t / self.L)

    @property
    def beta(self):
        return math.exp(-self.delta * self.delta_t)

    @property
    def growth_gain(self):
        if self.g is not None:
            return self.g
        return promotion_growth_for_exponent(self.v, self.p, self.alpha_Y)


TABLE1 = PromotionParams()


def promotion_model(params: PromotionParams = TABLE1) -> ShockModel:
    """Quadrature returns crossed with the two-point growth law G in {1, e^g}."""
    quad = discretize_returns(params.mu, params.sigma, params.delta_t, params.n_nodes)
    p = params.p
    g_vals = np.array([1.0, math.exp(params.growth_gain)])
    g_probs = np.array([1.0 - p, p])
    returns = np.repeat(quad.returns, 2)
    growth = np.tile(g_vals, quad.n_nodes)
    probs = np.outer(quad.weights, g_probs).ravel()
    probs = probs / probs.sum()
    return ShockModel(returns=returns, growth=growth, probs=probs, v=params.v,
                      beta=params.beta, gamma=params.gamma, delta_t=params.delta_t,
                      lognormal_return=(quad.mean_log, quad.sd_log))


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` (or ``key: value``, ``key value``) lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}")
            key, value = parts
        out[key.strip()] = value.strip()
    return out


def read_key_values(path) -> dict[str, str]:
    return parse_key_values(Path(path).read_text())


_PARAM_TYPES = {f.name: f.type for f in fields(PromotionParams)}


def params_from_mapping(mapping: dict[str, str], base: PromotionParams = TABLE1) -> PromotionParams:
    """Override ``base`` with the Table-1 named keys present in ``mapping``; other keys are ignored."""
    updates = {}
    for key, value in mapping.items():
        if key not in _PARAM_TYPES:
            continue
        if key == "n_nodes":
            updates[key] = int(value)
        elif key == "g" and value.lower() in ("", "none", "auto"):
            updates[key] = None
        else:
            updates[key] = float(value)
    return replace(base, **updates)


def sweep_growth(params: PromotionParams = TABLE1, g_values=None, moments: str = "exact"):
    """alpha_Y and alpha_tilde as the promotion gain g varies, other parameters fixed.

    Returns a structured array with fields g, alpha_Y, alpha_tilde.
    """
    if g_values is None:
        g_values = np.linspace(0.02, 0.1, 81)
    g_values = np.asarray(g_values, dtype=float)
    out = np.zeros(g_values.size, dtype=[("g", float), ("alpha_Y", float), ("alpha_tilde", float)])
    for i, g in enumerate(g_values):
        model = promotion_model(replace(params, g=float(g)))
        report = solve_wealth_exponent(model, moments)
        out[i] = (g, promotion_exponent_closed_form(params.v, params.p, g), report.alpha_tilde)
    return out
