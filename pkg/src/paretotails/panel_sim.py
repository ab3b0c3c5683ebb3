"""Perpetual-youth Monte Carlo panel for the savings model.

Each period an agent survives with probability v. Survivors draw (R, G),
consume c(a) Y and carry normalized wealth a' = (R/G)(a - c(a)) + 1; the
dead are replaced by newborns with Y = 1. Agents never interact, so the
population is split into fixed blocks simulated independently, block ``b``
drawing from ``SeedSequence(seed, spawn_key=(b,))``.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import EmptySample, NotStationary
from .exponent_theory import ShockModel
from .ifp_solver import PolicySolution
from .tail_stats import clean_sample, hill_default

VARIABLES = ("income", "norm_wealth", "wealth", "capital_income")


@dataclass(frozen=True)
class AgentState:
    income: float
    norm_wealth: float
    age: int


@dataclass(frozen=True)
class CrossSection:
    income: np.ndarray
    norm_wealth: np.ndarray
    capital_income: np.ndarray
    age: np.ndarray
    periods_elapsed: int = 0
    seed: int | None = None

    @property
    def n_agents(self):
        return self.income.size

    @property
    def wealth(self):
        return self.income * self.norm_wealth

    def agent(self, i) -> AgentState:
        return AgentState(float(self.income[i]), float(self.norm_wealth[i]), int(self.age[i]))

    def variable(self, name):
        if name not in VARIABLES:
            raise ValueError(f"unknown variable {name!r}; expected one of {VARIABLES}")
        return getattr(self, name)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["agent_id", "age", "income", "wealth", "capital_income", "norm_wealth"])
            wealth = self.wealth
            for i in range(self.n_agents):
                w.writerow([i, int(self.age[i]), f"{self.income[i]:.6g}", f"{wealth[i]:.6g}",
                            f"{self.capital_income[i]:.6g}", f"{self.norm_wealth[i]:.6g}"])


def newborn_panel(n_agents, newborn_wealth=1.0, seed=None):
    return CrossSection(income=np.ones(n_agents),
                        norm_wealth=np.full(n_agents, float(newborn_wealth)),
                        capital_income=np.zeros(n_agents),
                        age=np.zeros(n_agents, dtype=np.int64), seed=seed)


@dataclass(frozen=True)
class ShockDraws:
    """Uniform draws for ``periods`` x ``agents``: survival flags and state uniforms.

    The (R, G) state of a survivor is the first state whose cumulative
    probability exceeds its uniform; ``state_index`` recovers it.
    """

    survive: np.ndarray
    u_state: np.ndarray

    def state_index(self, model: ShockModel):
        return np.searchsorted(_cum_cut(model), self.u_state, side="right")

    def returns(self, model: ShockModel):
        return model.returns[self.state_index(model)]

    def growth(self, model: ShockModel):
        return model.growth[self.state_index(model)]


def _cum_cut(model):
    return np.cumsum(model.probs)[:-1]


def draw_shocks(model: ShockModel, rng: np.random.Generator, periods: int, n: int) -> ShockDraws:
    survive = (rng.random((periods, n)) < model.v).astype(np.uint8)
    return ShockDraws(survive, rng.random((periods, n)))


def step_panel(panel: CrossSection, policy: PolicySolution, model: ShockModel,
               rng: np.random.Generator, newborn_wealth: float = 1.0,
               return_shocks: bool = False, backend: str | None = None):
    """Advance every agent one period. Returns the new cross-section (and the shocks used)."""
    shocks = draw_shocks(model, rng, 1, panel.n_agents)
    new = advance(panel, policy, model, shocks, newborn_wealth, backend)
    return (new, shocks) if return_shocks else new


def advance(panel: CrossSection, policy: PolicySolution, model: ShockModel, shocks: ShockDraws,
            newborn_wealth: float = 1.0, backend: str | None = None) -> CrossSection:
    """Apply pre-drawn shocks to a copy of ``panel``."""
    kern = _backend.get_kernels(backend)
    wealth = panel.norm_wealth.astype(float, copy=True)
    income = panel.income.astype(float, copy=True)
    age = panel.age.astype(np.int64, copy=True)
    periods = shocks.survive.shape[0]
    if periods == 0:
        return panel
    cap = kern.advance_agents(wealth, income, age, policy.grid.points, policy.consumption,
                              policy.mpc_theoretical, shocks.survive, shocks.u_state,
                              _cum_cut(model), model.returns, model.growth,
                              float(newborn_wealth))
    return CrossSection(income, wealth, np.asarray(cap), age,
                        panel.periods_elapsed + periods, panel.seed)


def _simulate_block(model, policy, seed, block, size, burn_in, snapshot, newborn_wealth,
                    chunk, backend):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    panel = newborn_panel(size, newborn_wealth, seed)
    mid_income = None
    done = 0
    while done < burn_in:
        stop = min(burn_in, done + chunk)
        if done < snapshot < stop:
            stop = snapshot
        shocks = draw_shocks(model, rng, stop - done, size)
        panel = advance(panel, policy, model, shocks, newborn_wealth, backend)
        done = stop
        if done == snapshot:
            mid_income = panel.income.copy()
    return panel, mid_income


@dataclass(frozen=True)
class StationarityDiagnostic:
    alpha_mid: float
    alpha_end: float
    joint_se: float

    @property
    def passed(self):
        return abs(self.alpha_end - self.alpha_mid) < 2.0 * self.joint_se


def simulate_stationary(model: ShockModel, policy: PolicySolution, n_agents: int = 10**5,
                        burn_in: int = 2000, seed: int = 0, newborn_wealth: float = 1.0,
                        block_size: int = 4096,
                        workers: int = 1, chunk: int = 100, backend: str | None = None,
                        ) -> tuple[CrossSection, StationarityDiagnostic]:
    """Simulate ``burn_in`` periods from an all-newborn population.

    The result depends only on (seed, n_agents, burn_in, block_size), not on
    ``workers``. Warns ``NotStationary`` when the income Hill exponent at
    ``burn_in // 2`` and at ``burn_in`` differ by 2 joint standard errors or more.
    """
    if n_agents < 1000:
        raise ValueError("n_agents must be at least 1000")
    if burn_in < 2:
        raise ValueError("burn_in must be at least 2")
    n_blocks = -(-n_agents // block_size)
    snapshot = burn_in // 2

    def run(b):
        size = min(block_size, n_agents - b * block_size)
        return _simulate_block(model, policy, seed, b, size, burn_in, snapshot,
                               newborn_wealth, chunk, backend)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(n_blocks)))
    else:
        results = [run(b) for b in range(n_blocks)]
    panels = [r[0] for r in results]
    final = CrossSection(
        income=np.concatenate([p.income for p in panels]),
        norm_wealth=np.concatenate([p.norm_wealth for p in panels]),
        capital_income=np.concatenate([p.capital_income for p in panels]),
        age=np.concatenate([p.age for p in panels]),
        periods_elapsed=burn_in, seed=seed,
    )
    mid = hill_default(clean_sample(np.concatenate([r[1] for r in results])))
    end = hill_default(clean_sample(final.income))
    diag = StationarityDiagnostic(mid.alpha, end.alpha, math.hypot(mid.se, end.se))
    if not diag.passed:
        warnings.warn(f"income exponent moved from {diag.alpha_mid:.3f} to {diag.alpha_end:.3f}",
                      NotStationary, stacklevel=2)
    return final, diag


def tail_plot_data(cross_section: CrossSection, variable: str, max_points: int = 2000) -> np.ndarray:
    """Empirical tail probabilities as rows (log x_(i), log(i/N)), largest first.

    Non-positive values are dropped before ranking. Rows are thinned to at
    most ``max_points`` ranks spaced evenly in log i.
    """
    x = np.asarray(cross_section.variable(variable), dtype=float)
    x = x[x > 0]
    if x.size == 0:
        raise EmptySample(f"no positive values of {variable}")
    x = np.sort(x)[::-1]
    n = x.size
    if x[0] == x[-1]:
        return np.array([[math.log(x[0]), math.log(1.0 / n)], [math.log(x[0]), 0.0]])
    if n <= max_points:
        ranks = np.arange(1, n + 1)
    else:
        ranks = np.unique(np.round(np.logspace(0, math.log10(n), max_points)).astype(np.int64))
    return np.column_stack([np.log(x[ranks - 1]), np.log(ranks / n)])


def tail_slope(points: np.ndarray, top_fraction: float = 0.1) -> float:
    """Least-squares slope of log tail probability on log size over the top ``top_fraction``."""
    sel = points[points[:, 1] <= math.log(top_fraction) + 1e-12]
    if sel.shape[0] < 2 or np.ptp(sel[:, 0]) == 0:
        return math.nan
    return float(np.polyfit(sel[:, 0], sel[:, 1], 1)[0])


def write_plot_data(points: np.ndarray, path, header=("log_size", "log_tail_prob")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a, b in points:
            w.writerow([f"{a:.6g}", f"{b:.6g}"])
