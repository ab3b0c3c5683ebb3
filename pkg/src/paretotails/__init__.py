"""Pareto exponents of capital and labor income.

Hill estimation, a self-normalized test of equal tail exponents for
dependent samples, and an income fluctuation model with stochastic
returns whose theoretical exponents, policy and simulated panel can be
compared against the data.
"""

from ._backend import BACKEND
from .equality_test import (CriticalValueTable, EqualityTestResult, InverseHillPath,
                            hoga_statistic, inverse_hill_path, simulate_critical_value,
                            test_equality)
from .exponent_theory import (ExponentReport, ShockModel, asymptotic_mpc, check_existence,
                              example1_exponents, promotion_exponent_closed_form,
                              solve_income_exponent, solve_wealth_exponent)
from .ifp_solver import (PolicySolution, WealthGrid, build_grid, discretize_returns,
                         euler_residuals, solve_policy)
from .panel_sim import CrossSection, simulate_stationary, step_panel, tail_plot_data
from .tail_stats import HillEstimate, TailSample, clean_sample, hill, log_rank_points, tail_count

__all__ = [
    "BACKEND",
    "CriticalValueTable", "EqualityTestResult", "InverseHillPath", "hoga_statistic",
    "inverse_hill_path", "simulate_critical_value", "test_equality",
    "ExponentReport", "ShockModel", "asymptotic_mpc", "check_existence", "example1_exponents",
    "promotion_exponent_closed_form", "solve_income_exponent", "solve_wealth_exponent",
    "PolicySolution", "WealthGrid", "build_grid", "discretize_returns", "euler_residuals",
    "solve_policy",
    "CrossSection", "simulate_stationary", "step_panel", "tail_plot_data",
    "HillEstimate", "TailSample", "clean_sample", "hill", "log_rank_points", "tail_count",
]
