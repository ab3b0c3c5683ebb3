import warnings

import numpy as np
import pytest

from paretotails.calibration import TABLE1, promotion_model
from paretotails.errors import NotStationary
from paretotails.ifp_solver import build_grid, solve_policy
from paretotails.panel_sim import simulate_stationary

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def pareto_sample(rng, alpha, n, scale=1.0):
    """Exact Pareto(alpha) draws by inversion."""
    return scale * rng.random(n) ** (-1.0 / alpha)


@pytest.fixture(scope="session")
def table1_model():
    return promotion_model(TABLE1)


@pytest.fixture(scope="session")
def table1_policy(table1_model):
    return solve_policy(table1_model, build_grid(), enforce_existence=False)


@pytest.fixture(scope="session")
def table1_panel(table1_model, table1_policy):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotStationary)
        cs, diag = simulate_stationary(table1_model, table1_policy, n_agents=10**5,
                                       burn_in=2000, seed=0)
    return cs, diag


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
