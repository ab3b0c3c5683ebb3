"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on identical inputs under both backends; the table shows
the best wall time of ``--repeat`` runs and the speed-up.
"""

import argparse
import timeit

import numpy as np

from paretotails import _pykernels
from paretotails.calibration import promotion_model
from paretotails.ifp_solver import build_grid, solve_policy

try:
    from paretotails import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(model, policy):
    rng = np.random.default_rng(0)
    grid, cons, slope = policy.grid.points, policy.consumption, policy.mpc_theoretical
    rt, bt = model.detrended()
    weights = model.probs * bt * rt
    z = rng.standard_normal((250, 10_000))
    n, periods = 4096, 100
    survive = (rng.random((periods, n)) < model.v).astype(np.uint8)
    u_state = rng.random((periods, n))
    cum = np.cumsum(model.probs)[:-1]

    def agents(kern):
        wealth, income = np.full(n, 1.0), np.ones(n)
        age = np.zeros(n, dtype=np.int64)
        kern.advance_agents(wealth, income, age, grid, cons, slope, survive, u_state, cum,
                            model.returns, model.growth, 1.0)

    return {
        "brownian_functional (250 x 1e4)": lambda k: k.brownian_functional(z, 0.2),
        "advance_agents (4096 x 100)": agents,
        "policy_update (100 x 14)": lambda k: k.policy_update(grid, cons, slope, rt, weights, 2.0),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    model = promotion_model()
    policy = solve_policy(model, build_grid(), enforce_existence=False)
    print(f"{'kernel':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, fn in cases(model, policy).items():
        number = 20 if name.startswith("policy") else 1
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=number, repeat=args.repeat))
        t_py *= 1e3 / number
        if _ckernels is None:
            print(f"{name:34s} {t_py:12.3f} {'n/a':>12s} {'':>9s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=number, repeat=args.repeat))
        t_c *= 1e3 / number
        print(f"{name:34s} {t_py:12.3f} {t_c:12.3f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
