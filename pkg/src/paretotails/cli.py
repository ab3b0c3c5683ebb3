"""Command line front end.

    paretotails estimate data.csv --out-dir out/
    paretotails test data.csv --t0 0.2 --level 0.05 --out-dir out/
    paretotails simulate-cv --t0 0.2 0.3 --level 0.05 0.1 --out-dir out/
    paretotails model --config table1.cfg --out-dir out/
    paretotails sweep --config table1.cfg --g-min 0.02 --g-max 0.1 --out-dir out/
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _backend
from .calibration import TABLE1, params_from_mapping, read_key_values, sweep_growth
from .equality_test import CriticalValueTable, simulate_critical_value
from .errors import ParetoTailsError
from .pipeline import (CellOptions, _write_rows, emit_reports, emit_test_table,
                       ingest, load_schema, model_config_from_mapping,
                       run_cells, run_model)

log = logging.getLogger("paretotails")


def _common(p):
    p.add_argument("--out-dir", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")


def _data_args(p):
    p.add_argument("data", help="household CSV file")
    p.add_argument("--schema", help="key-value file mapping field names to CSV columns")
    p.add_argument("--tail-fraction", type=float, default=0.05)
    p.add_argument("--t0", type=float, default=0.2)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--nmin", type=int, default=500)
    p.add_argument("--bad-row-threshold", type=float, default=0.01)
    p.add_argument("--no-restrict-labor", action="store_true",
                   help="test on all labor observations, not only households with capital income")
    p.add_argument("--cv-table", help="critical value table (t0 level value provenance per line)")
    p.add_argument("--workers", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="paretotails", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="per-cell Hill exponents, tests and summary tables")
    _data_args(p)
    _common(p)

    p = sub.add_parser("test", help="equality tests of labor and capital exponents per cell")
    _data_args(p)
    _common(p)

    p = sub.add_parser("simulate-cv", help="simulate critical values of the limiting law")
    p.add_argument("--t0", type=float, nargs="+", default=[0.2])
    p.add_argument("--level", type=float, nargs="+", default=[0.05])
    p.add_argument("--n-paths", type=int, default=10**5)
    p.add_argument("--n-steps", type=int, default=10**4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default="critical_values.txt", help="file name inside --out-dir")
    _common(p)

    p = sub.add_parser("model", help="theory, policy solve, simulation and g sweep from a config")
    p.add_argument("--config", help="key-value parameter file (defaults: the built-in calibration)")
    p.add_argument("--n-agents", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--no-simulate", action="store_true")
    p.add_argument("--workers", type=int)
    _common(p)

    p = sub.add_parser("sweep", help="alpha_Y and alpha_tilde over a range of g")
    p.add_argument("--config", help="key-value parameter file (defaults: the built-in calibration)")
    p.add_argument("--g-min", type=float, default=0.02)
    p.add_argument("--g-max", type=float, default=0.1)
    p.add_argument("--g-n", type=int, default=81)
    _common(p)
    return parser


def _cell_options(args):
    cv = CriticalValueTable.load(args.cv_table) if args.cv_table else CriticalValueTable()
    return CellOptions(tail_fraction=args.tail_fraction, t0=args.t0, level=args.level,
                       nmin=args.nmin, restrict_labor=not args.no_restrict_labor, cv=cv)


def cmd_estimate(args, out):
    data = ingest(args.data, load_schema(args.schema), args.bad_row_threshold)
    reports = run_cells(data, _cell_options(args), args.workers)
    summary = emit_reports(reports, out)
    print(f"{len(reports)} cells, {summary['n_tested']} tested, {summary['n_rejected']} rejected "
          f"({data.n_bad} malformed rows skipped)")


def cmd_test(args, out):
    data = ingest(args.data, load_schema(args.schema), args.bad_row_threshold)
    reports = run_cells(data, _cell_options(args), args.workers)
    emit_test_table(reports, out / "tests.csv")
    tested = [r for r in reports if r.tested]
    print(f"{len(tested)} of {len(reports)} cells tested, "
          f"{sum(r.reject for r in tested)} rejected at level {args.level}")


def cmd_simulate_cv(args, out):
    table = CriticalValueTable()
    for t0 in args.t0:
        for level in args.level:
            if (t0, level) in table:
                continue
            value = simulate_critical_value(t0, level, n_paths=args.n_paths,
                                            n_steps=args.n_steps, seed=args.seed,
                                            workers=args.workers)
            table.add(t0, level, value, "simulated")
            print(f"t0={t0:g} level={level:g}: {value:.6g}")
    table.save(out / args.output)


def cmd_model(args, out):
    mapping = read_key_values(args.config) if args.config else {}
    cfg = model_config_from_mapping(mapping)
    updates = {"seed": args.seed} if "seed" not in mapping else {}
    if args.n_agents is not None:
        updates["n_agents"] = args.n_agents
    if args.burn_in is not None:
        updates["burn_in"] = args.burn_in
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.no_simulate:
        updates["simulate"] = False
    theory = run_model(replace(cfg, **updates), out)
    print(f"g = {theory['g']:.6g}, alpha_Y = {theory['alpha_Y']:.6g}, "
          f"alpha_tilde = {theory['alpha_tilde']:.6g}, mpc = {theory['mpc']:.6g}")


def cmd_sweep(args, out):
    params = params_from_mapping(read_key_values(args.config)) if args.config else TABLE1
    sweep = sweep_growth(params, np.linspace(args.g_min, args.g_max, args.g_n))
    _write_rows(out / "sweep.csv", ["g", "alpha_Y", "alpha_tilde"],
                ((float(r["g"]), float(r["alpha_Y"]), float(r["alpha_tilde"])) for r in sweep))
    print(f"wrote {len(sweep)} rows to {out / 'sweep.csv'}")


COMMANDS = {
    "estimate": cmd_estimate,
    "test": cmd_test,
    "simulate-cv": cmd_simulate_cv,
    "model": cmd_model,
    "sweep": cmd_sweep,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", _backend.BACKEND)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        COMMANDS[args.command](args, out)
    except (ParetoTailsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
