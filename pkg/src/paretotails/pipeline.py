"""Batch pipeline: micro-data CSV -> per-cell exponents and tests -> report files,
and config file -> theory, policy, simulated panel and sweep outputs."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .calibration import (TABLE1, PromotionParams, params_from_mapping, promotion_model,
                          read_key_values, sweep_growth)
from .equality_test import (DEFAULT_LEVEL, DEFAULT_T0, CriticalValueTable, paired_samples,
                            test_equality)
from .errors import (ParetoTailsError, SchemaError, StageError, TooManyBadRows)
from .exponent_theory import check_existence, solve_wealth_exponent
from .ifp_solver import build_grid, euler_residuals, solve_policy
from .panel_sim import VARIABLES, simulate_stationary, tail_plot_data, write_plot_data
from .tail_stats import (DEFAULT_NMIN, DEFAULT_TAIL_FRACTION, clean_sample, hill, tail_count)

log = logging.getLogger(__name__)

SCHEMA_FIELDS = ("country", "year", "household_id", "labor_income", "capital_income")
MISSING = {"", "na", "nan", ".", "null", "none"}


def fmt(x):
    """Six significant digits; blank for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "NA"
    if isinstance(x, (float, np.floating)):
        return f"{x:.6g}"
    return str(x)


@dataclass(frozen=True)
class PanelRecord:
    country: str
    year: int
    household_id: str
    labor_income: float | None
    capital_income: float | None


@dataclass
class CellData:
    country: str
    year: int
    household_ids: list = field(default_factory=list)
    labor: list = field(default_factory=list)
    capital: list = field(default_factory=list)

    def __len__(self):
        return len(self.household_ids)

    def records(self):
        for hid, lab, cap in zip(self.household_ids, self.labor, self.capital):
            yield PanelRecord(self.country, self.year, hid,
                              None if math.isnan(lab) else lab,
                              None if math.isnan(cap) else cap)


@dataclass
class IngestResult:
    cells: dict
    n_rows: int
    n_bad: int
    bad_lines: list

    @property
    def n_records(self):
        return self.n_rows - self.n_bad


def load_schema(path=None) -> dict[str, str]:
    """Map logical field names to CSV column names; unspecified fields map to themselves."""
    schema = {name: name for name in SCHEMA_FIELDS}
    if path is not None:
        for key, value in read_key_values(path).items():
            if key not in SCHEMA_FIELDS:
                raise SchemaError(f"unknown schema field {key!r}")
            schema[key] = value
    return schema


def _parse_amount(text):
    text = text.strip()
    if text.lower() in MISSING:
        return math.nan
    return float(text)


def ingest(path, schema: dict[str, str] | None = None, bad_row_threshold: float = 0.01
           ) -> IngestResult:
    """Read a household CSV and group rows by (country, year).

    Malformed rows (unparsable numbers or year, empty country or id,
    duplicate household within a cell) are counted and skipped; more than
    ``bad_row_threshold`` of them raises ``TooManyBadRows``.
    """
    schema = schema or load_schema()
    cells: dict[tuple[str, int], CellData] = {}
    seen = set()
    n_rows = 0
    bad = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        try:
            cols = [header.index(schema[name]) for name in SCHEMA_FIELDS]
        except ValueError:
            missing = [schema[n] for n in SCHEMA_FIELDS if schema[n] not in header]
            raise SchemaError(f"missing column(s) {missing} in {path}") from None
        ic, iy, ih, il, ik = cols
        width = max(cols) + 1
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            n_rows += 1
            try:
                if len(row) < width:
                    raise ValueError("short row")
                country = row[ic].strip()
                hid = row[ih].strip()
                if not country or not hid:
                    raise ValueError("empty country or household id")
                year = int(row[iy])
                lab = _parse_amount(row[il])
                cap = _parse_amount(row[ik])
                key = (country, year, hid)
                if key in seen:
                    raise ValueError("duplicate household")
            except ValueError as exc:
                bad.append((lineno, str(exc)))
                continue
            seen.add(key)
            cell = cells.get((country, year))
            if cell is None:
                cell = cells[(country, year)] = CellData(country, year)
            cell.household_ids.append(hid)
            cell.labor.append(lab)
            cell.capital.append(cap)
    if n_rows and len(bad) / n_rows > bad_row_threshold:
        raise TooManyBadRows(f"{len(bad)} of {n_rows} rows malformed "
                             f"(threshold {bad_row_threshold:.2%})")
    if bad:
        log.warning("%s: skipped %d malformed row(s)", path, len(bad))
    return IngestResult(cells=dict(sorted(cells.items())), n_rows=n_rows, n_bad=len(bad),
                        bad_lines=bad)


@dataclass(frozen=True)
class CellOptions:
    tail_fraction: float = DEFAULT_TAIL_FRACTION
    t0: float = DEFAULT_T0
    level: float = DEFAULT_LEVEL
    nmin: int = DEFAULT_NMIN
    restrict_labor: bool = True
    cv: CriticalValueTable | float | None = None


@dataclass
class CellReport:
    country: str
    year: int
    n_lab: int = 0
    n_cap: int = 0
    alpha_lab: float | None = None
    se_lab: float | None = None
    k_lab: int | None = None
    alpha_cap: float | None = None
    se_cap: float | None = None
    k_cap: int | None = None
    alpha_lab_test: float | None = None
    T_N: float | None = None
    critical_value: float | None = None
    reject: bool | None = None
    skip_reason: str = ""

    @property
    def tested(self):
        return self.reject is not None


def _skip(report, reason):
    report.skip_reason = f"{report.skip_reason}; {reason}" if report.skip_reason else reason


def run_cell(country, year, labor, capital, options: CellOptions = CellOptions()) -> CellReport:
    """Exponents and the equality test for one country-year.

    Labor uses all positive observations with k = floor(f N_lab). Capital
    and the test run only when N_cap >= nmin; the test shares
    k = floor(f N_cap) and, by default, restricts labor to households with
    positive capital income. Failures are recorded in ``skip_reason``.
    """
    labor = np.asarray(labor, dtype=float)
    capital = np.asarray(capital, dtype=float)
    rep = CellReport(country=country, year=int(year))
    rep.n_lab = int(np.sum(np.isfinite(labor) & (labor > 0)))
    rep.n_cap = int(np.sum(np.isfinite(capital) & (capital > 0)))
    try:
        lab = clean_sample(labor)
        est = hill(lab, tail_count(lab.n_pos, options.tail_fraction))
        rep.alpha_lab, rep.se_lab, rep.k_lab = est.alpha, est.se, est.k
    except ParetoTailsError as exc:
        _skip(rep, f"labor: {type(exc).__name__}: {exc}")
    if rep.n_cap < options.nmin:
        _skip(rep, f"capital: n_cap={rep.n_cap} < nmin={options.nmin}")
        return rep
    try:
        cap = clean_sample(capital)
        est = hill(cap, tail_count(cap.n_pos, options.tail_fraction))
        rep.alpha_cap, rep.se_cap, rep.k_cap = est.alpha, est.se, est.k
    except ParetoTailsError as exc:
        _skip(rep, f"capital: {type(exc).__name__}: {exc}")
        return rep
    try:
        lab_t, cap_t = paired_samples(labor, capital, options.restrict_labor)
        res = test_equality(lab_t, cap_t, options.t0, options.level, options.cv,
                            options.tail_fraction)
        rep.alpha_lab_test = res.alpha_lab
        rep.T_N, rep.critical_value, rep.reject = res.statistic, res.critical_value, res.reject
    except ParetoTailsError as exc:
        _skip(rep, f"test: {type(exc).__name__}: {exc}")
    return rep


def run_cells(ingested: IngestResult, options: CellOptions = CellOptions(), workers: int = 1):
    if options.cv is None:
        options = replace(options, cv=CriticalValueTable())
    jobs = [(c.country, c.year, c.labor, c.capital) for c in ingested.cells.values()]

    def one(job):
        return run_cell(*job, options=options)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]


def correlation_with_ci(x, y, z_crit=1.959963984540054):
    """Pearson correlation and a Fisher-z interval treating cells as independent.

    Returns (r, lo, hi); entries are None where undefined (n < 2 for r, n < 4 for the interval).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None, None, None
    if n == 2:
        return float(np.sign((x[1] - x[0]) * (y[1] - y[0]))), None, None
    r = float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))
    if n < 4 or abs(r) == 1.0:
        return r, None, None
    z = math.atanh(r)
    half = z_crit / math.sqrt(n - 3)
    return r, math.tanh(z - half), math.tanh(z + half)


CELL_COLUMNS = [f.name for f in fields(CellReport)]


def summarize(reports):
    lab = [r.alpha_lab for r in reports if r.alpha_lab is not None]
    cap = [r.alpha_cap for r in reports if r.alpha_cap is not None]
    both = [(r.alpha_lab, r.alpha_cap) for r in reports
            if r.alpha_lab is not None and r.alpha_cap is not None]
    tested = [r for r in reports if r.tested]
    rejected = [r for r in tested if r.reject]
    r, lo, hi = correlation_with_ci([b[0] for b in both], [b[1] for b in both])
    return {
        "n_cells": len(reports),
        "n_labor_estimated": len(lab),
        "n_capital_estimated": len(cap),
        "n_tested": len(tested),
        "n_rejected": len(rejected),
        "rejection_rate": len(rejected) / len(tested) if tested else None,
        "n_rejected_lab_gt_cap": sum(1 for t in rejected if t.alpha_lab_test > t.alpha_cap),
        "median_alpha_lab": float(np.median(lab)) if lab else None,
        "median_alpha_cap": float(np.median(cap)) if cap else None,
        "corr_alpha_lab_cap": r,
        "corr_ci_low": lo,
        "corr_ci_high": hi,
    }


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def emit_reports(reports, out_dir, bins=20):
    """Write cells.csv, summary.csv, scatter.csv and histogram.csv to ``out_dir``."""
    if not reports:
        raise ValueError("no reports to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = sorted(reports, key=lambda r: (r.country, r.year))
    _write_rows(out / "cells.csv", CELL_COLUMNS,
                ([getattr(r, c) for c in CELL_COLUMNS] for r in reports))
    summary = summarize(reports)
    _write_rows(out / "summary.csv", ["key", "value"],
                ((k, "NA" if v is None else v) for k, v in summary.items()))
    _write_rows(out / "scatter.csv", ["country", "year", "alpha_lab", "alpha_cap", "alpha_lab_test"],
                ((r.country, r.year, r.alpha_lab, r.alpha_cap, r.alpha_lab_test)
                 for r in reports if r.alpha_lab is not None and r.alpha_cap is not None))
    lab = np.array([r.alpha_lab for r in reports if r.alpha_lab is not None])
    cap = np.array([r.alpha_cap for r in reports if r.alpha_cap is not None])
    pooled = np.concatenate([lab, cap])
    rows = []
    if pooled.size:
        edges = np.histogram_bin_edges(pooled, bins=bins)
        lab_counts = np.histogram(lab, edges)[0]
        cap_counts = np.histogram(cap, edges)[0]
        rows = [(float(edges[i]), float(edges[i + 1]), int(lab_counts[i]), int(cap_counts[i]))
                for i in range(len(edges) - 1)]
    _write_rows(out / "histogram.csv", ["bin_lo", "bin_hi", "count_lab", "count_cap"], rows)
    return summary


def emit_test_table(reports, path):
    cols = ["country", "year", "n_cap", "k_cap", "alpha_lab_test", "alpha_cap", "T_N",
            "critical_value", "reject", "skip_reason"]
    _write_rows(path, cols, ([getattr(r, c) for c in cols]
                             for r in sorted(reports, key=lambda r: (r.country, r.year))))


# --- model runs -------------------------------------------------------------

@dataclass(frozen=True)
class ModelRunConfig:
    params: PromotionParams = TABLE1
    grid_count: int = 100
    grid_max: float = 1e4
    grid_median: float = 10.0
    tol: float = 1e-10
    max_iter: int = 10_000
    enforce_existence: bool = False
    n_agents: int = 10**5
    burn_in: int = 2000
    seed: int = 0
    newborn_wealth: float = 1.0
    workers: int = 1
    sweep_g_min: float = 0.02
    sweep_g_max: float = 0.1
    sweep_g_n: int = 81
    simulate: bool = True


def _as_bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def model_config_from_mapping(mapping: dict[str, str]) -> ModelRunConfig:
    params = params_from_mapping(mapping)
    updates = {"params": params}
    for f in fields(ModelRunConfig):
        if f.name == "params" or f.name not in mapping:
            continue
        raw = mapping[f.name]
        if f.type in ("bool", bool):
            updates[f.name] = _as_bool(raw)
        elif f.type in ("int", int):
            updates[f.name] = int(float(raw))
        else:
            updates[f.name] = float(raw)
    return replace(ModelRunConfig(), **updates)


def load_model_config(path) -> ModelRunConfig:
    return model_config_from_mapping(read_key_values(path))


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc


def write_key_values(path, items):
    with open(path, "w") as fh:
        for key, value in items:
            fh.write(f"{key} = {fmt(value)}\n")


def run_model(config: ModelRunConfig, out_dir) -> dict:
    """Theory -> policy solve -> panel simulation -> g sweep, written to ``out_dir``.

    Files: theory.txt, policy.csv, cross_section.csv, tail_<variable>.csv,
    sweep.csv. Returns the theory report as a dict.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    model = _stage("calibration", promotion_model, params)
    exact = _stage("theory", solve_wealth_exponent, model, "exact")
    discrete = _stage("theory", solve_wealth_exponent, model, "discrete")
    existence = check_existence(model)
    grid = _stage("grid", build_grid, config.grid_count, config.grid_max, config.grid_median)
    policy = _stage("solve", solve_policy, model, grid, config.tol, config.max_iter,
                    config.enforce_existence)
    resid = euler_residuals(policy, model)
    theory = {
        "delta_t": params.delta_t, "delta": params.delta, "gamma": params.gamma,
        "eta": params.eta, "mu": params.mu, "sigma": params.sigma, "L": params.L,
        "v": params.v, "p": params.p, "beta": params.beta, "g": params.growth_gain,
        "alpha_Y": exact.alpha_Y, "alpha_tilde": exact.alpha_tilde,
        "alpha_wealth": exact.alpha_wealth, "wealth_bounded": exact.wealth_bounded,
        "alpha_tilde_quadrature": discrete.alpha_tilde, "rho": exact.rho, "mpc": exact.mpc,
        "existence_ok": existence.ok,
        "beta_E_G_1mgamma": existence.beta_growth_moment,
        "beta_E_R_G_mgamma": existence.beta_return_moment,
        "solver_method": policy.method, "solver_iterations": policy.iterations,
        "solver_sup_change": policy.sup_change,
        "max_abs_euler_residual": float(np.max(np.abs(resid[1:]))),
    }
    policy.to_csv(out / "policy.csv")
    if config.simulate:
        cs, diag = _stage("simulate", simulate_stationary, model, policy, config.n_agents,
                          config.burn_in, config.seed, config.newborn_wealth,
                          workers=config.workers)
        cs.to_csv(out / "cross_section.csv")
        for var in VARIABLES:
            est = hill(clean_sample(cs.variable(var)),
                       tail_count(int(np.sum(cs.variable(var) > 0))))
            theory[f"sim_hill_{var}"] = est.alpha
            theory[f"sim_hill_se_{var}"] = est.se
            write_plot_data(tail_plot_data(cs, var), out / f"tail_{var}.csv")
        theory["sim_mean_age"] = float(cs.age.mean())
        theory["stationarity_passed"] = diag.passed
    sweep = _stage("sweep", sweep_growth, params,
                   np.linspace(config.sweep_g_min, config.sweep_g_max, config.sweep_g_n))
    _write_rows(out / "sweep.csv", ["g", "alpha_Y", "alpha_tilde"],
                ((float(r["g"]), float(r["alpha_Y"]), float(r["alpha_tilde"])) for r in sweep))
    write_key_values(out / "theory.txt", theory.items())
    return theory
