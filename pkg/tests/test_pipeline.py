import csv
import warnings

import numpy as np
import pytest

from paretotails.calibration import PromotionParams, params_from_mapping, parse_key_values
from paretotails.errors import NotStationary, SchemaError, StageError, TooManyBadRows
from paretotails.pipeline import (CellOptions, correlation_with_ci, emit_reports, fmt, ingest,
                                  load_schema, model_config_from_mapping, run_cell, run_cells,
                                  run_model)

from conftest import pareto_sample


def write_panel(path, rng, cells, n=12_000, header=None, extra_rows=()):
    header = header or ["country", "year", "household_id", "labor_income", "capital_income"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for country, year, a_lab, a_cap in cells:
            # dependent columns: a common scale factor per household
            common = rng.random(n) ** -0.1
            lab = common * pareto_sample(rng, a_lab, n)
            cap = common * pareto_sample(rng, a_cap, n)
            cap[rng.random(n) < 0.3] = 0.0
            for i in range(n):
                w.writerow([country, year, f"h{i}", f"{lab[i]:.10g}", f"{cap[i]:.10g}"])
        for row in extra_rows:
            w.writerow(row)


def test_fmt():
    assert fmt(None) == "" and fmt(True) == "true" and fmt(3) == "3"
    assert fmt(1.23456789) == "1.23457" and fmt(float("nan")) == "NA"


def test_ingest_and_bad_rows(tmp_path, rng):
    p = tmp_path / "d.csv"
    write_panel(p, rng, [("AA", 2000, 3, 1.5)], n=2000,
                extra_rows=[["AA", "x", "h", "1", "1"], ["AA", 2000, "h0", "1", "1"]])
    data = ingest(p)
    assert data.n_bad == 2 and data.n_records == 2000
    cell = data.cells[("AA", 2000)]
    assert len(cell) == 2000 and next(cell.records()).household_id == "h0"
    with pytest.raises(TooManyBadRows):
        ingest(p, bad_row_threshold=1e-4)


def test_schema_mapping(tmp_path, rng):
    p = tmp_path / "d.csv"
    write_panel(p, rng, [("AA", 2000, 3, 1.5)], n=100,
                header=["cc", "yr", "hid", "lab", "cap"])
    with pytest.raises(SchemaError):
        ingest(p)
    s = tmp_path / "schema.txt"
    s.write_text("country = cc\nyear = yr\nhousehold_id: hid\nlabor_income lab\ncapital_income=cap\n")
    assert len(ingest(p, load_schema(s)).cells) == 1
    s.write_text("colour = red\n")
    with pytest.raises(SchemaError):
        load_schema(s)


def test_run_cell_skips_small_capital(rng):
    rep = run_cell("BB", 1999, pareto_sample(rng, 3, 3000), np.r_[pareto_sample(rng, 2, 100),
                                                                   np.zeros(2900)])
    assert rep.alpha_lab is not None and rep.alpha_cap is None and not rep.tested
    assert "nmin" in rep.skip_reason


def test_end_to_end_reports(tmp_path, rng):
    p = tmp_path / "d.csv"
    cells = [("AA", 2000, 3.0, 1.5), ("AA", 2001, 3.0, 1.5), ("BB", 2000, 2.0, 2.0)]
    write_panel(p, rng, cells)
    reports = run_cells(ingest(p), CellOptions(), workers=2)
    summary = emit_reports(reports, tmp_path / "out")
    assert summary["n_tested"] == 3
    for f in ("cells.csv", "summary.csv", "scatter.csv", "histogram.csv"):
        assert (tmp_path / "out" / f).exists()
    by_key = {(r.country, r.year): r for r in reports}
    assert by_key[("AA", 2000)].reject and by_key[("AA", 2001)].reject
    assert summary["n_rejected_lab_gt_cap"] == summary["n_rejected"]


def test_correlation():
    assert correlation_with_ci([1, 2], [3, 1]) == (-1.0, None, None)
    r, lo, hi = correlation_with_ci([1, 2, 3, 4, 5, 6], [1, 3, 2, 5, 4, 6])
    assert lo < r < hi
    assert correlation_with_ci([1, 1, 1], [1, 2, 3]) == (None, None, None)


def test_key_values():
    kv = parse_key_values("# c\nmu = 0.08  # comment\nsigma: 0.2\nL 4\n")
    assert kv == {"mu": "0.08", "sigma": "0.2", "L": "4"}
    par = params_from_mapping(kv)
    assert par == PromotionParams(mu=0.08, sigma=0.2, L=4.0)
    cfg = model_config_from_mapping({"n_agents": "2000", "simulate": "no", "mu": "0.08"})
    assert cfg.n_agents == 2000 and not cfg.simulate and cfg.params.mu == 0.08


def test_run_model_small(tmp_path):
    cfg = model_config_from_mapping({"n_agents": "2000", "burn_in": "50", "sweep_g_n": "5"})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotStationary)
        theory = run_model(cfg, tmp_path)
    assert theory["alpha_tilde"] == pytest.approx(1.2007, abs=1e-3)
    for f in ("theory.txt", "policy.csv", "cross_section.csv", "tail_income.csv", "sweep.csv"):
        assert (tmp_path / f).exists()
    assert "existence_ok = false" in (tmp_path / "theory.txt").read_text()


def test_run_model_stage_error(tmp_path):
    cfg = model_config_from_mapping({"grid_median": "1e5", "simulate": "no"})
    with pytest.raises(StageError) as err:
        run_model(cfg, tmp_path)
    assert err.value.stage == "grid"



def test_dependent_cell_rejects(rng):
    # common uniforms drive both columns; capital observed on a 20% subset
    u = rng.random(10**5)
    lab = u ** (-1 / 3.0)
    cap = np.zeros(10**5)
    idx = rng.choice(10**5, 20_000, replace=False)
    cap[idx] = (u[idx] * rng.random(20_000) ** 0.05) ** (-1 / 1.5)
    rep = run_cell("CC", 2010, lab, cap)
    assert rep.reject and rep.alpha_cap < rep.alpha_lab
    assert rep.k_lab == 5000 and rep.k_cap == 1000
    assert rep.se_lab * np.sqrt(rep.k_lab) == pytest.approx(rep.alpha_lab)


def test_identical_columns_do_not_reject(rng):
    x = pareto_sample(rng, 2.0, 20_000)
    rep = run_cell("DD", 2010, x, x)
    assert rep.T_N == 0.0 and rep.reject is False


def test_no_capital_cell(rng):
    rep = run_cell("EE", 2010, pareto_sample(rng, 2.0, 2000), np.zeros(2000))
    assert rep.n_cap == 0 and rep.alpha_cap is None and rep.alpha_lab is not None


def _report(country, year, a_lab, a_cap):
    from paretotails.pipeline import CellReport
    return CellReport(country, year, n_lab=1000, n_cap=1000, alpha_lab=a_lab, alpha_cap=a_cap)


def test_two_cell_correlation_is_exact(tmp_path):
    s = emit_reports([_report("A", 1, 3.0, 1.5), _report("B", 1, 4.0, 2.0)], tmp_path)
    assert s["corr_alpha_lab_cap"] == 1.0
    s1 = emit_reports([_report("A", 1, 3.0, 1.5)], tmp_path / "one")
    assert s1["corr_alpha_lab_cap"] is None
    assert "corr_alpha_lab_cap,NA" in (tmp_path / "one" / "summary.csv").read_text()


def test_correlation_ci_coverage():
    r = np.random.default_rng(99)
    covered = 0
    for _ in range(200):
        _, lo, hi = correlation_with_ci(r.uniform(2, 4, 50), r.uniform(1, 3, 50))
        covered += lo < 0 < hi
    assert 0.90 <= covered / 200 <= 0.99


def test_reports_are_deterministic_and_consistent(tmp_path, rng):
    p = tmp_path / "d.csv"
    write_panel(p, rng, [("AA", 2000, 3.0, 1.5), ("BB", 2000, 2.0, 2.0), ("CC", 2000, 2.5, 2.0)],
                n=4000)
    for sub in ("a", "b"):
        emit_reports(run_cells(ingest(p), workers=2 if sub == "b" else 1), tmp_path / sub)
    for f in ("cells.csv", "summary.csv", "scatter.csv", "histogram.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    with open(tmp_path / "a" / "cells.csv") as fh:
        lab = [float(row["alpha_lab"]) for row in csv.DictReader(fh)]
    summary = dict(line.split(",") for line in
                   (tmp_path / "a" / "summary.csv").read_text().splitlines()[1:])
    assert float(summary["median_alpha_lab"]) == pytest.approx(np.median(lab), rel=1e-5)


@pytest.mark.slow
def test_ingest_million_rows(tmp_path):
    r = np.random.default_rng(5)
    p = tmp_path / "big.csv"
    counts = {("AA", 2000): 400_000, ("BB", 2001): 350_000, ("CC", 2002): 250_000}
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["country", "year", "household_id", "labor_income", "capital_income"])
        for (c, y), n in counts.items():
            lab = r.random(n) ** -0.5
            w.writerows((c, y, i, f"{x:.6g}", "0") for i, x in enumerate(lab))
    data = ingest(p)
    assert data.n_rows == 10**6 and data.n_bad == 0
    assert {k: len(v) for k, v in data.cells.items()} == counts


def test_log_utility_config(tmp_path):
    cfg = model_config_from_mapping({"gamma": "1", "simulate": "no", "sweep_g_n": "3"})
    theory = run_model(cfg, tmp_path)
    assert theory["mpc"] == pytest.approx(1 - cfg.params.beta, rel=1e-12)
    assert theory["max_abs_euler_residual"] < 1e-6
