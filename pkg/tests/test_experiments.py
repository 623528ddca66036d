import json
import math

import numpy as np
import pandas as pd
import pytest

from localdeg.estimator import AnnulusSize, ConstantOne, Geometric, scheme_label
from localdeg.experiments import (
    RECORD_COLUMNS,
    ExperimentConfig,
    aggregate,
    design_model,
    log_ratio_values,
    mse_curve,
    run_design_benchmark,
    run_mccv_stability,
    run_mccv_study,
    run_mse_study,
    run_wireless_study,
)
from localdeg.graph import from_edges
from localdeg.mccv import SplitPlan
from localdeg.model import (
    EXAMPLE_SBM,
    BetaScalar,
    HardThreshold,
    RcmSpec,
    SbmSpec,
    UniformCube,
    growing_sbm,
    sample_sbm_graph,
    sbm_truth,
)
from localdeg.rng import THREADS_ENV

BETA = RcmSpec(BetaScalar(2, 5), HardThreshold(0.05), (0.3,))
SCHEMES = (AnnulusSize(), ConstantOne(), Geometric(0.1))


def _cfg(model=EXAMPLE_SBM, **kw):
    base = dict(schemes=SCHEMES, n_grid=(50,), replicates=20, plan=SplitPlan(20), seed=99)
    base.update(kw)
    return ExperimentConfig(model, **base)


@pytest.mark.parametrize("kw", [{"replicates": -1}, {"n_grid": ()}, {"schemes": ()}, {"n_grid": (40,)}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        _cfg(**kw)


def test_unknown_family():
    with pytest.raises(ValueError):
        ExperimentConfig("shrinking-sbm")


def test_mse_record_count():
    res = run_mse_study(_cfg(replicates=7))
    r = res.records
    assert list(r.columns) == RECORD_COLUMNS
    # per replicate and scheme: 50 squared errors plus 5 oracle/empirical rows
    assert len(r) == 7 * 3 * (50 + 5)
    assert set(r["scheme"]) == {scheme_label(s) for s in SCHEMES}


def test_edgeless_model_mse_is_truth_squared():
    model = RcmSpec(UniformCube(2), HardThreshold(0.0), (0.5, 0.5))
    res = run_mse_study(_cfg(model, replicates=1, n_grid=(10,), truth_samples=1000))
    sq = res.records[res.records["statistic"] == "sq_error"]
    truth = res.truths[10].value
    assert np.all(sq["value"] == truth**2)


def test_aggregates_recompute_from_records():
    res = run_mse_study(_cfg(replicates=15))
    agg = res.aggregates
    r = res.records[res.records["flags"] == ""]
    for _, row in agg.sample(40, random_state=0).iterrows():
        sel = r[(r["n"] == row["n"]) & (r["scheme"] == row["scheme"]) & (r["m"] == row["m"])
                & (r["statistic"] == row["statistic"])]["value"]
        assert row["count"] == len(sel)
        # group-wise sums may associate differently from a flat sum
        assert row["mean"] == pytest.approx(sel.mean(), rel=1e-12, abs=1e-18)
        assert row["median"] == sel.median()


def test_aggregate_counts_censored_rows():
    recs = pd.DataFrame({"n": [5, 5, 5], "replicate": [0, 1, 2], "scheme": ["s"] * 3, "m": [0, 0, 0],
                         "statistic": ["log_ratio"] * 3, "value": [1.0, 0.0, 3.0],
                         "flags": ["", "censored:exact-empirical", ""]})
    row = aggregate(recs).iloc[0]
    assert (row["count"], row["censored"], row["mean"]) == (2, 1, 2.0)


def test_oracle_dominates_every_m():
    r = run_mse_study(_cfg(replicates=30)).records
    for (rep, scheme), f in r.groupby(["replicate", "scheme"]):
        oracle = f.loc[f["statistic"] == "oracle_error", "value"].iloc[0]
        emp = f.loc[f["statistic"] == "empirical_error", "value"].iloc[0]
        sq = f.loc[f["statistic"] == "sq_error", "value"]
        assert oracle <= emp
        assert oracle**2 <= sq.min() * (1 + 1e-12)


def test_mse_at_zero_is_binomial_variance():
    # For an RCM the origin degree is exactly Bin(n, p).
    n, reps = 40, 3000
    res = run_mse_study(_cfg(BETA, n_grid=(n,), replicates=reps, m_max=0))
    p = res.truths[n].value
    curve = mse_curve(res.records, n, "constant-one")
    mse0, se0 = curve.loc[0, "mse"], curve.loc[0, "se"]
    assert abs(mse0 - p * (1 - p) / n) < 3 * se0


def test_growing_sbm_truths_are_closed_form():
    grid = (101, 301, 1001)
    res = run_mse_study(ExperimentConfig("growing-sbm", SCHEMES, grid, replicates=1, m_max=3))
    for n in grid:
        assert res.truths[n].value == sbm_truth(growing_sbm(n)).value
        assert res.truths[n].value == pytest.approx(3 * math.log(n) / n, rel=0.05)


def test_mccv_complete_graph_is_censored():
    model = SbmSpec((6, 6), (1.0, 1.0), 1.0)
    r = run_mccv_study(_cfg(model, n_grid=(12,), replicates=3)).records
    lr = r[r["statistic"] == "log_ratio"]
    assert np.all(lr["flags"] == "censored:exact-empirical")
    # SBM degrees are normalised by n = 12, so every origin degree 11 gives 11/12
    assert np.all(r.loc[r["statistic"] == "estimate", "value"] == 11 / 12)
    assert log_ratio_values(r).empty


def test_mccv_small_instance_is_reproducible():
    model = SbmSpec((3, 3), (0.7, 0.6), 0.3)
    a = run_mccv_study(_cfg(model, n_grid=(6,), replicates=5, plan=SplitPlan(7)))
    b = run_mccv_study(_cfg(model, n_grid=(6,), replicates=5, plan=SplitPlan(7)))
    assert a.records.to_csv(index=False) == b.records.to_csv(index=False)


def test_mccv_best_of_schemes_rows():
    r = run_mccv_study(_cfg(replicates=4)).records
    best = r[r["scheme"] == "best-of-schemes"]
    assert sorted(best["statistic"].unique()) == ["estimate", "selected_scheme"]
    assert len(best) == 8


def test_stability_single_split_twice():
    g = sample_sbm_graph(EXAMPLE_SBM, np.random.default_rng(1))
    a = run_mccv_stability(g, ConstantOne(), [1], seed=5)
    b = run_mccv_stability(g, ConstantOne(), [1], seed=5)
    assert a.to_csv() == b.to_csv()


def test_stability_grid_and_standard_error_scaling():
    g = sample_sbm_graph(EXAMPLE_SBM, np.random.default_rng(3))
    grid = [10 * 2**i for i in range(8)]
    res = run_mccv_stability(g, Geometric(0.1), grid, seed=11)
    assert list(res.minimizers) == grid
    assert 0 <= res.last_change < len(grid)
    c = res.curves
    m = 3
    se = {M: c[(c["M"] == M) & (c["m"] == m)]["se"].iloc[0] for M in (80, 320, 1280)}
    # quadrupling M halves the standard error (up to noise in the sd estimate)
    assert se[320] / se[80] == pytest.approx(0.5, rel=0.3)
    assert se[1280] / se[320] == pytest.approx(0.5, rel=0.3)


def test_stability_minimizer_stable_under_doubling():
    g = sample_sbm_graph(EXAMPLE_SBM, np.random.default_rng(3))
    res = run_mccv_stability(g, Geometric(0.1), [640, 1280, 2560], seed=11)
    assert res.minimizers[1280] == res.minimizers[2560]


def test_wireless_study_small():
    model = RcmSpec(UniformCube(2), HardThreshold(0.15), (0.5, 0.5))
    res = run_wireless_study(_cfg(model, n_grid=(60,), replicates=4, truth_samples=50_000,
                                  verify_replicates=2000))
    r = res.records
    assert set(r["statistic"]) >= {"p_hat", "n_bar", "verify_mean", "verify_first"}
    p = res.truths["truth"].value
    assert res.extra["n0"] >= 1
    assert (1 - p) ** res.extra["n0"] <= 0.1
    nbar = r[(r["statistic"] == "n_bar") & (r["flags"] == "")]
    assert np.all(nbar["value"] >= 1)


def test_wireless_needs_rcm():
    with pytest.raises(ValueError):
        run_wireless_study(_cfg())


def test_design_empty_cell():
    res = run_design_benchmark(_cfg(n_grid=(50,), replicates=0, truth_samples=1000), ["uniform"])
    assert res.records.empty
    assert len(res.extra["truth_table"]) == 3


def test_design_uniform_centre_truth():
    res = run_design_benchmark(_cfg(n_grid=(50,), replicates=0, truth_samples=10**6), ["uniform"])
    t = res.truths["uniform/2/n=50"]
    ball = 4 / 3 * math.pi * 0.2**3
    assert abs(t.value - ball) < 3 * t.stderr


def test_design_model_thresholds():
    assert design_model("gaussian-mixture", 75, (0, 0)).cf == HardThreshold(0.5)
    with pytest.raises(ValueError):
        design_model("gaussian-mixture", 60, (0, 0))
    with pytest.raises(ValueError):
        design_model("cauchy", 50, (0,))


def test_design_records_carry_cell(tmp_path):
    res = run_design_benchmark(_cfg(n_grid=(50,), replicates=2, truth_samples=1000, out_dir=str(tmp_path)),
                               ["beta"])
    assert set(res.records["cell"]) == {"beta/0", "beta/1", "beta/2"}
    assert (tmp_path / "design_beta_0_records.csv").exists()
    back = pd.read_csv(tmp_path / "design_records.csv", keep_default_na=False)
    assert list(back.columns) == RECORD_COLUMNS + ["cell"]


def test_write_outputs(tmp_path):
    res = run_mse_study(_cfg(replicates=2, out_dir=str(tmp_path)))
    manifest = json.loads((tmp_path / "mse_manifest.json").read_text())
    assert manifest["seed"] == 99
    assert manifest["study"] == "mse"
    assert manifest["truths"]["50"]["value"] == 0.062
    back = pd.read_csv(tmp_path / "mse_records.csv", keep_default_na=False)
    assert list(back.columns) == RECORD_COLUMNS
    assert len(back) == len(res.records)


@pytest.mark.parametrize("runner", [run_mse_study, run_mccv_study])
def test_thread_count_does_not_change_output(tmp_path, monkeypatch, runner):
    outputs = []
    for threads in ("1", "2"):
        monkeypatch.setenv(THREADS_ENV, threads)
        out = tmp_path / threads
        runner(_cfg(replicates=6, out_dir=str(out)))
        outputs.append(sorted((p.name, p.read_bytes()) for p in out.iterdir()))
    assert outputs[0] == outputs[1]


def test_origin_isolated_graph_in_mse_study():
    # sanity: the trace machinery tolerates a lone origin
    model = SbmSpec((1, 4), (0.0, 0.0), 0.0)
    r = run_mse_study(_cfg(model, n_grid=(5,), replicates=2)).records
    assert np.all(r.loc[r["statistic"] == "sq_error", "value"] == 0.0)
    assert from_edges(1, []).n_other == 0
