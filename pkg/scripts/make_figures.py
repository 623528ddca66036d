"""Regenerate result CSVs and SVG charts for every study.

Usage: python3 scripts/make_figures.py [--out results] [--quick] [figure ...]

Figures: mse, growing, stability, mccv, wireless, design, cities. With no names,
all of them are produced. ``--quick`` cuts replicate counts for a smoke run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from localdeg.cli import main as cli
from localdeg.config import build_model, build_schemes, load_config
from localdeg.estimator import estimate_trace, scheme_label
from localdeg.experiments import log_ratio_values
from localdeg.graph import bfs_annuli
from localdeg.mccv import SplitPlan, split_residuals
from localdeg.model import model_truth, sample_graph
from localdeg.rng import child_seed, substream
from localdeg.svg import ChartSpec, render_svg

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def _run(argv: list[str]) -> None:
    code = cli(argv)
    if code:
        sys.exit(f"command failed ({code}): localdeg {' '.join(argv)}")


def _records(out: Path, name: str) -> pd.DataFrame:
    return pd.read_csv(out / f"{name}_records.csv", keep_default_na=False)


def _mse_table(r: pd.DataFrame) -> pd.DataFrame:
    sq = r[r["statistic"] == "sq_error"]
    g = sq.groupby(["n", "scheme", "m"])["value"]
    return pd.DataFrame({"mse": g.mean(), "se": g.std(ddof=1) / np.sqrt(g.size())}).reset_index()


def fig_mse(out: Path, reps: list[str]) -> None:
    d = out / "mse"
    _run(["study", "mse", "--config", str(CONFIGS / "sbm_example.cfg"), "--out-dir", str(d), *reps])
    table = _mse_table(_records(d, "mse"))
    table.to_csv(d / "mse_curve.csv", index=False)
    render_svg(d / "mse_curve.csv", ChartSpec("line", "m", "mse", "scheme", "MSE against m"), d / "mse_curve.svg")


def fig_growing(out: Path, reps: list[str]) -> None:
    d = out / "growing"
    _run(["study", "mse", "--config", str(CONFIGS / "growing_sbm.cfg"), "--out-dir", str(d), *reps])
    r = _records(d, "mse")
    rows = []
    for (n, scheme), f in r.groupby(["n", "scheme"]):
        sq = f[f["statistic"] == "sq_error"]
        oracle = f.loc[f["statistic"] == "oracle_error", "value"] ** 2
        rows.append({"n": n, "scheme": scheme, "mse_empirical": sq.loc[sq["m"] == 0, "value"].mean(),
                     "mse_oracle": oracle.mean()})
    table = pd.DataFrame(rows)
    table.to_csv(d / "growing_summary.csv", index=False)
    render_svg(d / "growing_summary.csv", ChartSpec("line", "n", "mse_oracle", "scheme", "oracle MSE against n"),
               d / "growing_oracle.svg")


def fig_stability(out: Path, reps: list[str]) -> None:
    d = out / "stability"
    _run(["study", "stability", "--config", str(CONFIGS / "sbm_example.cfg"), "--out-dir", str(d)])
    for path in sorted(d.glob("stability_*.csv")):
        render_svg(path, ChartSpec("line", "m", "risk", "M", f"MCCV risk, {path.stem[10:]}"),
                   path.with_suffix(".svg"))


def fig_mccv(out: Path, reps: list[str]) -> None:
    d = out / "mccv"
    _run(["study", "mccv", "--config", str(CONFIGS / "sbm_example.cfg"), "--out-dir", str(d), *reps])
    lr = log_ratio_values(_records(d, "mccv"))
    lr = lr[np.isfinite(lr["value"])]
    lr[["scheme", "value"]].to_csv(d / "mccv_log_ratio.csv", index=False)
    print(lr.groupby("scheme")["value"].median().to_string())
    render_svg(d / "mccv_log_ratio.csv", ChartSpec("box", "scheme", "value", title="log error ratio, MCCV"),
               d / "mccv_log_ratio.svg")


def fig_wireless(out: Path, reps: list[str]) -> None:
    d = out / "wireless"
    _run(["study", "wireless", "--config", str(CONFIGS / "wireless.cfg"), "--out-dir", str(d), *reps])
    r = _records(d, "wireless")
    nbar = r[(r["statistic"] == "n_bar") & (r["flags"] == "")]
    nbar[["n", "scheme", "value"]].to_csv(d / "wireless_nbar.csv", index=False)
    render_svg(d / "wireless_nbar.csv", ChartSpec("box", "n", "value", title="estimated n-bar"),
               d / "wireless_nbar.svg")


def fig_design(out: Path, reps: list[str]) -> None:
    d = out / "design"
    _run(["study", "design", "--config", str(CONFIGS / "design.cfg"), "--out-dir", str(d), *reps])
    r = pd.read_csv(d / "design_records.csv", keep_default_na=False)
    lr = log_ratio_values(r)
    lr = lr[np.isfinite(lr["value"])]
    lr[["cell", "n", "scheme", "value"]].to_csv(d / "design_log_ratio.csv", index=False)
    render_svg(d / "design_log_ratio.csv", ChartSpec("box", "cell", "value", title="log error ratio by cell"),
               d / "design_log_ratio.svg")


def fig_cities(out: Path, reps: list[str]) -> None:
    d = out / "cities"
    d.mkdir(parents=True, exist_ok=True)
    cfg = load_config(CONFIGS / "cities.cfg")
    model, schemes = build_model(cfg), build_schemes(cfg)
    seed = cfg.get("run", "seed", 0)
    g = sample_graph(model, cfg.require("model", "n"), substream(seed, 0))
    truth = model_truth(model).value
    res = split_residuals(g, schemes, SplitPlan(cfg.get("mccv", "M", 100), 0.5, child_seed(substream(seed, 99))))
    ann = bfs_annuli(g)
    frames, summary = [], []
    for s, scheme in enumerate(schemes):
        tr = estimate_trace(g, scheme, ann)
        m_hat = res.curve(s).m_hat
        frames.append(pd.DataFrame({"m": np.arange(len(tr.values)), "estimate": tr.values,
                                    "scheme": scheme_label(scheme)}))
        summary.append({"scheme": scheme_label(scheme), "m_hat": m_hat, "estimate": tr.at(m_hat),
                        "empirical": tr.values[0], "truth": truth})
    pd.concat(frames).to_csv(d / "cities_trace.csv", index=False)
    pd.DataFrame(summary).to_csv(d / "cities_summary.csv", index=False)
    print(pd.DataFrame(summary).to_string(index=False))
    render_svg(d / "cities_trace.csv", ChartSpec("line", "m", "estimate", "scheme", "city graph trace"),
               d / "cities_trace.svg")


FIGURES = {"mse": fig_mse, "growing": fig_growing, "stability": fig_stability, "mccv": fig_mccv,
           "wireless": fig_wireless, "design": fig_design, "cities": fig_cities}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("figures", nargs="*", metavar="figure", help=", ".join(FIGURES))
    p.add_argument("--out", default=str(ROOT / "results"))
    p.add_argument("--quick", action="store_true", help="20 replicates per study")
    args = p.parse_args()
    unknown = [f for f in args.figures if f not in FIGURES]
    if unknown:
        p.error(f"unknown figure(s): {', '.join(unknown)}")
    out = Path(args.out)
    reps = ["--replicates", "20"] if args.quick else []
    for name in args.figures or FIGURES:
        print(f"== {name}")
        FIGURES[name](out, reps)


if __name__ == "__main__":
    main()
