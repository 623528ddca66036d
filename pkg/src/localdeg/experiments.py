"""Seeded replication harness for the simulation studies.

Every (n, replicate) cell draws from its own substream of the master seed, so
results are identical for any worker count. Results are long-form records
with columns ``n, replicate, scheme, m, statistic, value, flags``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd

from . import __version__
from .analysis import verify_connectivity, wireless_min_n
from .estimator import DEFAULT_SCHEMES, WeightScheme, estimate_trace, scheme_label
from .graph import Graph, bfs_annuli, induced_subgraph
from .mccv import SplitPlan, split_residuals
from .model import (
    BetaScalar,
    GaussianMixture,
    HardThreshold,
    Model,
    RcmSpec,
    SbmSpec,
    TruthValue,
    UniformCube,
    growing_sbm,
    model_truth,
    sample_graph,
)
from .rng import child_seed, ordered_map, substream

RECORD_COLUMNS = ["n", "replicate", "scheme", "m", "statistic", "value", "flags"]

# Stream namespaces, so different studies never share random numbers.
_MSE, _MCCV, _WIRELESS, _DESIGN, _TRUTH, _VERIFY, _HALF = range(1, 8)


@dataclass(frozen=True)
class ExperimentConfig:
    """``model`` is a model spec, or ``"growing-sbm"`` for the family indexed by n.

    For an RCM model, n is the number of features (non-origin vertices); for a
    fixed SBM the grid must hold its size.
    """

    model: Union[Model, str]
    schemes: tuple[WeightScheme, ...] = DEFAULT_SCHEMES
    n_grid: tuple[int, ...] = (50,)
    replicates: int = 1000
    plan: SplitPlan = field(default_factory=SplitPlan)
    seed: int = 0
    out_dir: str | None = None
    truth_samples: int = 10**6
    m_max: int | None = None
    q: float = 0.9
    verify_replicates: int = 10**5

    def __post_init__(self) -> None:
        if self.replicates < 0:
            raise ValueError("replicates must be non-negative")
        if len(self.n_grid) == 0:
            raise ValueError("n grid must not be empty")
        if isinstance(self.model, str) and self.model != "growing-sbm":
            raise ValueError(f"unknown model family {self.model!r}")
        if isinstance(self.model, SbmSpec) and any(n != self.model.n for n in self.n_grid):
            raise ValueError(f"a fixed SBM has n = {self.model.n}; n grid {self.n_grid} does not match")
        if not self.schemes:
            raise ValueError("at least one weight scheme is required")

    def model_at(self, n: int) -> Model:
        if self.model == "growing-sbm":
            return growing_sbm(n)
        return self.model

    def manifest(self) -> dict:
        return {
            "toolkit_version": __version__,
            "model": describe_model(self.model),
            "schemes": [scheme_label(s) for s in self.schemes],
            "n_grid": list(self.n_grid),
            "replicates": self.replicates,
            "split_plan": {"M": self.plan.M, "fraction": self.plan.fraction, "seed": self.plan.seed},
            "seed": self.seed,
            "truth_samples": self.truth_samples,
            "m_max": self.m_max,
            "q": self.q,
            "verify_replicates": self.verify_replicates,
        }


def describe_model(model) -> dict | str:
    if isinstance(model, str):
        return model
    if isinstance(model, SbmSpec):
        return {"kind": "sbm", "sizes": list(model.sizes), "p": list(model.p), "q": model.q,
                "origin_community": model.origin_community}
    d = model.dist
    if isinstance(d, BetaScalar):
        dist = {"kind": "beta", "a": d.a, "b": d.b}
    elif isinstance(d, GaussianMixture):
        dist = {"kind": "gaussian-mixture", "weights": d.weights.tolist(), "means": d.means.tolist(),
                "covariances": d.covariances.tolist(), "box": None if d.box is None else d.box.tolist()}
    elif isinstance(d, UniformCube):
        dist = {"kind": "uniform-cube", "d": d.d}
    else:
        dist = {"kind": "empirical", "points": len(d.points)}
    cf = model.cf
    cfd = {"kind": "hard-threshold", "alpha": cf.alpha} if isinstance(cf, HardThreshold) else \
        {"kind": "exponential-decay", "rate": cf.rate}
    return {"kind": "rcm", "distribution": dist, "connection": cfd, "origin": model.origin.tolist(),
            "edge_mode": model.edge_mode, "metric": model.metric}


@dataclass
class ExperimentResult:
    name: str
    records: pd.DataFrame
    manifest: dict
    truths: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def aggregates(self) -> pd.DataFrame:
        return aggregate(self.records)

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        extra = [c for c in self.records.columns if c not in RECORD_COLUMNS]
        self.records[RECORD_COLUMNS + extra].to_csv(out / f"{self.name}_records.csv", index=False)
        self.aggregates.to_csv(out / f"{self.name}_aggregates.csv", index=False)
        manifest = dict(self.manifest)
        manifest["study"] = self.name
        manifest["truths"] = {str(k): _truth_dict(v) for k, v in self.truths.items()}
        manifest.update({k: v for k, v in self.extra.items() if _jsonable(v)})
        (out / f"{self.name}_manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return out


def _truth_dict(t: TruthValue) -> dict:
    return {"value": t.value, "method": t.method, "samples": t.samples, "stderr": t.stderr}


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def aggregate(records: pd.DataFrame) -> pd.DataFrame:
    """Mean, sd and quartiles per (n, scheme, m, statistic); flagged rows only counted."""
    if records.empty:
        return pd.DataFrame(columns=["n", "scheme", "m", "statistic", "count", "censored",
                                     "mean", "sd", "q25", "median", "q75"])
    keys = ["n", "scheme", "m", "statistic"]
    clean = records[records["flags"] == ""]
    g = clean.groupby(keys, sort=True)["value"]
    agg = pd.DataFrame({
        "count": g.size(),
        "mean": g.mean(),
        "sd": g.std(ddof=1),
        "q25": g.quantile(0.25),
        "median": g.median(),
        "q75": g.quantile(0.75),
    })
    cens = records[records["flags"] != ""].groupby(keys, sort=True).size().rename("censored")
    agg = agg.join(cens, how="outer").fillna({"count": 0, "censored": 0})
    agg["count"] = agg["count"].astype(np.int64)
    agg["censored"] = agg["censored"].astype(np.int64)
    return agg.reset_index()[["n", "scheme", "m", "statistic", "count", "censored", "mean", "sd", "q25", "median", "q75"]]


class _Rows:
    """Column-wise record accumulator."""

    def __init__(self) -> None:
        self.cols: dict[str, list] = {c: [] for c in RECORD_COLUMNS}

    def add(self, n, rep, scheme, m, stat, value, flags="") -> None:
        m = np.atleast_1d(m)
        value = np.atleast_1d(np.asarray(value, dtype=float))
        k = max(len(m), len(value))
        self.cols["n"].append(np.full(k, n, dtype=np.int64))
        self.cols["replicate"].append(np.full(k, rep, dtype=np.int64))
        self.cols["scheme"].append(np.full(k, scheme, dtype=object))
        self.cols["m"].append(np.broadcast_to(m, k).astype(np.int64))
        self.cols["statistic"].append(np.full(k, stat, dtype=object))
        self.cols["value"].append(np.broadcast_to(value, k).astype(float))
        self.cols["flags"].append(np.full(k, flags, dtype=object))

    def frame(self) -> pd.DataFrame:
        if not self.cols["n"]:
            return pd.DataFrame({c: pd.Series(dtype=t) for c, t in zip(
                RECORD_COLUMNS, ["int64", "int64", "object", "int64", "object", "float64", "object"])})
        return pd.DataFrame({c: np.concatenate(v) for c, v in self.cols.items()})


def _concat(frames: Sequence[pd.DataFrame]) -> pd.DataFrame:
    frames = [f for f in frames if not f.empty]
    if not frames:
        return _Rows().frame()
    return pd.concat(frames, ignore_index=True)


def _truth_for(cfg: ExperimentConfig, ni: int, n: int) -> TruthValue:
    return model_truth(cfg.model_at(n), substream(cfg.seed, _TRUTH, ni), cfg.truth_samples)


def _log_ratio(num: float, den: float) -> tuple[float, str]:
    """log(num/den); undefined ratios are stored as 0 with a censoring flag."""
    if den == 0.0:
        return 0.0, "censored:exact-empirical"
    if num == 0.0:
        return 0.0, "censored:exact-estimate"
    return math.log(num / den), ""


def log_ratio_values(records: pd.DataFrame, statistic: str = "log_ratio") -> pd.DataFrame:
    """Log-ratio records with exact-estimate censoring mapped to -inf, exact-empirical rows dropped."""
    r = records[(records["statistic"] == statistic) & (records["flags"] != "censored:exact-empirical")].copy()
    r.loc[r["flags"] == "censored:exact-estimate", "value"] = -np.inf
    return r


# ---------------------------------------------------------------------------
# MSE / oracle study


def _mse_cell(args) -> pd.DataFrame:
    cfg, ni, n, rep, truth = args
    model = cfg.model_at(n)
    rng = substream(cfg.seed, _MSE, ni, rep)
    g = sample_graph(model, n, rng)
    ann = bfs_annuli(g)
    cap = g.n_other if cfg.m_max is None else cfg.m_max
    ms = np.arange(cap + 1)
    rows = _Rows()
    for scheme in cfg.schemes:
        label = scheme_label(scheme)
        tr = estimate_trace(g, scheme, ann)
        vals = tr.padded(cap + 1)
        rows.add(n, rep, label, ms, "sq_error", (vals - truth) ** 2)
        err = np.abs(tr.values - truth)
        m_star = int(np.argmin(err))
        rows.add(n, rep, label, m_star, "oracle_m", m_star)
        rows.add(n, rep, label, m_star, "oracle_estimate", tr.values[m_star])
        rows.add(n, rep, label, m_star, "oracle_error", err[m_star])
        rows.add(n, rep, label, 0, "empirical_error", err[0])
        lr, flag = _log_ratio(err[m_star], err[0])
        rows.add(n, rep, label, m_star, "oracle_log_ratio", lr, flag)
    return rows.frame()


def run_mse_study(cfg: ExperimentConfig) -> ExperimentResult:
    """Squared error of every trace value against the truth, plus the oracle m*."""
    truths = {n: _truth_for(cfg, ni, n) for ni, n in enumerate(cfg.n_grid)}
    cells = [(cfg, ni, n, rep, truths[n].value) for ni, n in enumerate(cfg.n_grid) for rep in range(cfg.replicates)]
    records = _concat(ordered_map(_mse_cell, cells))
    res = ExperimentResult("mse", records, cfg.manifest(), truths)
    if cfg.out_dir:
        res.write(cfg.out_dir)
    return res


def mse_curve(records: pd.DataFrame, n: int, scheme: str) -> pd.DataFrame:
    """MSE(m) with Monte Carlo standard errors."""
    r = records[(records["n"] == n) & (records["scheme"] == scheme) & (records["statistic"] == "sq_error")]
    g = r.groupby("m")["value"]
    return pd.DataFrame({"mse": g.mean(), "se": g.std(ddof=1) / np.sqrt(g.size())}).reset_index()


# ---------------------------------------------------------------------------
# MCCV study


def _mccv_cell(args) -> pd.DataFrame:
    cfg, ni, n, rep, truth = args
    model = cfg.model_at(n)
    rng = substream(cfg.seed, _MCCV, ni, rep)
    g = sample_graph(model, n, rng)
    plan = SplitPlan(cfg.plan.M, cfg.plan.fraction, child_seed(rng))
    res = split_residuals(g, cfg.schemes, plan)
    ann = bfs_annuli(g)
    rows = _Rows()
    best = None
    for s, scheme in enumerate(cfg.schemes):
        label = scheme_label(scheme)
        curve = res.curve(s)
        m_hat = curve.m_hat
        tr = estimate_trace(g, scheme, ann)
        est = tr.at(m_hat)
        p0 = float(tr.values[0])
        rows.add(n, rep, label, m_hat, "m_hat", m_hat)
        rows.add(n, rep, label, m_hat, "estimate", est)
        rows.add(n, rep, label, 0, "empirical", p0)
        lr, flag = _log_ratio(abs(est - truth), abs(p0 - truth))
        rows.add(n, rep, label, m_hat, "log_ratio", lr, flag)
        rmin = float(curve.risk[m_hat])
        if best is None or rmin < best[0]:
            best = (rmin, s, m_hat, est)
    # Joint selection over schemes and m.
    _, s, m_hat, est = best
    rows.add(n, rep, "best-of-schemes", m_hat, "selected_scheme", s)
    rows.add(n, rep, "best-of-schemes", m_hat, "estimate", est)
    return rows.frame()


def run_mccv_study(cfg: ExperimentConfig) -> ExperimentResult:
    """Per replicate: MCCV-selected m, the resulting estimate and its log error ratio."""
    truths = {n: _truth_for(cfg, ni, n) for ni, n in enumerate(cfg.n_grid)}
    cells = [(cfg, ni, n, rep, truths[n].value) for ni, n in enumerate(cfg.n_grid) for rep in range(cfg.replicates)]
    records = _concat(ordered_map(_mccv_cell, cells))
    res = ExperimentResult("mccv", records, cfg.manifest(), truths)
    if cfg.out_dir:
        res.write(cfg.out_dir)
    return res


# ---------------------------------------------------------------------------
# MCCV stability


@dataclass
class StabilityResult:
    curves: pd.DataFrame  # columns M, m, risk, se
    minimizers: dict[int, int]

    @property
    def last_change(self) -> int:
        """Index into the M grid of the last change of minimizer (0 if it never moves)."""
        ms = list(self.minimizers.values())
        last = 0
        for i in range(1, len(ms)):
            if ms[i] != ms[i - 1]:
                last = i
        return last

    def to_csv(self, path: str | Path | None = None) -> str:
        text = self.curves.to_csv(index=False)
        if path is not None:
            Path(path).write_text(text)
        return text


def run_mccv_stability(
    g: Graph, scheme: WeightScheme, M_grid: Sequence[int], seed: int, fraction: float = 0.5
) -> StabilityResult:
    """Risk curves for increasing M; smaller runs use a prefix of the larger run's splits."""
    M_grid = sorted(int(m) for m in M_grid)
    res = split_residuals(g, [scheme], SplitPlan(M_grid[-1], fraction, seed))
    frames = []
    minimizers = {}
    sq = res.sq[0]
    for M in M_grid:
        curve = res.curve(0, M)
        cap = curve.m_cap
        se = sq[:M, : cap + 1].std(axis=0, ddof=1) / math.sqrt(M) if M > 1 else np.full(cap + 1, np.nan)
        frames.append(pd.DataFrame({"M": M, "m": np.arange(cap + 1), "risk": curve.risk, "se": se}))
        minimizers[M] = curve.m_hat
    return StabilityResult(pd.concat(frames, ignore_index=True), minimizers)


# ---------------------------------------------------------------------------
# MCCV bias profile


@dataclass
class BiasProfile:
    """E R(m), MSE at half size, and their difference with standard errors."""

    risk: np.ndarray  # (replicates, cap + 1) per-replicate R(m)
    half_sq: np.ndarray  # (replicates, cap + 1) squared errors on half-size graphs
    scheme: str

    @property
    def difference(self) -> np.ndarray:
        return self.risk.mean(axis=0) - self.half_sq.mean(axis=0)

    def shift_from(self, m0: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """D(m) - D(m0) and its standard error."""
        a = self.risk - self.risk[:, [m0]]
        b = self.half_sq - self.half_sq[:, [m0]]
        d = a.mean(axis=0) - b.mean(axis=0)
        se = np.sqrt(a.var(axis=0, ddof=1) / len(a) + b.var(axis=0, ddof=1) / len(b))
        return d, se


def _holdout_target(model: Model, truth: float) -> float:
    """Expected empirical estimate on a subgraph: expected origin degree per non-origin vertex."""
    if isinstance(model, SbmSpec):
        return truth * model.n / (model.n - 1)
    return truth


def _bias_cell(args):
    model, n, schemes, M, fraction, seed, rep, target, cap = args
    rng = substream(seed, _MCCV, 0, rep)
    g = sample_graph(model, n, rng)
    res = split_residuals(g, schemes, SplitPlan(M, fraction, child_seed(rng)))
    risks = []
    for s in range(len(schemes)):
        r = res.sq[s].mean(axis=0)
        risks.append(np.concatenate([r, np.full(cap + 1 - len(r), r[-1])])[: cap + 1])
    hrng = substream(seed, _HALF, 0, rep)
    h = sample_graph(model, n, hrng)
    train = SplitPlan(1, fraction, child_seed(hrng)).split(h.n_other, 0)
    sub, _ = induced_subgraph(h, np.concatenate([[0], train]))
    ann = bfs_annuli(sub)
    halves = [(estimate_trace(sub, sc, ann).padded(cap + 1) - target) ** 2 for sc in schemes]
    return risks, halves


def run_mccv_bias_profile(
    model: Model,
    schemes: Sequence[WeightScheme],
    replicates: int,
    M: int,
    seed: int,
    n: int | None = None,
    fraction: float = 0.5,
    truth_samples: int = 10**6,
) -> list[BiasProfile]:
    """Check that E R(m) minus the half-size MSE does not depend on m.

    Half-size graphs are drawn independently: a fresh graph reduced to a random
    floor(f n) subset of its non-origin vertices, scored against the expected
    hold-out estimate.
    """
    schemes = tuple(schemes)
    truth = model_truth(model, substream(seed, _TRUTH, 0), truth_samples).value
    target = _holdout_target(model, truth)
    n_other = model.n - 1 if isinstance(model, SbmSpec) else int(n)
    cap = int(math.floor(fraction * n_other))
    cells = [(model, n, schemes, M, fraction, seed, rep, target, cap) for rep in range(replicates)]
    out = ordered_map(_bias_cell, cells)
    profiles = []
    for s, sc in enumerate(schemes):
        risk = np.array([o[0][s] for o in out])
        half = np.array([o[1][s] for o in out])
        profiles.append(BiasProfile(risk, half, scheme_label(sc)))
    return profiles


# ---------------------------------------------------------------------------
# wireless sizing study


def _wireless_cell(args) -> pd.DataFrame:
    cfg, ni, n, rep = args
    model = cfg.model_at(n)
    rng = substream(cfg.seed, _WIRELESS, ni, rep)
    g = sample_graph(model, n, rng)
    res = split_residuals(g, cfg.schemes, SplitPlan(cfg.plan.M, cfg.plan.fraction, child_seed(rng)))
    ann = bfs_annuli(g)
    rows = _Rows()
    for s, scheme in enumerate(cfg.schemes):
        label = scheme_label(scheme)
        m_hat = res.curve(s).m_hat
        p_hat = estimate_trace(g, scheme, ann).at(m_hat)
        rows.add(n, rep, label, m_hat, "p_hat", p_hat)
        if 0.0 < p_hat < 1.0:
            rows.add(n, rep, label, m_hat, "n_bar", wireless_min_n(p_hat, cfg.q))
        else:
            rows.add(n, rep, label, m_hat, "n_bar", 0.0, "censored:degenerate-p")
    return rows.frame()


def run_wireless_study(cfg: ExperimentConfig) -> ExperimentResult:
    """Estimate p per scheme with MCCV, size the network, then check the sizes by simulation."""
    if not isinstance(cfg.model, RcmSpec):
        raise ValueError("the wireless study needs an RCM model")
    truth = _truth_for(cfg, 0, cfg.n_grid[0])
    n0 = wireless_min_n(truth.value, cfg.q)
    cells = [(cfg, ni, n, rep) for ni, n in enumerate(cfg.n_grid) for rep in range(cfg.replicates)]
    records = _concat(ordered_map(_wireless_cell, cells))
    rows = _Rows()
    label = scheme_label(cfg.schemes[0])
    for ni, n in enumerate(cfg.n_grid):
        sel = records[(records["n"] == n) & (records["scheme"] == label) & (records["statistic"] == "n_bar")
                      & (records["flags"] == "")]
        if sel.empty:
            continue
        for stat, nbar in (("verify_mean", math.ceil(sel["value"].mean())),
                           ("verify_first", int(sel.sort_values("replicate")["value"].iloc[0]))):
            est = verify_connectivity(cfg.model, nbar, cfg.verify_replicates,
                                      substream(cfg.seed, _VERIFY, ni, len(stat)), p=truth.value)
            rows.add(n, -1, label, nbar, stat, est.value)
    records = _concat([records, rows.frame()])
    res = ExperimentResult("wireless", records, cfg.manifest(), {"truth": truth},
                           {"n0": n0, "connectivity_at_n0": 1.0 - (1.0 - truth.value) ** n0})
    if cfg.out_dir:
        res.write(cfg.out_dir)
    return res


# ---------------------------------------------------------------------------
# design-distribution benchmark

# Reference connection probabilities for (distribution, n) in Low/Medium/High
# column order; logged next to computed truths for comparison only.
REFERENCE_TRUTHS = {
    ("beta", 50): (2.83e-7, 2.51e-2, 5.93e-2), ("beta", 75): (2.06e-7, 2.35e-2, 5.56e-2),
    ("beta", 100): (1.62e-7, 2.24e-2, 5.30e-2),
    ("gaussian-mixture", 50): (3.15e-2, 4.45e-2, 5.50e-2), ("gaussian-mixture", 75): (2.97e-2, 4.21e-2, 5.24e-2),
    ("gaussian-mixture", 100): (2.80e-2, 4.00e-2, 5.00e-2),
    ("uniform", 50): (6.13e-3, 1.20e-2, 2.35e-2), ("uniform", 75): (5.63e-3, 1.10e-2, 2.17e-2),
    ("uniform", 100): (5.18e-3, 1.02e-2, 2.00e-2),
}

DESIGN_ORIGINS = {
    "beta": ((0.5,), (0.1,), (2 / 7,)),
    "gaussian-mixture": ((1.0, 1.0), (0.0, 0.0), (1.75, 1.75)),
    "uniform": ((0.5, 0.0, 0.0), (0.5, 0.5, 0.0), (0.5, 0.5, 0.5)),
}


def design_model(dist_name: str, n: int, origin) -> RcmSpec:
    if dist_name == "beta":
        return RcmSpec(BetaScalar(2, 5), HardThreshold(0.01), origin)
    if dist_name == "gaussian-mixture":
        alpha = {50: 0.6, 75: 0.5, 100: 0.4}.get(n)
        if alpha is None:
            raise ValueError("the Gaussian-mixture threshold is only defined for n in {50, 75, 100}")
        mix = GaussianMixture([0.5, 0.5], [[0, 0], [2.75, 2.75]], [[[1, 0], [0, 1]], [[1, 0.75], [0.75, 1]]])
        return RcmSpec(mix, HardThreshold(alpha), origin)
    if dist_name == "uniform":
        return RcmSpec(UniformCube(3), HardThreshold(0.2), origin)
    raise ValueError(f"unknown design distribution {dist_name!r}")


def run_design_benchmark(
    cfg: ExperimentConfig, distributions: Sequence[str] = ("beta", "gaussian-mixture", "uniform")
) -> ExperimentResult:
    """Log error ratios of MCCV-tuned estimates across distributions, sizes and origins.

    ``cfg.model`` is ignored; each cell builds its own model. Records carry an
    extra ``cell`` column (``<distribution>/<origin index>``).
    """
    frames = []
    truths = {}
    truth_rows = []
    for di, name in enumerate(distributions):
        for oi, origin in enumerate(DESIGN_ORIGINS[name]):
            for ni, n in enumerate(cfg.n_grid):
                model = design_model(name, n, origin)
                key = f"{name}/{oi}"
                truth = model_truth(model, substream(cfg.seed, _TRUTH, di, oi, ni), cfg.truth_samples)
                truths[f"{key}/n={n}"] = truth
                reference = REFERENCE_TRUTHS.get((name, n))
                truth_rows.append({"cell": key, "n": n, "origin": list(origin), "p": truth.value,
                                   "method": truth.method, "stderr": truth.stderr,
                                   "reference_values": None if reference is None else list(reference)})
                sub = ExperimentConfig(model, cfg.schemes, (n,), cfg.replicates, cfg.plan,
                                       int(substream(cfg.seed, _DESIGN, di, oi).integers(2**62)),
                                       None, cfg.truth_samples)
                cells = [(sub, ni, n, rep, truth.value) for rep in range(cfg.replicates)]
                f = _concat(ordered_map(_mccv_cell, cells))
                f["cell"] = key
                frames.append(f)
    records = _concat(frames)
    if "cell" not in records:
        records["cell"] = pd.Series(dtype=object)
    res = ExperimentResult("design", records, cfg.manifest(), truths, {"truth_table": truth_rows})
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        res.write(out)
        for key, f in records.groupby("cell", sort=True):
            f[RECORD_COLUMNS].to_csv(out / f"design_{key.replace('/', '_')}_records.csv", index=False)
    return res
