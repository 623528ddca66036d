"""Diagnostics: oracle-bound evaluation, moment condition, CLT check, wireless sizing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .graph import bfs_annuli
from .model import (
    ConnectionFunction,
    FeatureDistribution,
    Model,
    RcmSpec,
    SbmSpec,
    distances,
    local_probabilities,
    model_truth,
    sample_features,
    sample_graph,
)


@dataclass(frozen=True)
class OracleBoundInputs:
    k0: int
    k: int
    gammas: Sequence[float]  # gamma_i indexed from 0; entries k0..k are used
    n: int
    sigma2: float
    initial_error: float  # E |delta_{k0}|^2
    approx: float  # E max_{i in V_{k+1}} |p(X_i) - p(x)|^2

    def __post_init__(self) -> None:
        if not 0 <= self.k0 <= self.k <= self.n:
            raise ValueError("need 0 <= k0 <= k <= n")
        if len(self.gammas) < self.k + 1:
            raise ValueError("gamma sequence shorter than k + 1")
        if not 0.0 <= self.sigma2 <= 0.25:
            raise ValueError("sigma2 must lie in [0, 1/4]")
        if self.initial_error < 0 or self.approx < 0:
            raise ValueError("expectation terms must be non-negative")


def oracle_bound_rhs(inp: OracleBoundInputs) -> float:
    """Right-hand side of the MSE oracle bound, universal constant taken as 1."""
    g = np.asarray(inp.gammas[inp.k0 : inp.k + 1], dtype=float)
    s1 = float(g.sum())
    s2 = float(np.square(g).sum())
    n = inp.n
    noise = (3.0 + 4.0 * inp.sigma2 * math.log(n)) / n if n > 0 else math.inf
    return inp.initial_error * math.exp(-2.0 * s1) + s2 + s1 * s1 * (noise + inp.approx)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


def estimate_sigma2(
    dist: FeatureDistribution, cf: ConnectionFunction, samples: int, rng: np.random.Generator, metric: str = "euclidean"
) -> Estimate:
    """Variance of rho(|X - Y|) over independent X, Y ~ dist (plug-in, so it stays in [0, 1/4])."""
    if samples < 2:
        raise ValueError("need at least two samples")
    x = sample_features(dist, samples, rng)
    y = sample_features(dist, samples, rng)
    pv = cf(distances(x, y, metric))
    dev2 = (pv - pv.mean()) ** 2
    return Estimate(float(dev2.mean()), float(dev2.std(ddof=1) / math.sqrt(samples)))


def _vertex_truths(model: Model, g, rng: np.random.Generator, ref_samples: int) -> np.ndarray:
    if isinstance(model, SbmSpec):
        per = np.array([model.community_truth(j) for j in range(len(model.sizes))])
        return per[g.features]
    return local_probabilities(model.dist, model.cf, g.features, rng, ref_samples, model.metric)


def estimate_approx_term(
    model: Model,
    n: int | None,
    k: int,
    replicates: int,
    rng: np.random.Generator,
    ref_samples: int = 20_000,
) -> Estimate:
    """Monte Carlo mean of max over V_{k+1} of (p(X_i) - p(x))^2.

    For SBM models p(.) is the exact per-community value; for RCM models it is
    estimated from one shared reference sample per replicate.
    """
    vals = np.empty(replicates)
    for r in range(replicates):
        g = sample_graph(model, n, rng)
        ann = bfs_annuli(g)
        members = np.concatenate(ann.layers[: min(k + 1, ann.eccentricity) + 1])
        p = _vertex_truths(model, g, rng, ref_samples)
        vals[r] = float(np.max((p[members] - p[0]) ** 2))
    se = float(vals.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else math.nan
    return Estimate(float(vals.mean()), se)


def check_moment_condition(
    dist: FeatureDistribution,
    cf: ConnectionFunction,
    n: int,
    samples: int,
    rng: np.random.Generator,
    metric: str = "euclidean",
    ref_samples: int = 20_000,
) -> tuple[float, float, float]:
    """(lhs, rhs, lhs/rhs) for [E D^3]^2 versus n [E D^2]^3, D = rho(|X-Y|) - p(X)."""
    x = sample_features(dist, samples, rng)
    y = sample_features(dist, samples, rng)
    px = local_probabilities(dist, cf, x, rng, ref_samples, metric)
    d = cf(distances(x, y, metric)) - px
    lhs = float(np.mean(d**3)) ** 2
    rhs = n * float(np.mean(d**2)) ** 3
    if rhs == 0.0:
        return lhs, rhs, 0.0 if lhs == 0.0 else math.inf
    return lhs, rhs, lhs / rhs


def clt_check(
    model: Model | float,
    n: int,
    replicates: int,
    rng: np.random.Generator,
    full_graph: bool = False,
    truth_samples: int = 10**6,
) -> tuple[np.ndarray, float]:
    """Standardized empirical estimates and their KS distance to N(0, 1).

    ``model`` may be a plain probability. By default the origin degree is drawn
    directly from Bin(n, p); ``full_graph`` samples whole graphs instead.
    """
    if isinstance(model, (int, float)):
        p = float(model)
        if full_graph:
            raise ValueError("full-graph mode needs a model, not a bare probability")
    else:
        p = model_truth(model, rng, truth_samples).value
    if not 0.0 < p < 1.0:
        raise ValueError(f"CLT check needs p in (0, 1), got {p}")
    if full_graph:
        b = np.empty(replicates)
        for r in range(replicates):
            g = sample_graph(model, n, rng)
            b[r] = g.degrees()[0] / g.norm
        nn = model.n if isinstance(model, SbmSpec) else n
    else:
        nn = n
        b = rng.binomial(n, p, size=replicates) / n
    z = math.sqrt(nn * p / (1.0 - p)) * (b / p - 1.0)
    return z, float(stats.kstest(z, "norm").statistic)


def wireless_min_n(p_hat: float, q: float = 0.9) -> int:
    """Smallest n with P(Bin(n, p_hat) > 0) >= q."""
    if not 0.0 < p_hat < 1.0:
        raise ValueError(f"p_hat must lie in (0, 1), got {p_hat}")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    n = max(1, math.ceil(math.log1p(-q) / math.log1p(-p_hat)))
    # Guard the ceiling against rounding in the log ratio.
    while (1.0 - p_hat) ** n > 1.0 - q:
        n += 1
    while n > 1 and (1.0 - p_hat) ** (n - 1) <= 1.0 - q:
        n -= 1
    return n


def verify_connectivity(
    model: RcmSpec,
    n: int,
    replicates: int,
    rng: np.random.Generator,
    p: float | None = None,
    mode: str = "binomial",
    truth_samples: int = 10**6,
) -> Estimate:
    """Fraction of graphs with n non-origin vertices in which the origin has a neighbour.

    ``binomial`` draws B_0 ~ Bin(n, p(x)); ``features`` samples the n features and
    the origin's edges to them.
    """
    if mode == "binomial":
        if p is None:
            p = model_truth(model, rng, truth_samples).value
        hits = rng.binomial(n, p, size=replicates) > 0
    elif mode == "features":
        hits = np.empty(replicates, dtype=bool)
        for r in range(replicates):
            feats = sample_features(model.dist, n, rng)
            prob = model.cf(distances(feats, model.origin, model.metric))
            hits[r] = bool(np.any(prob > rng.random(n)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    frac = float(hits.mean()) if replicates else math.nan
    se = math.sqrt(frac * (1 - frac) / replicates) if replicates else math.nan
    return Estimate(frac, se)


def sbm_sigma2(spec: SbmSpec) -> float:
    """Exact variance of the edge probability of a uniformly random vertex pair."""
    c = np.asarray(spec.sizes, dtype=float)
    n = c.sum()
    p = np.asarray(spec.p)
    same = c * (c - 1) / (n * (n - 1))
    cross = 1.0 - same.sum()
    m1 = float(same @ p + cross * spec.q)
    m2 = float(same @ p**2 + cross * spec.q**2)
    return max(m2 - m1 * m1, 0.0)


def oracle_bound_profile(
    model: Model,
    scheme,
    n: int | None,
    k_max: int,
    replicates: int,
    rng: np.random.Generator,
    k0: int = 0,
    sigma_samples: int = 100_000,
    truth_samples: int = 10**6,
) -> pd.DataFrame:
    """Bound right-hand side next to the simulated MSE of the radius-(k+1) estimate.

    Columns: k, rhs, mse, mse_se, approx. The gamma sequence is averaged over the
    simulated graphs (it is only random for the annulus-size weights). The
    bound holds up to an unspecified constant, so this is a shape diagnostic.
    """
    from .estimator import estimate_pk, gamma_sequence

    truth = model_truth(model, rng, truth_samples).value
    size = model.n if isinstance(model, SbmSpec) else int(n)
    if isinstance(model, SbmSpec):
        sigma2 = sbm_sigma2(model)
    else:
        sigma2 = estimate_sigma2(model.dist, model.cf, sigma_samples, rng, model.metric).value
    errs = np.empty((replicates, k_max + 2))
    approx = np.empty((replicates, k_max + 1))
    gam = np.zeros((replicates, k_max + 1))
    for r in range(replicates):
        g = sample_graph(model, n, rng)
        ann = bfs_annuli(g)
        for k in range(k_max + 2):
            errs[r, k] = (estimate_pk(g, scheme, k, ann) - truth) ** 2
        gs = gamma_sequence(scheme, ann)
        gam[r, : min(len(gs), k_max + 1)] = gs[: k_max + 1]
        p = _vertex_truths(model, g, rng, 5_000)
        for k in range(k_max + 1):
            members = np.concatenate(ann.layers[: min(k + 1, ann.eccentricity) + 1])
            approx[r, k] = float(np.max((p[members] - p[0]) ** 2))
    gmean = gam.mean(axis=0)
    init = float(errs[:, k0].mean())
    rows = []
    for k in range(k0, k_max + 1):
        a = float(approx[:, k].mean())
        rhs = oracle_bound_rhs(OracleBoundInputs(k0, k, gmean, max(size, k + 1), min(sigma2, 0.25), init, a))
        col = errs[:, k + 1]
        rows.append({"k": k, "rhs": rhs, "mse": float(col.mean()),
                     "mse_se": float(col.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else math.nan,
                     "approx": a})
    return pd.DataFrame(rows)
