"""Feature distributions, connection functions, truths and graph samplers.

Two generative models are covered: the random connection model (RCM), where
vertex features are drawn i.i.d. from a distribution F and each pair connects
with probability rho(distance), and the stochastic block model (SBM).
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .graph import Graph, from_edges

EARTH_RADIUS_KM = 6371.0088


# ---------------------------------------------------------------------------
# feature distributions


@dataclass(frozen=True)
class BetaScalar:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Beta parameters must be positive")

    @property
    def dim(self) -> int:
        return 1

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.beta(self.a, self.b, size=n).reshape(n, 1)


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Mixture of Gaussians, optionally restricted to an axis-aligned box.

    ``box`` has shape (d, 2) with per-axis ``[low, high]``; draws outside it are
    rejected and redrawn.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    box: np.ndarray | None = None
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        cov = np.asarray(self.covariances, dtype=float).reshape(len(w), mu.shape[1], mu.shape[1])
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("mixture weights must be non-negative with positive sum")
        if mu.shape[0] != len(w):
            raise ValueError("one mean per mixture component")
        chol = []
        for c in cov:
            if not np.allclose(c, c.T):
                raise ValueError("covariance matrices must be symmetric")
            try:
                chol.append(np.linalg.cholesky(c))
            except np.linalg.LinAlgError:
                raise ValueError("covariance matrices must be positive definite") from None
        object.__setattr__(self, "weights", w / w.sum())
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covariances", cov)
        object.__setattr__(self, "_chol", np.array(chol))
        if self.box is not None:
            box = np.asarray(self.box, dtype=float).reshape(mu.shape[1], 2)
            if np.any(box[:, 0] >= box[:, 1]):
                raise ValueError("truncation box must have low < high on every axis")
            object.__setattr__(self, "box", box)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _raw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(len(self.weights), size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        return self.means[comp] + np.einsum("nij,nj->ni", self._chol[comp], z)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.box is None:
            return self._raw(n, rng)
        out = np.empty((0, self.dim))
        while len(out) < n:
            need = n - len(out)
            draw = self._raw(max(2 * need, 64), rng)
            ok = np.all((draw >= self.box[:, 0]) & (draw <= self.box[:, 1]), axis=1)
            out = np.vstack([out, draw[ok][:need]])
        return out


@dataclass(frozen=True)
class UniformCube:
    d: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.d

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.d))


@dataclass(frozen=True, eq=False)
class Empirical:
    """Finite point set sampled according to ``weights``."""

    points: np.ndarray
    weights: np.ndarray | None = None
    replace: bool = True

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if len(pts) == 0:
            raise ValueError("empirical distribution needs at least one point")
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(pts),):
            raise ValueError("one sampling weight per point")
        if np.any(w < 0) or not np.isfinite(w).all():
            raise ValueError("sampling weights must be finite and non-negative")
        if w.sum() <= 0:
            raise ValueError("sampling weights sum to zero")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w / w.sum())

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(len(self.points), size=n, replace=self.replace, p=self.weights)
        return self.points[idx]


FeatureDistribution = Union[BetaScalar, GaussianMixture, UniformCube, Empirical]


def sample_features(dist: FeatureDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return np.empty((0, dist.dim))
    return dist.sample(n, rng)


# ---------------------------------------------------------------------------
# connection functions


@dataclass(frozen=True)
class HardThreshold:
    alpha: float

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("threshold must be non-negative")

    def __call__(self, r: np.ndarray | float) -> np.ndarray:
        return (np.asarray(r) <= self.alpha).astype(float)


@dataclass(frozen=True)
class ExponentialDecay:
    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ValueError("decay rate must be positive")

    def __call__(self, r: np.ndarray | float) -> np.ndarray:
        return np.exp(-self.rate * np.asarray(r, dtype=float))


ConnectionFunction = Union[HardThreshold, ExponentialDecay]


def distances(a: np.ndarray, b: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Row-wise distances between broadcastable point arrays of shape (..., d)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if metric == "euclidean":
        return np.sqrt(np.sum((a - b) ** 2, axis=-1))
    if metric == "haversine":
        lat1, lon1 = np.radians(a[..., 0]), np.radians(a[..., 1])
        lat2, lon2 = np.radians(b[..., 0]), np.radians(b[..., 1])
        h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
        return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    raise ValueError(f"unknown metric {metric!r}")


# ---------------------------------------------------------------------------
# model specs


@dataclass(frozen=True, eq=False)
class RcmSpec:
    dist: FeatureDistribution
    cf: ConnectionFunction
    origin: np.ndarray
    edge_mode: str = "undirected"
    metric: str = "euclidean"

    def __post_init__(self) -> None:
        x = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if x.shape != (self.dist.dim,):
            raise ValueError(f"origin has dimension {x.shape}, features have {self.dist.dim}")
        if self.edge_mode not in ("undirected", "directed"):
            raise ValueError("edge_mode must be 'undirected' or 'directed'")
        object.__setattr__(self, "origin", x)


@dataclass(frozen=True)
class SbmSpec:
    """Block model with fixed community sizes; ``sizes`` includes the origin."""

    sizes: tuple[int, ...]
    p: tuple[float, ...]
    q: float
    origin_community: int = 1  # 1-based

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(int(c) for c in self.sizes))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.sizes) == 0 or len(self.sizes) != len(self.p):
            raise ValueError("need one intra-community probability per community")
        if any(c < 1 for c in self.sizes):
            raise ValueError("community sizes must be positive")
        if not all(0.0 <= v <= 1.0 for v in (*self.p, self.q)):
            raise ValueError("probabilities must lie in [0, 1]")
        if not 1 <= self.origin_community <= len(self.sizes):
            raise ValueError("origin community index out of range")

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def labels(self) -> np.ndarray:
        """0-based community of every vertex; the origin comes first."""
        j0 = self.origin_community - 1
        rest = [np.full(c - (j == j0), j) for j, c in enumerate(self.sizes)]
        return np.concatenate([[j0], *rest]).astype(np.int64)

    def community_truth(self, j: int) -> float:
        """p for a vertex of 0-based community ``j``.

        Evaluated in exact rational arithmetic on the decimal inputs and rounded
        once, so e.g. (9 * 0.3 + 40 * 0.01) / 50 comes out as the double 0.062.
        """
        n, c = self.n, self.sizes[j]
        pj, q = Fraction(repr(float(self.p[j]))), Fraction(repr(float(self.q)))
        return float(((c - 1) * pj + (n - c) * q) / n)


def growing_sbm(n: int) -> SbmSpec:
    """Three-community family whose within-community degrees grow like log n."""
    c1 = round(n / 5)
    c2 = round(n / 2)
    c3 = n - c1 - c2
    r = math.log(n) / n
    p = tuple(min(1.0, k * r) for k in (15, 10, 20))
    return SbmSpec((c1, c2, c3), p, 1.0 / n, 1)


EXAMPLE_SBM = SbmSpec((10, 25, 15), (0.3, 0.5, 0.3), 0.01, 1)


def wireless_model() -> "RcmSpec":
    """Device positions from a three-component mixture on [0, 10]^2, range 2, origin (3, 3)."""
    mix = GaussianMixture(
        [0.4, 0.3, 0.3],
        [[9, 9], [8, 3], [3, 9]],
        [[[4, 1.2], [1.2, 4]], [[4, 0], [0, 4]], [[4, 2], [2, 4]]],
        box=[[0, 10], [0, 10]],
    )
    return RcmSpec(mix, HardThreshold(2.0), (3.0, 3.0))

Model = Union[RcmSpec, SbmSpec]


# ---------------------------------------------------------------------------
# truths


@dataclass(frozen=True)
class TruthValue:
    value: float
    method: str  # closed-form | numeric-integration | monte-carlo | empirical-exact
    samples: int | None = None
    stderr: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"truth {self.value} outside [0, 1]")
        if self.method == "monte-carlo" and (self.stderr is None or not math.isfinite(self.stderr)):
            raise ValueError("Monte Carlo truths carry a finite standard error")

    def __float__(self) -> float:
        return self.value


def sbm_truth(spec: SbmSpec) -> TruthValue:
    return TruthValue(spec.community_truth(spec.origin_community - 1), "closed-form")


def true_connection_probability(
    dist: FeatureDistribution,
    cf: ConnectionFunction,
    x,
    method: str = "monte-carlo",
    samples: int = 10**6,
    rng: np.random.Generator | None = None,
    metric: str = "euclidean",
    chunk: int = 250_000,
) -> TruthValue:
    """p(x) = E rho(|X - x|) for X ~ dist."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dist.dim,):
        raise ValueError("probe dimension does not match the distribution")
    if method == "empirical-exact":
        if not isinstance(dist, Empirical):
            raise ValueError("empirical-exact needs an Empirical distribution")
        # fsum is correctly rounded, so the result does not depend on summation order
        vals = cf(distances(dist.points, x, metric))
        return TruthValue(min(max(math.fsum(vals) / len(vals), 0.0), 1.0), "empirical-exact")
    if method == "numeric-integration":
        if not (isinstance(dist, BetaScalar) and isinstance(cf, HardThreshold)):
            raise ValueError("numeric integration is available for Beta features with a hard threshold")
        lo, hi = max(0.0, x[0] - cf.alpha), min(1.0, x[0] + cf.alpha)
        val = 0.0 if hi <= lo else stats.beta.cdf(hi, dist.a, dist.b) - stats.beta.cdf(lo, dist.a, dist.b)
        return TruthValue(float(np.clip(val, 0.0, 1.0)), "numeric-integration")
    if method == "monte-carlo":
        if rng is None:
            raise ValueError("Monte Carlo truth needs an rng")
        total = 0.0
        total_sq = 0.0
        done = 0
        while done < samples:
            k = min(chunk, samples - done)
            vals = cf(distances(dist.sample(k, rng), x, metric))
            total += float(vals.sum())
            total_sq += float(np.square(vals).sum())
            done += k
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        se = math.sqrt(var / max(samples - 1, 1))
        return TruthValue(min(max(mean, 0.0), 1.0), "monte-carlo", samples, se)
    raise ValueError(f"unknown truth method {method!r}")


def model_truth(model: Model, rng: np.random.Generator | None = None, samples: int = 10**6) -> TruthValue:
    """Best available truth for a model: closed form, quadrature, exact average, else Monte Carlo."""
    if isinstance(model, SbmSpec):
        return sbm_truth(model)
    if isinstance(model.dist, Empirical):
        return true_connection_probability(model.dist, model.cf, model.origin, "empirical-exact", metric=model.metric)
    if isinstance(model.dist, BetaScalar) and isinstance(model.cf, HardThreshold) and model.metric == "euclidean":
        return true_connection_probability(model.dist, model.cf, model.origin, "numeric-integration")
    return true_connection_probability(model.dist, model.cf, model.origin, "monte-carlo", samples, rng, model.metric)


def local_probabilities(
    dist: FeatureDistribution,
    cf: ConnectionFunction,
    points: np.ndarray,
    rng: np.random.Generator,
    samples: int = 20_000,
    metric: str = "euclidean",
) -> np.ndarray:
    """p(.) at many points, from one shared reference sample (exact for Empirical)."""
    points = np.asarray(points, dtype=float).reshape(-1, dist.dim)
    if isinstance(dist, Empirical):
        ref, w = dist.points, None
    else:
        ref, w = dist.sample(samples, rng), None
    out = np.empty(len(points))
    for i in range(0, len(points), 256):
        blk = points[i : i + 256]
        vals = cf(distances(blk[:, None, :], ref[None, :, :], metric))
        out[i : i + 256] = vals.mean(axis=1) if w is None else vals @ w
    return out


# ---------------------------------------------------------------------------
# graph samplers


def sample_rcm_graph(
    features: np.ndarray,
    origin_x,
    cf: ConnectionFunction,
    rng: np.random.Generator,
    edge_mode: str = "undirected",
    metric: str = "euclidean",
    block: int = 512,
) -> Graph:
    """Graph on the origin (vertex 0, at ``origin_x``) plus one vertex per feature row.

    Pair (i, j) connects when rho(|X_i - X_j|) exceeds a U[0, 1) draw; the
    probability matrix is evaluated block by block and never stored.
    Undirected mode draws once per unordered pair.
    """
    features = np.asarray(features, dtype=float)
    x = np.atleast_1d(np.asarray(origin_x, dtype=float))
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    if len(features) and features.shape[1] != x.shape[0]:
        raise ValueError("origin and features have different dimensions")
    pts = np.vstack([x[None, :], features]) if len(features) else x[None, :]
    nv = len(pts)
    directed = edge_mode == "directed"
    if edge_mode not in ("undirected", "directed"):
        raise ValueError("edge_mode must be 'undirected' or 'directed'")

    if isinstance(cf, HardThreshold) and metric == "euclidean":
        # rho is 0/1, so the uniform draws never change the outcome.
        pairs = cKDTree(pts).query_pairs(cf.alpha, output_type="ndarray") if nv > 1 else np.empty((0, 2), int)
        if directed:
            pairs = np.vstack([pairs, pairs[:, ::-1]])
        return from_edges(nv, pairs, directed=directed, features=pts)

    src_parts, dst_parts = [], []
    for start in range(0, nv, block):
        rows = np.arange(start, min(start + block, nv))
        d = distances(pts[rows][:, None, :], pts[None, :, :], metric)
        prob = cf(d)
        eps = rng.random(prob.shape)
        hit = prob > eps
        hit[np.arange(len(rows)), rows] = False
        if not directed:
            hit &= np.arange(nv)[None, :] > rows[:, None]
        r, c = np.nonzero(hit)
        src_parts.append(rows[r])
        dst_parts.append(c)
    src = np.concatenate(src_parts) if src_parts else np.empty(0, int)
    dst = np.concatenate(dst_parts) if dst_parts else np.empty(0, int)
    return from_edges(nv, np.column_stack([src, dst]), directed=directed, features=pts)


def sample_sbm_graph(spec: SbmSpec, rng: np.random.Generator) -> Graph:
    """Undirected SBM graph; vertex 0 is the origin, ``features`` holds community labels."""
    labels = spec.labels()
    nv = len(labels)
    probs = np.full((len(spec.sizes), len(spec.sizes)), spec.q)
    np.fill_diagonal(probs, spec.p)
    iu, ju = np.triu_indices(nv, 1)
    hit = rng.random(len(iu)) < probs[labels[iu], labels[ju]]
    g = from_edges(nv, np.column_stack([iu[hit], ju[hit]]), features=labels, degree_norm=spec.n)
    return g


def sample_graph(model: Model, n: int | None, rng: np.random.Generator) -> Graph:
    """Sample from either model; ``n`` is the feature count for RCM and ignored for SBM."""
    if isinstance(model, SbmSpec):
        return sample_sbm_graph(model, rng)
    feats = sample_features(model.dist, int(n), rng)
    return sample_rcm_graph(feats, model.origin, model.cf, rng, model.edge_mode, model.metric)
