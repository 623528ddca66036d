"""Locally weighted estimators of the origin's connection probability.

The estimate at neighbourhood radius k is a weighted average of normalized
degrees B_i / n, where each annulus (vertices at geodesic distance l) gets
total weight w_l shared equally among its members. The per-vertex trace
admits vertices one at a time, closest first, and passes through the radius-k
estimate whenever an annulus completes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .graph import Annuli, Graph, bfs_annuli


@dataclass(frozen=True)
class AnnulusSize:
    """w_l = |V_l \\ V_{l-1}|: every vertex in V_k counts equally."""

    name = "annulus-size"


@dataclass(frozen=True)
class ConstantOne:
    """w_l = 1: every annulus counts equally."""

    name = "constant-one"


@dataclass(frozen=True)
class Geometric:
    """w_l = gamma (1 - gamma)^(-l); gives the constant step size gamma.

    For a Holder-beta smooth p(.) a natural rate is
    gamma_n = (log n)^((2 beta - 1)/(2 beta + 1)) n^(-2 beta/(2 beta + 1)),
    but beta is unknown in practice so gamma is always supplied explicitly.
    """

    gamma: float
    name = "geometric"

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"geometric gamma must lie in (0, 1), got {self.gamma}")


@dataclass(frozen=True)
class Custom:
    weights: tuple[float, ...]  # w_1, w_2, ... (w_0 = 1 is implicit)
    name = "custom"

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w < 0 for w in self.weights):
            raise ValueError("custom weights must be non-negative")


WeightScheme = Union[AnnulusSize, ConstantOne, Geometric, Custom]

DEFAULT_SCHEMES: tuple[WeightScheme, ...] = (AnnulusSize(), ConstantOne(), Geometric(0.1))


def scheme_label(scheme: WeightScheme) -> str:
    if isinstance(scheme, Geometric):
        return f"geometric({scheme.gamma:g})"
    return scheme.name


def weights_for(scheme: WeightScheme, annuli: Annuli | Sequence[int]) -> np.ndarray:
    """w_0..w_ecc for the given annuli (or list of annulus sizes)."""
    sizes = annuli.sizes if isinstance(annuli, Annuli) else np.asarray(annuli, dtype=np.int64)
    ecc = len(sizes) - 1
    if isinstance(scheme, AnnulusSize):
        w = sizes.astype(float)
    elif isinstance(scheme, ConstantOne):
        w = np.ones(ecc + 1)
    elif isinstance(scheme, Geometric):
        ell = np.arange(ecc + 1, dtype=float)
        w = scheme.gamma * (1.0 - scheme.gamma) ** (-ell)
    elif isinstance(scheme, Custom):
        if len(scheme.weights) < ecc:
            raise ValueError(f"custom weights cover {len(scheme.weights)} annuli, eccentricity is {ecc}")
        w = np.concatenate([[1.0], scheme.weights[:ecc]])
    else:
        raise TypeError(f"unknown weight scheme {scheme!r}")
    w[0] = 1.0
    return w


@dataclass(frozen=True)
class EstimateTrace:
    values: np.ndarray  # p-check_m for m = 0..m_max
    boundaries: np.ndarray  # m at which annulus k completes, k = 0..ecc
    order: np.ndarray  # vertex admitted at step m
    annulus: np.ndarray  # annulus index of that vertex

    @property
    def m_max(self) -> int:
        return len(self.values) - 1

    def at(self, m: int) -> float:
        """Value at ``m``; beyond the reachable set the trace stays flat."""
        return float(self.values[min(m, self.m_max)])

    def padded(self, length: int) -> np.ndarray:
        if length <= len(self.values):
            return self.values[:length]
        return np.concatenate([self.values, np.full(length - len(self.values), self.values[-1])])

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "estimate", "annulus", "vertex_added"])
        for m, (v, a, u) in enumerate(zip(self.values, self.annulus, self.order)):
            w.writerow([m, repr(float(v)), int(a), int(u)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _normalized_degrees(g: Graph) -> np.ndarray:
    return g.degrees() / g.norm


def estimate_trace(
    g: Graph,
    scheme: WeightScheme,
    annuli: Annuli | None = None,
    shuffle: np.random.Generator | None = None,
) -> EstimateTrace:
    """Estimates p-check_m, m = 0..(number of reachable non-origin vertices).

    A vertex of annulus l carries weight w_l / |annulus l|, so the value at an
    annulus boundary equals ``estimate_pk`` exactly. ``shuffle`` randomizes the
    admission order within each annulus.
    """
    if annuli is None:
        annuli = bfs_annuli(g)
    w = weights_for(scheme, annuli)
    vals = _normalized_degrees(g)
    layers = annuli.layers
    if shuffle is not None:
        layers = (layers[0],) + tuple(shuffle.permutation(a) for a in layers[1:])
    out = []
    num = 0.0
    den = 0.0
    for ell, layer in enumerate(layers):
        a = len(layer)
        share = w[ell] / a
        part = np.cumsum(vals[layer])
        frac = np.arange(1, a + 1) / a
        out.append((num + share * part) / (den + w[ell] * frac))
        num = num + share * part[-1]
        den = den + w[ell]
    sizes = np.array([len(a) for a in layers])
    return EstimateTrace(
        values=np.concatenate(out),
        boundaries=np.cumsum(sizes) - 1,
        order=np.concatenate(layers),
        annulus=np.repeat(np.arange(len(layers)), sizes),
    )


def estimate_pk(g: Graph, scheme: WeightScheme, k: int, annuli: Annuli | None = None) -> float:
    """Radius-k estimate, evaluated annulus by annulus; k past the eccentricity clamps."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if annuli is None:
        annuli = bfs_annuli(g)
    k = min(k, annuli.eccentricity)
    w = weights_for(scheme, annuli)
    deg = g.degrees()
    n = g.norm
    num = 0.0
    den = 0.0
    for ell in range(k + 1):
        layer = annuli.layers[ell]
        s = 0.0
        for i in layer:
            s += deg[i] / n
        num = num + (w[ell] / len(layer)) * s
        den = den + w[ell]
    return num / den


def gamma_sequence(scheme: WeightScheme, annuli: Annuli | Sequence[int]) -> np.ndarray:
    """Step sizes gamma_k = w_{k+1} / sum_{l <= k+1} w_l, k = 0..ecc-1."""
    w = weights_for(scheme, annuli)
    cum = np.cumsum(w)
    return w[1:] / cum[1:]


def estimate_pk_recursive(g: Graph, scheme: WeightScheme, k: int, annuli: Annuli | None = None) -> float:
    """Same estimate via p_{k+1} = p_k + gamma_k (annulus mean - p_k)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if annuli is None:
        annuli = bfs_annuli(g)
    k = min(k, annuli.eccentricity)
    vals = _normalized_degrees(g)
    gam = gamma_sequence(scheme, annuli)
    p = float(vals[0])
    for j in range(k):
        step = float(np.mean(vals[annuli.layers[j + 1]])) - p
        p = p + gam[j] * step
    return p
