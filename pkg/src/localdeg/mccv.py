"""Monte Carlo cross-validation of the neighbourhood size.

Each replicate splits the non-origin vertices at random into a training half
V_i and its complement. The weighted trace is computed on the subgraph induced
by V_i plus the origin and compared with the plain empirical estimate on the
complement's induced subgraph. The mean squared difference over replicates,
R(m), estimates the MSE up to an additive constant that does not depend on m
or on the weights.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .estimator import WeightScheme, estimate_trace, scheme_label
from .graph import Graph, bfs_annuli, induced_subgraph
from .rng import substream


@dataclass(frozen=True)
class SplitPlan:
    M: int = 100
    fraction: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("split fraction must lie in (0, 1)")

    def train_size(self, n_other: int) -> int:
        k = int(np.floor(self.fraction * n_other))
        if k < 1 or n_other - k < 1:
            raise ValueError(f"split fraction {self.fraction} leaves an empty side for n={n_other}")
        return k

    def split(self, n_other: int, i: int) -> np.ndarray:
        """Training vertices (labels 1..n_other, ascending) of replicate ``i``."""
        rng = substream(self.seed, i)
        chosen = rng.choice(n_other, size=self.train_size(n_other), replace=False) + 1
        return np.sort(chosen)


@dataclass(frozen=True)
class RiskCurve:
    risk: np.ndarray  # R(m), m = 0..m_cap
    counts: np.ndarray  # replicates whose own trace reaches m
    scheme: str
    M: int
    seed: int

    @property
    def m_hat(self) -> int:
        return select_m(self)

    @property
    def m_cap(self) -> int:
        return len(self.risk) - 1

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "risk", "scheme", "M", "seed"])
        for m, r in enumerate(self.risk):
            w.writerow([m, repr(float(r)), self.scheme, self.M, self.seed])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@dataclass(frozen=True)
class SplitResiduals:
    """Per-replicate squared differences, before averaging.

    ``sq[s]`` has shape (M, m_cap + 1) for scheme ``s``; ``reach[i]`` is the
    last unclamped m of replicate i.
    """

    sq: list[np.ndarray]
    reach: np.ndarray
    holdout: np.ndarray
    schemes: tuple[WeightScheme, ...]
    plan: SplitPlan

    def curve(self, s: int = 0, M: int | None = None) -> RiskCurve:
        M = self.plan.M if M is None else M
        sq = self.sq[s][:M]
        cap = int(self.reach[:M].max())
        risk = sq[:, : cap + 1].mean(axis=0)
        counts = (self.reach[:M, None] >= np.arange(cap + 1)[None, :]).sum(axis=0)
        return RiskCurve(risk, counts, scheme_label(self.schemes[s]), M, self.plan.seed)


def split_residuals(g: Graph, schemes: Sequence[WeightScheme], plan: SplitPlan) -> SplitResiduals:
    """Run the M splits once and score every scheme on the same subgraphs."""
    n = g.n_other
    if n < 2:
        raise ValueError("cross-validation needs at least two non-origin vertices")
    schemes = tuple(schemes)
    origin_nb = g.neighbours(0)
    traces: list[list[np.ndarray]] = [[] for _ in schemes]
    holdout = np.empty(plan.M)
    reach = np.empty(plan.M, dtype=np.int64)
    in_train = np.zeros(n + 1, dtype=bool)
    for i in range(plan.M):
        train = plan.split(n, i)
        in_train[:] = False
        in_train[train] = True
        n_hold = n - len(train)
        # Empirical estimate on the complement: origin's neighbours outside V_i.
        holdout[i] = np.count_nonzero(~in_train[origin_nb]) / n_hold
        keep = np.concatenate([[0], train])
        sub, _ = induced_subgraph(g, keep)
        ann = bfs_annuli(sub)
        reach[i] = ann.n_reachable - 1
        for s, scheme in enumerate(schemes):
            traces[s].append(estimate_trace(sub, scheme, ann).values)
    cap = int(reach.max())
    sq = []
    for s in range(len(schemes)):
        mat = np.empty((plan.M, cap + 1))
        for i, tr in enumerate(traces[s]):
            mat[i, : len(tr)] = tr
            mat[i, len(tr) :] = tr[-1]
        sq.append((mat - holdout[:, None]) ** 2)
    return SplitResiduals(sq, reach, holdout, schemes, plan)


def mccv_risk(g: Graph, scheme: WeightScheme, plan: SplitPlan) -> RiskCurve:
    return split_residuals(g, [scheme], plan).curve(0)


def mccv_risk_many(g: Graph, schemes: Sequence[WeightScheme], plan: SplitPlan) -> list[RiskCurve]:
    res = split_residuals(g, schemes, plan)
    return [res.curve(s) for s in range(len(res.schemes))]


def select_m(rc: RiskCurve | Sequence[float]) -> int:
    """Smallest m attaining the minimum risk."""
    risk = np.asarray(rc.risk if isinstance(rc, RiskCurve) else rc, dtype=float)
    if len(risk) == 0:
        raise ValueError("empty risk curve")
    return int(np.argmin(risk))


def estimate_with_mccv(g: Graph, scheme: WeightScheme, plan: SplitPlan) -> tuple[int, float]:
    """(m-hat, full-graph estimate at m-hat)."""
    m_hat = select_m(mccv_risk(g, scheme, plan))
    return m_hat, estimate_trace(g, scheme).at(m_hat)


def select_scheme(curves: Sequence[RiskCurve]) -> int:
    """Index of the curve with the lowest minimal risk (first on ties)."""
    mins = [float(np.min(c.risk)) for c in curves]
    return int(np.argmin(mins))
