"""Graph storage, degrees, geodesic annuli around the origin, induced subgraphs.

Vertex 0 is always the origin. Adjacency is kept as sorted out-neighbour lists
in compressed (CSR) form: the neighbours of ``v`` are
``indices[indptr[v]:indptr[v + 1]]``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    indptr: np.ndarray
    indices: np.ndarray
    directed: bool = False
    features: np.ndarray | None = None
    # The ``n`` in B_i / n. Defaults to the number of non-origin vertices;
    # SBM graphs use the block-model size (see ``model.sample_sbm_graph``).
    degree_norm: int | None = None
    _sym: list = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.indptr.ndim != 1 or len(self.indptr) < 2:
            raise ValueError("indptr must have at least two entries (origin present)")
        if self.degree_norm is not None and self.degree_norm < 1:
            raise ValueError("degree_norm must be positive")

    @property
    def n_vertices(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_other(self) -> int:
        return len(self.indptr) - 2

    @property
    def norm(self) -> int:
        """Denominator used to turn degrees into connection-probability estimates."""
        if self.degree_norm is not None:
            return self.degree_norm
        return max(self.n_other, 1)

    @property
    def n_edges(self) -> int:
        m = len(self.indices)
        return m if self.directed else m // 2

    def neighbours(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        """Out-degrees B_i of every vertex."""
        return np.diff(self.indptr)

    def symmetrized(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR arrays of the adjacency with A_ij or A_ji."""
        if not self.directed:
            return self.indptr, self.indices
        if not self._sym:
            src = np.repeat(np.arange(self.n_vertices), np.diff(self.indptr))
            self._sym.append(_csr(self.n_vertices, np.concatenate([src, self.indices]),
                                  np.concatenate([self.indices, src])))
        return self._sym[0]

    def edges(self) -> np.ndarray:
        """Edge array of shape (E, 2); each undirected edge once with src < dst."""
        src = np.repeat(np.arange(self.n_vertices), np.diff(self.indptr))
        e = np.column_stack([src, self.indices])
        if not self.directed:
            e = e[e[:, 0] < e[:, 1]]
        return e


def _csr(n_vertices: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if len(src):
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        keep = np.ones(len(src), dtype=bool)
        keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst = src[keep], dst[keep]
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n_vertices), out=indptr[1:])
    return indptr, dst


def from_edges(
    n_vertices: int,
    edges: Iterable[Sequence[int]] | np.ndarray,
    directed: bool = False,
    features: np.ndarray | None = None,
    degree_norm: int | None = None,
) -> Graph:
    """Build a graph on vertices ``0..n_vertices-1`` from an edge list.

    Undirected edges may be listed in either orientation; duplicates collapse.
    """
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if n_vertices < 1:
        raise ValueError("a graph needs at least the origin")
    if len(e):
        if e.min() < 0 or e.max() >= n_vertices:
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops are not allowed")
    src, dst = e[:, 0], e[:, 1]
    if not directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    indptr, indices = _csr(n_vertices, src, dst)
    return Graph(indptr, indices, directed=directed, features=features, degree_norm=degree_norm)


def empty_graph(n_other: int, directed: bool = False) -> Graph:
    return from_edges(n_other + 1, np.empty((0, 2), dtype=np.int64), directed=directed)


def complete_graph(n_other: int) -> Graph:
    iu = np.triu_indices(n_other + 1, 1)
    return from_edges(n_other + 1, np.column_stack(iu))


def out_degree(g: Graph, i: int) -> int:
    if not 0 <= i < g.n_vertices:
        raise IndexError(f"vertex {i} out of range [0, {g.n_other}]")
    return int(g.indptr[i + 1] - g.indptr[i])


@dataclass(frozen=True)
class Annuli:
    """Vertices grouped by geodesic distance from the origin.

    ``layers[l]`` holds the vertices at distance exactly ``l``, ascending.
    """

    layers: tuple[np.ndarray, ...]

    @property
    def eccentricity(self) -> int:
        return len(self.layers) - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(a) for a in self.layers], dtype=np.int64)

    @property
    def cumulative_sizes(self) -> np.ndarray:
        """|V_l| for l = 0..eccentricity."""
        return np.cumsum(self.sizes)

    @property
    def n_reachable(self) -> int:
        return int(self.sizes.sum())

    def order(self) -> np.ndarray:
        return np.concatenate(self.layers)

    def distance_of(self) -> dict[int, int]:
        return {int(v): ell for ell, layer in enumerate(self.layers) for v in layer}


def bfs_annuli(g: Graph, origin: int = 0, geodesic: str = "symmetric") -> Annuli:
    """Breadth-first layering from ``origin``.

    Directed graphs are layered over the symmetrized adjacency unless
    ``geodesic="out-edges"``.
    """
    if geodesic == "symmetric":
        indptr, indices = g.symmetrized()
    elif geodesic == "out-edges":
        indptr, indices = g.indptr, g.indices
    else:
        raise ValueError(f"unknown geodesic mode {geodesic!r}")
    seen = np.zeros(g.n_vertices, dtype=bool)
    seen[origin] = True
    frontier = np.array([origin], dtype=np.int64)
    layers = [frontier]
    while True:
        starts, stops = indptr[frontier], indptr[frontier + 1]
        if len(frontier) == 1:
            nxt = indices[starts[0] : stops[0]]
        else:
            nxt = np.concatenate([indices[a:b] for a, b in zip(starts, stops)])
        nxt = np.unique(nxt[~seen[nxt]])
        if len(nxt) == 0:
            break
        seen[nxt] = True
        layers.append(nxt)
        frontier = nxt
    return Annuli(tuple(layers))


def induced_subgraph(g: Graph, keep: Iterable[int] | np.ndarray) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``keep`` with vertices relabelled ``0..len(keep)-1`` in ascending order.

    Returns the subgraph and the array mapping new labels to old ones.
    """
    keep = np.unique(np.asarray(list(keep) if not isinstance(keep, np.ndarray) else keep, dtype=np.int64))
    if len(keep) == 0 or keep[0] != 0:
        raise ValueError("keep must contain the origin (vertex 0)")
    relabel = np.full(g.n_vertices, -1, dtype=np.int64)
    relabel[keep] = np.arange(len(keep))
    counts = np.diff(g.indptr)
    src_old = np.repeat(np.arange(g.n_vertices), counts)
    new_src = relabel[src_old]
    new_dst = relabel[g.indices]
    ok = (new_src >= 0) & (new_dst >= 0)
    # Old CSR is sorted by (src, dst) and relabelling is monotone, so order survives.
    new_src, new_dst = new_src[ok], new_dst[ok]
    indptr = np.zeros(len(keep) + 1, dtype=np.int64)
    np.cumsum(np.bincount(new_src, minlength=len(keep)), out=indptr[1:])
    feats = None if g.features is None else g.features[keep]
    sub = Graph(indptr, new_dst, directed=g.directed, features=feats)
    return sub, keep


def write_edge_list(g: Graph, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst"])
    for s, d in g.edges():
        w.writerow([int(s), int(d)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_edge_list(path: str | Path, n_vertices: int | None = None, directed: bool = False) -> Graph:
    """Read a ``src,dst`` edge-list CSV.

    Without ``n_vertices`` the vertex count is one past the largest index seen
    (at least 1, so an empty file is a lone origin).
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["src", "dst"]:
            raise ValueError(f"{path}: expected header 'src,dst'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                rows.append((int(row[0]), int(row[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    e = np.array(rows, dtype=np.int64).reshape(-1, 2)
    if n_vertices is None:
        n_vertices = int(e.max()) + 1 if len(e) else 1
    return from_edges(n_vertices, e, directed=directed)
