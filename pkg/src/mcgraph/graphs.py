"""Weighted graphs, combinatorial Laplacians and neighborhood graph builders.

A :class:`WeightedGraph` stores each undirected edge once (canonical
``u < v`` order) plus a compressed per-vertex adjacency used by the
Laplacian kernels. The Laplacian ``L = D - W`` is never materialized
densely; applying it costs O(edges * other dimension).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels

Side = Literal["left", "right"]

#: Kernel weights decay to this value at the cutoff distance when no
#: explicit bandwidth is given.
KERNEL_FLOOR = 0.01


class WeightedGraph:
    """Undirected graph with nonnegative edge weights.

    Parameters
    ----------
    n_vertices : int
        Number of vertices; indices are 0-based.
    edges : iterable of (u, v, w)
        Undirected weighted edges. Self-loops and repeated unordered pairs
        are rejected; zero-weight edges are dropped (they are equivalent to
        absent edges).

    Notes
    -----
    Instances are immutable after construction and safe to share across
    threads or worker processes.
    """

    __slots__ = ("n_vertices", "edge_u", "edge_v", "edge_w",
                 "_indptr", "_indices", "_weights", "_degree")

    def __init__(self, n_vertices, edges):
        edges = list(edges)
        if edges:
            arr = np.asarray(edges, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError("edges must be (u, v, w) triples")
            u = arr[:, 0].astype(np.int64)
            v = arr[:, 1].astype(np.int64)
            if not np.array_equal(u, arr[:, 0]) or not np.array_equal(v, arr[:, 1]):
                raise ValueError("edge endpoints must be integers")
            w = arr[:, 2]
        else:
            u = np.empty(0, dtype=np.int64)
            v = np.empty(0, dtype=np.int64)
            w = np.empty(0, dtype=np.float64)
        self._init_from_arrays(n_vertices, u, v, w)

    @classmethod
    def from_arrays(cls, n_vertices, u, v, w):
        """Build from parallel endpoint/weight arrays (used by the builders)."""
        self = cls.__new__(cls)
        self._init_from_arrays(n_vertices,
                               np.asarray(u, dtype=np.int64),
                               np.asarray(v, dtype=np.int64),
                               np.asarray(w, dtype=np.float64))
        return self

    def _init_from_arrays(self, n_vertices, u, v, w):
        n_vertices = int(n_vertices)
        if n_vertices < 1:
            raise ValueError(f"n_vertices must be >= 1, got {n_vertices}")
        self.n_vertices = n_vertices

        if not (u.shape == v.shape == w.shape) or u.ndim != 1:
            raise ValueError("edge arrays must be 1-D and of equal length")
        if u.size:
            if u.min() < 0 or v.min() < 0 or u.max() >= n_vertices or v.max() >= n_vertices:
                raise ValueError(
                    f"edge endpoints must lie in [0, {n_vertices}), got "
                    f"range [{min(u.min(), v.min())}, {max(u.max(), v.max())}]")
            loops = u == v
            if loops.any():
                k = int(np.flatnonzero(loops)[0])
                raise ValueError(f"self-loop at vertex {u[k]} is not allowed")
            if not np.isfinite(w).all():
                raise ValueError("edge weights must be finite")
            if w.min() < 0:
                raise ValueError(f"edge weights must be >= 0, got {w.min()}")

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = lo * n_vertices + hi
        if key.size and np.unique(key).size != key.size:
            order = np.argsort(key, kind="stable")
            dup = order[np.flatnonzero(np.diff(key[order]) == 0)[0] + 1]
            raise ValueError(f"duplicate edge ({lo[dup]}, {hi[dup]})")

        keep = w > 0
        lo, hi, w = lo[keep], hi[keep], w[keep]
        order = np.lexsort((hi, lo))
        self.edge_u = lo[order]
        self.edge_v = hi[order]
        self.edge_w = w[order]

        # Compressed adjacency with every edge in both directions.
        src = np.concatenate([self.edge_u, self.edge_v])
        dst = np.concatenate([self.edge_v, self.edge_u])
        ww = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        counts = np.bincount(src, minlength=n_vertices)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._indices = dst
        self._weights = ww
        self._degree = np.bincount(src, weights=ww, minlength=n_vertices)

        for a in (self.edge_u, self.edge_v, self.edge_w,
                  self._indptr, self._indices, self._weights, self._degree):
            a.setflags(write=False)

    @property
    def n_edges(self):
        return int(self.edge_u.size)

    def edges(self):
        """Canonical (u, v, w) triples with u < v, sorted by (u, v)."""
        return list(zip(self.edge_u.tolist(), self.edge_v.tolist(),
                        self.edge_w.tolist()))

    def weight(self, u, v):
        """Weight of the edge between u and v, 0.0 when absent."""
        if u == v:
            return 0.0
        lo, hi = (u, v) if u < v else (v, u)
        k = np.searchsorted(self.edge_u * self.n_vertices + self.edge_v,
                            lo * self.n_vertices + hi)
        if k < self.edge_u.size and self.edge_u[k] == lo and self.edge_v[k] == hi:
            return float(self.edge_w[k])
        return 0.0

    def laplacian(self):
        return LaplacianView(graph=self, degree=self._degree)

    def __repr__(self):
        return f"WeightedGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


@dataclass(frozen=True)
class LaplacianView:
    """The combinatorial Laplacian L = D - W of a graph, as an operator.

    `degree` holds the per-vertex sum of incident weights (the diagonal of
    D). L is symmetric positive semidefinite with zero row sums.
    """

    graph: WeightedGraph
    degree: np.ndarray

    @property
    def n_vertices(self):
        return self.graph.n_vertices


def _as_matrix(X, side):
    """Promote 1-D input to the orientation the side implies."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        return (X[:, None], True) if side == "left" else (X[None, :], True)
    if X.ndim != 2:
        raise ValueError(f"X must be 1-D or 2-D, got {X.ndim} dimensions")
    return X, False


def _check_side(L, X, side):
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    axis = 0 if side == "left" else 1
    if X.shape[axis] != L.n_vertices:
        kind = "rows" if axis == 0 else "columns"
        raise ValueError(
            f"Laplacian has {L.n_vertices} vertices but the matrix has "
            f"{X.shape[axis]} {kind} (shape {X.shape}, side {side!r})")


def laplacian_apply(L, X, side):
    """Apply L to a dense matrix without materializing L.

    Parameters
    ----------
    L : LaplacianView
    X : ndarray
        m x n matrix (or a vector, promoted along the graph side).
    side : {'left', 'right'}
        'left' computes L @ X with the row graph (L is m x m);
        'right' computes X @ L with the column graph (L is n x n).

    Returns
    -------
    ndarray of the same shape as X.
    """
    X2, squeeze = _as_matrix(X, side)
    _check_side(L, X2, side)
    g = L.graph
    if side == "left":
        out = kernels.lap_left(g._indptr, g._indices, g._weights, L.degree, X2)
    else:
        out = kernels.lap_right(g._indptr, g._indices, g._weights, L.degree, X2)
    return out.ravel() if squeeze else out


def dirichlet_energy(L, X, side):
    """Graph Dirichlet energy of X on the given side.

    'left' is the row-graph form tr(X^T L X); 'right' is the column-graph
    form tr(X L X^T). Both equal the sum over undirected edges of
    w * ||difference of incident rows/columns||^2, which is how the value
    is computed here.
    """
    X2, _ = _as_matrix(X, side)
    _check_side(L, X2, side)
    g = L.graph
    if side == "left":
        return kernels.dirichlet_rows(g.edge_u, g.edge_v, g.edge_w, X2)
    return kernels.dirichlet_cols(g.edge_u, g.edge_v, g.edge_w, X2)


def _check_distance_matrix(D, name="D"):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"{name} must be square, got shape {D.shape}")
    if not np.allclose(D, D.T, equal_nan=True):
        raise ValueError(f"{name} must be symmetric")
    finite = np.isfinite(D)
    if D[finite].size and D[finite].min() < 0:
        raise ValueError(f"{name} must be nonnegative")
    diag = np.diagonal(D)
    if not np.allclose(diag[np.isfinite(diag)], 0.0):
        raise ValueError(f"{name} must have a zero diagonal")
    return D


def default_kernel_bandwidth(cutoff, d_min):
    """Bandwidth making exp(-(d - d_min)^2 / alpha) hit KERNEL_FLOOR at the cutoff."""
    if cutoff <= d_min:
        raise ValueError(f"cutoff {cutoff} must exceed d_min {d_min}")
    return (cutoff - d_min) ** 2 / math.log(1.0 / KERNEL_FLOOR)


def build_knn_graph(D, k, weights="binary", alpha=None):
    """Symmetrized k-nearest-neighbor graph from a pairwise distance matrix.

    Each vertex is linked to its k nearest neighbors (ties broken toward
    the lower vertex index); the edge set is the union over both
    directions. Non-finite distances mark pairs that cannot be linked; a
    vertex with fewer than k linkable neighbors keeps the ones it has.

    weights='binary' assigns w=1 to every edge. weights='kernel' applies
    the Gaussian kernel exp(-(d - d_min)^2 / alpha) over selected edges,
    with d_min the smallest selected distance and alpha defaulting to
    `default_kernel_bandwidth` at the largest selected distance.
    """
    D = _check_distance_matrix(D)
    n = D.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n_vertices ({n}), got {k}")
    if weights not in ("binary", "kernel"):
        raise ValueError(f"weights must be 'binary' or 'kernel', got {weights!r}")

    work = D.copy()
    np.fill_diagonal(work, np.inf)
    work[~np.isfinite(work)] = np.inf

    pairs = set()
    for u in range(n):
        order = np.argsort(work[u], kind="stable")
        picked = 0
        for v in order:
            if picked == k or not np.isfinite(work[u, v]):
                break
            pairs.add((min(u, int(v)), max(u, int(v))))
            picked += 1

    if not pairs:
        return WeightedGraph(n, [])
    eu, ev = map(np.asarray, zip(*sorted(pairs)))
    if weights == "binary":
        ew = np.ones(eu.size)
    else:
        d = D[eu, ev]
        d_min = float(d.min())
        d_max = float(d.max())
        if alpha is None:
            alpha = (default_kernel_bandwidth(d_max, d_min)
                     if d_max > d_min else 1.0)
        elif alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        ew = np.exp(-((d - d_min) ** 2) / alpha)
    return WeightedGraph.from_arrays(n, eu, ev, ew)


def build_epsilon_graph(D, epsilon, alpha=None, d_min=0.0):
    """Epsilon-neighborhood graph with Gaussian kernel weights.

    An edge joins (i, j) iff d_ij < epsilon, weighted
    exp(-(d_ij - d_min)^2 / alpha); pairs with non-finite distance are
    skipped. With the default alpha the weight decays to KERNEL_FLOOR as
    d_ij approaches epsilon, so the graph behaves like an unbounded-k
    nearest-neighbor graph under the same kernel.
    """
    D = _check_distance_matrix(D)
    if not 0.0 <= d_min < epsilon:
        raise ValueError(f"require epsilon > d_min >= 0, got epsilon={epsilon}, d_min={d_min}")
    if alpha is None:
        alpha = default_kernel_bandwidth(epsilon, d_min)
    elif alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    n = D.shape[0]
    iu, jv = np.triu_indices(n, k=1)
    d = D[iu, jv]
    with np.errstate(invalid="ignore"):
        sel = np.isfinite(d) & (d < epsilon)
    w = np.exp(-((d[sel] - d_min) ** 2) / alpha)
    return WeightedGraph.from_arrays(n, iu[sel], jv[sel], w)


def connected_components(graph):
    """Component label per vertex (labels are 0-based, in discovery order)."""
    labels = np.full(graph.n_vertices, -1, dtype=np.int64)
    indptr, indices = graph._indptr, graph._indices
    current = 0
    for start in range(graph.n_vertices):
        if labels[start] >= 0:
            continue
        queue = deque([start])
        labels[start] = current
        while queue:
            u = queue.popleft()
            for t in range(indptr[u], indptr[u + 1]):
                v = indices[t]
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(v)
        current += 1
    return labels
