"""Reference numpy implementations of the edge-loop kernels.

These serve as the import-time fallback when the compiled extension is not
built, and as the ground truth the extension is checked against. The CSR
arguments are the per-vertex compressed neighbor arrays built by
``WeightedGraph``; every undirected edge appears in both directions.
"""

import numpy as np


def lap_left(indptr, indices, weights, degree, X):
    """Apply the combinatorial Laplacian from the left: (D - W) @ X."""
    out = degree[:, None] * X
    if indices.size:
        rows = np.repeat(np.arange(degree.shape[0]), np.diff(indptr))
        np.subtract.at(out, rows, weights[:, None] * X[indices])
    return out


def lap_right(indptr, indices, weights, degree, X):
    """Apply the combinatorial Laplacian from the right: X @ (D - W)."""
    out = X * degree[None, :]
    if indices.size:
        cols = np.repeat(np.arange(degree.shape[0]), np.diff(indptr))
        np.subtract.at(out.T, cols, (X[:, indices] * weights[None, :]).T)
    return out


def dirichlet_rows(edge_u, edge_v, edge_w, X):
    """Edge sum of w * ||X[u, :] - X[v, :]||^2 over undirected edges."""
    if edge_u.size == 0:
        return 0.0
    diff = X[edge_u] - X[edge_v]
    return float(np.einsum("ij,ij,i->", diff, diff, edge_w))


def dirichlet_cols(edge_u, edge_v, edge_w, X):
    """Edge sum of w * ||X[:, u] - X[:, v]||^2 over undirected edges."""
    if edge_u.size == 0:
        return 0.0
    diff = X[:, edge_u] - X[:, edge_v]
    return float(np.einsum("ij,ij,j->", diff, diff, edge_w))


def gather(X, rows, cols):
    """Read X at the observed cells, in observation order."""
    return X[rows, cols]


def scatter(rows, cols, values, shape):
    """Dense matrix that is `values` on the observed cells and 0 elsewhere."""
    out = np.zeros(shape, dtype=np.float64)
    out[rows, cols] = values
    return out


def masked_sq_diff(X, rows, cols, values):
    """Sum of (X_ij - values)^2 over the observed cells."""
    d = X[rows, cols] - values
    return float(d @ d)
