# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edge-loop kernels: Laplacian products and Dirichlet edge sums.

Same contracts as mcgraph.kernels._reference; that module is the oracle
these loops are tested against.
"""

import numpy as np

cimport numpy as cnp


def lap_left(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
             const double[::1] weights, const double[::1] degree,
             const double[:, ::1] X):
    """Apply the combinatorial Laplacian from the left: (D - W) @ X."""
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t u, v, j, t
    cdef double d, w
    with nogil:
        for u in range(m):
            d = degree[u]
            for j in range(n):
                o[u, j] = d * X[u, j]
            for t in range(indptr[u], indptr[u + 1]):
                v = indices[t]
                w = weights[t]
                for j in range(n):
                    o[u, j] -= w * X[v, j]
    return out


def lap_right(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
              const double[::1] weights, const double[::1] degree,
              const double[:, ::1] X):
    """Apply the combinatorial Laplacian from the right: X @ (D - W)."""
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, t
    cdef double acc
    with nogil:
        for i in range(m):
            for j in range(n):
                acc = degree[j] * X[i, j]
                for t in range(indptr[j], indptr[j + 1]):
                    acc -= weights[t] * X[i, indices[t]]
                o[i, j] = acc
    return out


def dirichlet_rows(const cnp.int64_t[::1] edge_u, const cnp.int64_t[::1] edge_v,
                   const double[::1] edge_w, const double[:, ::1] X):
    """Edge sum of w * ||X[u, :] - X[v, :]||^2 over undirected edges."""
    cdef Py_ssize_t n_edges = edge_u.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef Py_ssize_t e, j
    cdef Py_ssize_t u, v
    cdef double total = 0.0, acc, d
    with nogil:
        for e in range(n_edges):
            u = edge_u[e]
            v = edge_v[e]
            acc = 0.0
            for j in range(n):
                d = X[u, j] - X[v, j]
                acc += d * d
            total += edge_w[e] * acc
    return total


def dirichlet_cols(const cnp.int64_t[::1] edge_u, const cnp.int64_t[::1] edge_v,
                   const double[::1] edge_w, const double[:, ::1] X):
    """Edge sum of w * ||X[:, u] - X[:, v]||^2 over undirected edges."""
    cdef Py_ssize_t n_edges = edge_u.shape[0]
    cdef Py_ssize_t m = X.shape[0]
    cdef Py_ssize_t e, i
    cdef double total = 0.0, d
    with nogil:
        for e in range(n_edges):
            for i in range(m):
                d = X[i, edge_u[e]] - X[i, edge_v[e]]
                total += edge_w[e] * d * d
    return total
