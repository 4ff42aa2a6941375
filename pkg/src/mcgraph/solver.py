"""ADMM solver for graph-regularized nuclear-norm matrix completion.

The model recovers a dense m x n matrix from sparse observations by
minimizing

    gamma_n * ||X||_*  +  1/2 ||A o (X - M)||_F^2
        +  gamma_r/2 * tr(X^T L_r X)  +  gamma_c/2 * tr(X L_c X^T)

where A is the observation mask, o the Hadamard product and L_r, L_c the
row/column graph Laplacians. The objective is split as F(X) + G(Y) with
F the nuclear term and G the quadratic terms, coupled by X = Y. Each
ADMM sweep applies singular value soft-thresholding for X, solves the
G-subproblem for Y with warm-started conjugate gradient, and ascends the
scaled dual Z.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels
from .graphs import LaplacianView, dirichlet_energy, laplacian_apply


class SparseObservations:
    """Observed entries of an m x n matrix.

    Entries are stored as parallel (rows, cols, values) arrays in canonical
    (row, col) order; the observation mask is exactly their support.
    Duplicate cells and out-of-range indices are rejected.
    """

    __slots__ = ("n_rows", "n_cols", "rows", "cols", "values")

    def __init__(self, n_rows, n_cols, rows, cols, values):
        n_rows, n_cols = int(n_rows), int(n_cols)
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"matrix shape must be positive, got {(n_rows, n_cols)}")
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and values must be 1-D arrays of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise ValueError(f"row indices must lie in [0, {n_rows})")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise ValueError(f"column indices must lie in [0, {n_cols})")
            if not np.isfinite(values).all():
                raise ValueError("observed values must be finite")
        linear = rows * n_cols + cols
        if linear.size and np.unique(linear).size != linear.size:
            raise ValueError("duplicate observed cell")
        order = np.argsort(linear, kind="stable")
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.rows = rows[order]
        self.cols = cols[order]
        self.values = values[order]
        for a in (self.rows, self.cols, self.values):
            a.setflags(write=False)

    @classmethod
    def from_entries(cls, n_rows, n_cols, entries):
        """Build from an iterable of (i, j, value) triples."""
        entries = list(entries)
        if entries:
            rows, cols, values = zip(*entries)
        else:
            rows = cols = values = ()
        return cls(n_rows, n_cols, rows, cols, values)

    @classmethod
    def from_dense(cls, M, mask):
        """Observations of M at the True cells of a boolean mask."""
        M = np.asarray(M, dtype=np.float64)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != M.shape:
            raise ValueError(f"mask shape {mask.shape} != matrix shape {M.shape}")
        rows, cols = np.nonzero(mask)
        return cls(M.shape[0], M.shape[1], rows, cols, M[rows, cols])

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def n_obs(self):
        return int(self.rows.size)

    def linear_indices(self):
        """Row-major linear index of each observed cell."""
        return self.rows * self.n_cols + self.cols

    def take(self, idx):
        """Sub-selection by positions into the canonical entry order."""
        idx = np.sort(np.asarray(idx, dtype=np.int64))
        return SparseObservations(self.n_rows, self.n_cols,
                                  self.rows[idx], self.cols[idx], self.values[idx])

    def to_dense(self, fill=0.0):
        out = np.full((self.n_rows, self.n_cols), float(fill))
        out[self.rows, self.cols] = self.values
        return out

    def dense_mask(self):
        out = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def __repr__(self):
        return (f"SparseObservations(shape={self.shape}, n_obs={self.n_obs})")


@dataclass(frozen=True)
class SolverConfig:
    """Regularization weights, ADMM penalty and stopping tolerances.

    gamma_n = 0 disables the SVT step (the X-update is the identity);
    gamma_r = gamma_c = 0 reduces the model to plain nuclear-norm
    completion. The ADMM stop rule is the combined absolute/relative
    primal-dual residual test; the inner CG solve stops at a relative
    residual of cg_tol.
    """

    gamma_n: float = 1.0
    gamma_r: float = 0.0
    gamma_c: float = 0.0
    rho: float = 1.0
    max_iter: int = 500
    tol_abs: float = 1e-6
    tol_rel: float = 1e-4
    cg_tol: float = 1e-8
    cg_max_iter: int = 200
    record_cg_history: bool = False

    def __post_init__(self):
        if self.gamma_n < 0 or self.gamma_r < 0 or self.gamma_c < 0:
            raise ValueError("regularization weights must be >= 0")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.max_iter < 1 or self.cg_max_iter < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.tol_abs < 0 or self.tol_rel < 0 or self.cg_tol <= 0:
            raise ValueError("tolerances must be positive")

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


@dataclass
class SolverState:
    """ADMM iterates and residual norms after the latest sweep."""

    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    iteration: int
    primal_residual: float
    dual_residual: float


class TraceRecord(NamedTuple):
    iteration: int
    objective: float
    primal_res: float
    dual_res: float
    rank_estimate: Optional[int]


@dataclass
class CGResult:
    """Outcome of one conjugate-gradient solve.

    `history` holds the relative residual of the exposed iterate after the
    warm start and after each step; the solver always exposes the best
    iterate found so far, so the history is non-increasing and the final
    entry equals `rel_residual`.
    """

    converged: bool
    iterations: int
    rel_residual: float
    history: list = field(default_factory=list)


@dataclass
class SolveReport:
    """Recovered matrix plus the per-iteration convergence trace.

    trace records are (iteration, objective, primal_res, dual_res,
    rank_estimate) tuples; rank_estimate is the number of singular values
    above the shrinkage threshold, or None when gamma_n = 0 and no SVD is
    computed. cg_exhausted lists ADMM iterations whose inner CG hit its
    iteration cap (non-fatal).
    """

    recovered: np.ndarray
    trace: list
    converged: bool
    iterations_used: int
    final_state: SolverState
    cg_exhausted: list = field(default_factory=list)
    cg_histories: Optional[list] = None


def _as_dense(X, name="X"):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {X.ndim} dimensions")
    return X


def _check_problem(obs, L_r, L_c):
    if L_r is not None and L_r.n_vertices != obs.n_rows:
        raise ValueError(
            f"row graph has {L_r.n_vertices} vertices but observations have "
            f"{obs.n_rows} rows")
    if L_c is not None and L_c.n_vertices != obs.n_cols:
        raise ValueError(
            f"column graph has {L_c.n_vertices} vertices but observations have "
            f"{obs.n_cols} columns")


def nuclear_norm(X):
    """Sum of singular values."""
    return float(np.linalg.svd(_as_dense(X), compute_uv=False).sum())


def _svt(H, eta):
    """Soft-threshold the singular values of H; returns (X, shrunk values)."""
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    s = np.maximum(s - eta, 0.0)
    return (U * s) @ Vt, s


def svt_prox(H, threshold):
    """Proximal operator of threshold * ||.||_* (singular value thresholding).

    Computes U diag(max(0, sigma_k - threshold)) V^T from the SVD of H;
    this is the closed-form minimizer of
    threshold * ||X||_* + 1/2 ||X - H||_F^2.
    """
    H = _as_dense(H, "H")
    if not np.isfinite(H).all():
        raise ValueError("svt_prox requires finite input")
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if threshold == 0:
        return H.copy()
    X, _ = _svt(H, threshold)
    return X


def rmse(X, obs, clip=None):
    """Root mean squared error of X against the observed entries.

    With `clip` = (lo, hi), predictions are clipped to the rating range
    before the error is taken (off by default).
    """
    if obs.n_obs == 0:
        raise ValueError("RMSE over an empty observation set is undefined")
    X = _as_dense(X)
    if X.shape != obs.shape:
        raise ValueError(f"matrix shape {X.shape} != observations shape {obs.shape}")
    pred = kernels.gather(X, obs.rows, obs.cols)
    if clip is not None:
        pred = np.clip(pred, clip[0], clip[1])
    d = pred - obs.values
    return float(np.sqrt((d @ d) / obs.n_obs))


def objective(X, obs, L_r, L_c, cfg):
    """Full model objective at X (nuclear + data + Dirichlet terms)."""
    X = _as_dense(X)
    if X.shape != obs.shape:
        raise ValueError(f"matrix shape {X.shape} != observations shape {obs.shape}")
    _check_problem(obs, L_r, L_c)
    total = 0.5 * kernels.masked_sq_diff(X, obs.rows, obs.cols, obs.values)
    if cfg.gamma_n > 0:
        total += cfg.gamma_n * nuclear_norm(X)
    if cfg.gamma_r > 0 and L_r is not None:
        total += 0.5 * cfg.gamma_r * dirichlet_energy(L_r, X, "left")
    if cfg.gamma_c > 0 and L_c is not None:
        total += 0.5 * cfg.gamma_c * dirichlet_energy(L_c, X, "right")
    return float(total)


def quadratic_objective(Y, obs, L_r, L_c, gamma_r, gamma_c):
    """The smooth part G(Y): data term plus weighted Dirichlet energies."""
    Y = _as_dense(Y, "Y")
    total = 0.5 * kernels.masked_sq_diff(Y, obs.rows, obs.cols, obs.values)
    if gamma_r > 0 and L_r is not None:
        total += 0.5 * gamma_r * dirichlet_energy(L_r, Y, "left")
    if gamma_c > 0 and L_c is not None:
        total += 0.5 * gamma_c * dirichlet_energy(L_c, Y, "right")
    return float(total)


def quadratic_gradient(Y, obs, L_r, L_c, gamma_r, gamma_c):
    """Gradient of G: A o (Y - M) + gamma_r L_r Y + gamma_c Y L_c."""
    Y = _as_dense(Y, "Y")
    resid = kernels.gather(Y, obs.rows, obs.cols) - obs.values
    out = kernels.scatter(obs.rows, obs.cols, resid, Y.shape)
    if gamma_r > 0 and L_r is not None:
        out += gamma_r * laplacian_apply(L_r, Y, "left")
    if gamma_c > 0 and L_c is not None:
        out += gamma_c * laplacian_apply(L_c, Y, "right")
    return out


def y_system_operator(obs, L_r, L_c, cfg):
    """Matrix-free SPD operator of the Y-subproblem normal equations.

    Applies Y -> A o Y + gamma_r L_r Y + gamma_c Y L_c + rho Y; one
    application costs a masked Hadamard, up to two Laplacian products and
    a scaled add. Terms with zero weight or absent graphs are skipped
    entirely, so the graphs-off path is the same code as a run without
    graphs.
    """
    _check_problem(obs, L_r, L_c)
    rows, cols = obs.rows, obs.cols
    shape = obs.shape
    gamma_r, gamma_c, rho = cfg.gamma_r, cfg.gamma_c, cfg.rho
    use_r = gamma_r > 0 and L_r is not None
    use_c = gamma_c > 0 and L_c is not None

    def apply(Y):
        out = kernels.scatter(rows, cols, kernels.gather(Y, rows, cols), shape)
        out += rho * Y
        if use_r:
            out += gamma_r * laplacian_apply(L_r, Y, "left")
        if use_c:
            out += gamma_c * laplacian_apply(L_c, Y, "right")
        return out

    return apply


def conjugate_gradient(apply_A, b, x0=None, tol=1e-8, max_iter=200):
    """Conjugate gradient for SPD operators under the Frobenius inner product.

    Tracks the iterate with the smallest residual seen so far and returns
    it, so a stall near machine precision cannot degrade the solution; the
    recorded history is the relative residual of that exposed iterate and
    is therefore non-increasing.

    Returns
    -------
    (x, CGResult)
    """
    b = np.asarray(b, dtype=np.float64)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), CGResult(True, 0, 0.0, [0.0])

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - apply_A(x)
    p = r.copy()
    rs = float(np.vdot(r, r))

    best_x = x.copy()
    best_res = np.sqrt(rs) / b_norm
    history = [best_res]
    iterations = 0

    while best_res > tol and iterations < max_iter:
        Ap = apply_A(p)
        pAp = float(np.vdot(p, Ap))
        if pAp <= 0.0:
            break  # loss of positive definiteness in floating point
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(np.vdot(r, r))
        iterations += 1
        res = np.sqrt(rs_new) / b_norm
        if res < best_res:
            best_res = res
            best_x = x.copy()
        history.append(best_res)
        p *= rs_new / rs
        p += r
        rs = rs_new

    return best_x, CGResult(best_res <= tol, iterations, best_res, history)


def y_subproblem(obs, L_r, L_c, H, cfg, warm_start=None):
    """Solve (A o Y) + gamma_r L_r Y + gamma_c Y L_c + rho Y = A o M + rho H.

    This is the optimality condition of the quadratic ADMM block; the
    system is solved matrix-free by conjugate gradient, warm-started from
    `warm_start` when given. Returns (Y, CGResult); a CG that exhausts its
    iteration cap is reported through the result flag, not an exception.
    """
    H = _as_dense(H, "H")
    if H.shape != obs.shape:
        raise ValueError(f"H shape {H.shape} != observations shape {obs.shape}")
    b = kernels.scatter(obs.rows, obs.cols, obs.values, obs.shape)
    b += cfg.rho * H
    apply_A = y_system_operator(obs, L_r, L_c, cfg)
    return conjugate_gradient(apply_A, b, x0=warm_start,
                              tol=cfg.cg_tol, max_iter=cfg.cg_max_iter)


def admm_solve(obs, L_r=None, L_c=None, cfg=None, init=None):
    """Run ADMM on the full model and return a SolveReport.

    Parameters
    ----------
    obs : SparseObservations
    L_r, L_c : LaplacianView or None
        Row / column graph Laplacians; None drops the corresponding term.
    cfg : SolverConfig
    init : ndarray, optional
        Starting value for X and Y (default zeros). `mean_init(obs)` gives
        the observed-mean imputation variant.

    Notes
    -----
    Per sweep: X <- svt_prox(Y - Z/rho, gamma_n/rho), Y <- quadratic
    subproblem with H = X + Z/rho warm-started at the previous Y,
    Z <- Z + rho (X - Y). Stops when the primal residual ||X - Y||_F and
    the dual residual rho ||Y - Y_prev||_F both fall below
    sqrt(mn) * tol_abs + tol_rel * (iterate scale).
    """
    if cfg is None:
        cfg = SolverConfig()
    _check_problem(obs, L_r, L_c)
    m, n = obs.shape

    if init is None:
        Y = np.zeros((m, n))
    else:
        Y = _as_dense(init, "init").copy()
        if Y.shape != (m, n):
            raise ValueError(f"init shape {Y.shape} != observations shape {(m, n)}")
    X = Y.copy()
    Z = np.zeros((m, n))

    eta = cfg.gamma_n / cfg.rho
    sqrt_mn = np.sqrt(m * n)
    trace = []
    cg_exhausted = []
    cg_histories = [] if cfg.record_cg_history else None
    converged = False
    iteration = 0
    primal = dual = np.inf

    for iteration in range(1, cfg.max_iter + 1):
        H = Y - Z / cfg.rho
        if cfg.gamma_n > 0:
            X, s = _svt(H, eta)
            nuc = float(s.sum())
            rank_est = int((s > 0).sum())
        else:
            X = H
            nuc = 0.0
            rank_est = None

        H = X + Z / cfg.rho
        Y_new, cg = y_subproblem(obs, L_r, L_c, H, cfg, warm_start=Y)
        if not cg.converged:
            cg_exhausted.append(iteration)
        if cg_histories is not None:
            cg_histories.append(cg.history)

        Z += cfg.rho * (X - Y_new)
        primal = float(np.linalg.norm(X - Y_new))
        dual = cfg.rho * float(np.linalg.norm(Y_new - Y))
        Y = Y_new

        if not (np.isfinite(X).all() and np.isfinite(Y).all() and np.isfinite(Z).all()):
            raise FloatingPointError(
                f"non-finite ADMM iterate at iteration {iteration} "
                f"(rho={cfg.rho}); the penalty parameter may be unstable for "
                f"this problem scale")

        obj = cfg.gamma_n * nuc + quadratic_objective(
            Y, obs, L_r, L_c, cfg.gamma_r, cfg.gamma_c)
        trace.append(TraceRecord(iteration, obj, primal, dual, rank_est))

        eps_pri = sqrt_mn * cfg.tol_abs + cfg.tol_rel * max(
            float(np.linalg.norm(X)), float(np.linalg.norm(Y)))
        eps_dual = sqrt_mn * cfg.tol_abs + cfg.tol_rel * float(np.linalg.norm(Z))
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break

    state = SolverState(X=X, Y=Y, Z=Z, iteration=iteration,
                        primal_residual=primal, dual_residual=dual)
    return SolveReport(recovered=Y, trace=trace, converged=converged,
                       iterations_used=iteration, final_state=state,
                       cg_exhausted=cg_exhausted, cg_histories=cg_histories)


def mean_init(obs):
    """Zero matrix with the observed mean imputed on the observed cells."""
    if obs.n_obs == 0:
        return np.zeros(obs.shape)
    mean = float(obs.values.mean())
    return kernels.scatter(obs.rows, obs.cols,
                           np.full(obs.n_obs, mean), obs.shape)


def stopping_thresholds(state, cfg, shape):
    """(eps_primal, eps_dual) of the combined stop rule at a given state."""
    sqrt_mn = np.sqrt(shape[0] * shape[1])
    eps_pri = sqrt_mn * cfg.tol_abs + cfg.tol_rel * max(
        float(np.linalg.norm(state.X)), float(np.linalg.norm(state.Y)))
    eps_dual = sqrt_mn * cfg.tol_abs + cfg.tol_rel * float(np.linalg.norm(state.Z))
    return eps_pri, eps_dual
