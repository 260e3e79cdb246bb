"""Matching pursuit and orthogonal matching pursuit neighbor selection.

Both loops regress column ``i`` of ``Y`` on the remaining columns and record
every selection, residual norm and (optionally) residual vector.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import least_squares

ALGORITHMS = ("MP", "OMP")
_SNAPSHOT_MAX_N = 2000
_SNAPSHOT_MAX_M = 64


@dataclass
class GreedyConfig:
    """Stopping rules for one greedy regression.

    A regression stops after ``m_max`` selections or once the residual norm
    is at most ``max(tau_abs, tau_rel * ||y_i||)``.
    """

    m_max: int
    tau_abs: float = 1e-6
    tau_rel: float = 1e-6
    algorithm: str = "MP"
    keep_residuals: bool = None

    def __post_init__(self):
        self.algorithm = self.algorithm.upper()
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if int(self.m_max) < 1:
            raise ValueError("m_max must be >= 1")
        self.m_max = int(self.m_max)
        if self.tau_abs < 0:
            raise ValueError("tau_abs must be nonnegative")
        if not 0 <= self.tau_rel < 1:
            raise ValueError("tau_rel must lie in [0, 1)")

    def retain_residuals(self, n_points):
        if self.keep_residuals is not None:
            return self.keep_residuals
        return n_points <= _SNAPSHOT_MAX_N and self.m_max <= _SNAPSHOT_MAX_M


@dataclass
class GreedyTrace:
    query_index: int
    selections: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    residuals: np.ndarray = None
    coefficients: np.ndarray = None

    @property
    def n_iter(self):
        return len(self.selections)


def _check(Y, i):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[1] < 2:
        raise ValueError("Y must be a 2-D array with at least two columns")
    if not 0 <= i < Y.shape[1]:
        raise IndexError(f"query index {i} out of range")
    y = Y[:, i]
    y_norm = np.linalg.norm(y)
    if y_norm == 0.0:
        raise ValueError("zero query column")
    return Y, y, y_norm


def mp_regress(Y, i, cfg, col_sq_norms=None):
    """Matching pursuit regression of column ``i`` on the other columns.

    Each step picks ``argmax_{j != i} |r^T y_j|`` (lowest index on ties),
    adds ``r^T y_j / ||y_j||^2`` to coefficient ``j`` and deflates the
    residual along ``y_j`` only. An index may be selected more than once.

    Parameters
    ----------
    Y : ndarray, shape (n, N)
        Data points as columns.
    i : int
        Query column.
    cfg : GreedyConfig
    col_sq_norms : ndarray, optional
        Precomputed ``||y_j||^2``.

    Returns
    -------
    GreedyTrace
    """
    Y, y, y_norm = _check(Y, i)
    N = Y.shape[1]
    sq = (Y * Y).sum(axis=0) if col_sq_norms is None else col_sq_norms
    tau = max(cfg.tau_abs, cfg.tau_rel * y_norm)
    keep = cfg.retain_residuals(N)
    trace = GreedyTrace(query_index=i)
    snaps = []
    coef = np.zeros(N)
    r = y.copy()
    r_norm = y_norm
    while trace.n_iter < cfg.m_max and r_norm > tau:
        corr = Y.T @ r
        corr[i] = 0.0
        j = int(np.argmax(np.abs(corr)))
        if corr[j] == 0.0:
            break
        step = corr[j] / sq[j]
        coef[j] += step
        r = r - step * Y[:, j]
        r_norm = float(np.linalg.norm(r))
        trace.selections.append(j)
        trace.residual_norms.append(r_norm)
        if keep:
            snaps.append(r)
    trace.coefficients = coef
    if keep:
        trace.residuals = np.array(snaps).reshape(len(snaps), Y.shape[0])
    return trace


def omp_regress(Y, i, cfg):
    """Orthogonal matching pursuit regression of column ``i``.

    Selections exclude ``i`` and every index already chosen. The residual is
    ``y_i`` minus its orthogonal projection onto the selected columns, kept
    through an incrementally updated orthonormal basis. Final coefficients
    are the least-squares fit on the selected support.
    """
    Y, y, y_norm = _check(Y, i)
    n, N = Y.shape
    tau = max(cfg.tau_abs, cfg.tau_rel * y_norm)
    keep = cfg.retain_residuals(N)
    trace = GreedyTrace(query_index=i)
    snaps = []
    available = np.ones(N, dtype=bool)
    available[i] = False
    Q = np.empty((n, 0))
    r = y.copy()
    r_norm = y_norm
    while trace.n_iter < cfg.m_max and r_norm > tau and available.any():
        corr = np.abs(Y.T @ r)
        corr[~available] = -1.0
        j = int(np.argmax(corr))
        available[j] = False
        q = Y[:, j].copy()
        for _ in range(2):
            q -= Q @ (Q.T @ q)
        q_norm = np.linalg.norm(q)
        if q_norm > 1e-12 * np.linalg.norm(Y[:, j]):
            Q = np.column_stack([Q, q / q_norm])
            r = y - Q @ (Q.T @ y)
            r_norm = float(np.linalg.norm(r))
        trace.selections.append(j)
        trace.residual_norms.append(r_norm)
        if keep:
            snaps.append(r)
    coef = np.zeros(N)
    if trace.selections:
        support = np.array(trace.selections)
        coef[support] = least_squares(Y[:, support], y)
    trace.coefficients = coef
    if keep:
        trace.residuals = np.array(snaps).reshape(len(snaps), n)
    return trace


def regress(Y, i, cfg, **kw):
    """Dispatch to :func:`mp_regress` or :func:`omp_regress` per ``cfg.algorithm``."""
    if cfg.algorithm == "MP":
        return mp_regress(Y, i, cfg, **kw)
    return omp_regress(Y, i, cfg)


def regress_all(Y, cfg):
    """Run the configured regression for every column; traces in index order."""
    Y = np.asarray(Y, dtype=float)
    kw = {"col_sq_norms": (Y * Y).sum(axis=0)} if cfg.algorithm == "MP" else {}
    return [regress(Y, i, cfg, **kw) for i in range(Y.shape[1])]


def coefficient_matrix(traces):
    """Stack final coefficient vectors as rows, ``C[i] = c*_i``."""
    return np.vstack([t.coefficients for t in traces])
