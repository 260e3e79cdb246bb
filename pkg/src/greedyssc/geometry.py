"""Data containers and the geometric quantities used by the certificates.

All point sets are matrices whose columns are points.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import orthonormalize, sym_eig

UNIT_TOL = 1e-10
AOD_ZERO = 1e-12
AOD_PAR_ZERO = 1e-14


@dataclass
class SubspaceModel:
    """Linear subspace given by an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        n, d = B.shape
        if not 0 < d < n:
            raise ValueError(f"subspace dimension must satisfy 0 < d < n, got d={d}, n={n}")
        if np.abs(B.T @ B - np.eye(d)).max() > UNIT_TOL:
            raise ValueError("basis columns are not orthonormal")
        self.basis = B

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @classmethod
    def from_columns(cls, cols):
        return cls(orthonormalize(cols))

    def project(self, v):
        return self.basis @ (self.basis.T @ v)


@dataclass
class DataSet:
    """Observed points ``y_i = x_i + e_i`` with optional ground truth.

    Attributes
    ----------
    points : ndarray, shape (n, N)
    labels : ndarray of int, shape (N,), optional
    clean_points : ndarray, shape (n, N), optional
        Unit-norm noiseless points.
    noise_bound : float, optional
    """

    points: np.ndarray
    labels: np.ndarray = None
    clean_points: np.ndarray = None
    noise_bound: float = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2:
            raise ValueError("points must be a 2-D array (n, N)")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points contain non-finite entries")
        N = self.points.shape[1]
        if self.labels is not None:
            self.labels = np.asarray(self.labels).astype(int)
            if self.labels.shape != (N,):
                raise ValueError("labels must have one entry per point")
        if self.noise_bound is not None and self.noise_bound < 0:
            raise ValueError("noise_bound must be nonnegative")
        if self.clean_points is not None:
            X = np.asarray(self.clean_points, dtype=float)
            if X.shape != self.points.shape:
                raise ValueError("clean_points must match points in shape")
            if np.abs(np.linalg.norm(X, axis=0) - 1.0).max(initial=0.0) > UNIT_TOL:
                raise ValueError("clean points must be unit-norm")
            if self.noise_bound is not None:
                gap = np.linalg.norm(self.points - X, axis=0).max(initial=0.0)
                if gap > self.noise_bound + 1e-12:
                    raise ValueError("observed points deviate from clean points by more than noise_bound")
            self.clean_points = X

    @property
    def n_points(self):
        return self.points.shape[1]

    @property
    def ambient_dim(self):
        return self.points.shape[0]

    @property
    def clusters(self):
        if self.labels is None:
            raise ValueError("dataset has no labels")
        return np.unique(self.labels)

    def cluster(self, k, clean=True):
        """Columns of cluster ``k`` (clean points by default)."""
        if self.labels is None:
            raise ValueError("dataset has no labels")
        src = self.clean_points if clean else self.points
        if src is None:
            raise ValueError("clean points are required for this quantity")
        return src[:, self.labels == k]


@dataclass
class GeometrySummary:
    mu_c: dict
    r_k: dict
    theta_k: dict
    rho: np.ndarray


def mutual_coherence(Xk, Xl):
    """``max |u^T v|`` over columns ``u`` of ``Xk`` and ``v`` of ``Xl``."""
    Xk = np.asarray(Xk, dtype=float)
    Xl = np.asarray(Xl, dtype=float)
    if Xk.ndim == 1:
        Xk = Xk[:, None]
    if Xl.ndim == 1:
        Xl = Xl[:, None]
    if Xk.shape[1] == 0 or Xl.shape[1] == 0:
        raise ValueError("empty cluster")
    return float(np.abs(Xk.T @ Xl).max())


def worst_coherence(dataset, k):
    """Largest mutual coherence between clean cluster ``k`` and any other cluster."""
    others = [l for l in dataset.clusters if l != k]
    if not others:
        raise ValueError("worst coherence needs at least two clusters")
    Xk = dataset.cluster(k)
    return max(mutual_coherence(Xk, dataset.cluster(l)) for l in others)


def _basis(S):
    return S.basis if isinstance(S, SubspaceModel) else np.asarray(S, dtype=float)


def principal_cosines(A, B):
    return np.linalg.svd(_basis(A).T @ _basis(B), compute_uv=False)


def min_subspace_angle(A, B):
    """Smallest principal angle between two subspaces, in ``[0, pi/2]``."""
    s = principal_cosines(A, B)
    return float(np.arccos(np.clip(s.max(initial=0.0), 0.0, 1.0)))


def min_angle_to_others(models, k):
    """Smallest principal angle between subspace ``k`` and every other model."""
    return min(min_subspace_angle(models[k], models[l]) for l in range(len(models)) if l != k)


def affinity(A, B):
    """``||U_A^T U_B||_F / sqrt(min(d_A, d_B))``."""
    UA, UB = _basis(A), _basis(B)
    val = np.linalg.norm(UA.T @ UB) / np.sqrt(min(UA.shape[1], UB.shape[1]))
    return float(min(val, 1.0))


def _support_max(C, U, exclude=None):
    # max_j |c_j^T u| per column u of U; column exclude[k] of C is ignored for u_k
    S = np.abs(C.T @ U)
    if exclude is not None:
        S[exclude, np.arange(U.shape[1])] = 0.0
    return S.max(axis=0)


def _facet_polish(C, u):
    """Solve for the facet normal through the ``d`` most active points."""
    d = C.shape[0]
    scores = C.T @ u
    order = np.argsort(-np.abs(scores), kind="stable")[:d]
    A = C[:, order] * np.sign(scores[order])
    try:
        v = np.linalg.solve(A.T, np.ones(d))
    except np.linalg.LinAlgError:
        return None
    nv = np.linalg.norm(v)
    if not np.isfinite(nv) or nv == 0.0:
        return None
    return v / nv


def _refine(C, U, exclude=None, n_steps=300, step0=0.1, decay=0.97):
    """Projected subgradient on the sphere for ``u -> max_j |c_j^T u|``, batched.

    Returns the best value and direction found for every starting column.
    """
    U = U / np.linalg.norm(U, axis=0)
    cols = np.arange(U.shape[1])
    best_U = U.copy()
    best = _support_max(C, U, exclude)
    step = step0
    for _ in range(n_steps):
        S = C.T @ U
        A = np.abs(S)
        if exclude is not None:
            A[exclude, cols] = -1.0
        j = A.argmax(axis=0)
        G = C[:, j] * np.sign(S[j, cols])
        G -= U * (U * G).sum(axis=0)
        U = U - step * G
        U /= np.linalg.norm(U, axis=0)
        val = _support_max(C, U, exclude)
        better = val < best
        best[better] = val[better]
        best_U[:, better] = U[:, better]
        step *= decay
    return best, best_U


def _polished(C, u, val):
    for _ in range(3):
        cand = _facet_polish(C, u)
        if cand is None:
            break
        cval = _support_max(C, cand[:, None])[0]
        if cval >= val:
            break
        u, val = cand, cval
    return float(val)


def _inradius_coords(C, rng, n_directions, n_refine):
    d = C.shape[0]
    if d == 1:
        return float(np.abs(C).max())
    U = rng.standard_normal((d, n_directions))
    U /= np.linalg.norm(U, axis=0)
    vals = _support_max(C, U)
    top = np.argsort(vals, kind="stable")[:n_refine]
    best, best_U = _refine(C, U[:, top])
    k = int(np.argmin(best))
    return _polished(C, best_U[:, k], best[k])


def inradius_hull(X, n_directions=20000, n_refine=16, random_state=0):
    """Estimated in-radius of the symmetric convex hull of the columns of ``X``.

    The in-radius is ``min_u max_j |x_j^T u|`` over unit ``u`` in the span
    of the columns. Random directions are screened, the best ``n_refine``
    are refined locally, and the smallest value found is returned. The
    value is attained by an actual direction, so it never underestimates
    the true in-radius.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] < 1:
        raise ValueError("in-radius needs at least one point")
    Q = orthonormalize(X)
    rng = np.random.default_rng(random_state)
    return _inradius_coords(Q.T @ X, rng, n_directions, n_refine)


def inradius_cluster(Xk, n_directions=20000, n_refine=16, random_state=0, span_dim=None):
    """Minimum over points of the leave-one-out in-radius of a cluster.

    With ``span_dim`` set, a leave-one-out set spanning fewer than
    ``span_dim`` dimensions counts as in-radius 0: its hull contains no ball
    of the ambient subspace.
    """
    Xk = np.asarray(Xk, dtype=float)
    N = Xk.shape[1]
    if N < 2:
        raise ValueError("in-radius of a cluster needs at least two points")
    Q = orthonormalize(Xk)
    C = Q.T @ Xk
    d = C.shape[0]
    if span_dim is not None and d < span_dim:
        return 0.0
    rng = np.random.default_rng(random_state)
    if d == 1:
        return float(min(np.abs(np.delete(C, i, axis=1)).max() for i in range(N)))

    full_rank = [np.linalg.matrix_rank(np.delete(C, i, axis=1)) == d for i in range(N)]
    best = np.inf
    for i in np.flatnonzero(~np.asarray(full_rank)):
        if span_dim is not None:
            return 0.0
        # the leave-one-out span shrinks; estimate within that span
        C_i = np.delete(C, i, axis=1)
        best = min(best, _inradius_coords(orthonormalize(C_i).T @ C_i, rng, n_directions, n_refine))
    keep = np.flatnonzero(full_rank)
    if keep.size == 0:
        return best

    U = rng.standard_normal((d, n_directions))
    U /= np.linalg.norm(U, axis=0)
    S = np.abs(C.T @ U)
    # leave-one-out maxima from the two largest scores per direction
    top2 = np.argsort(-S, axis=0, kind="stable")[:2]
    first = np.take_along_axis(S, top2[:1], axis=0)[0]
    second = np.take_along_axis(S, top2[1:2], axis=0)[0]
    starts, owners = [], []
    for i in keep:
        vals = np.where(top2[0] == i, second, first)
        starts.append(np.argsort(vals, kind="stable")[:n_refine])
        owners.append(np.full(min(n_refine, n_directions), i))
    owners = np.concatenate(owners)
    vals, dirs = _refine(C, U[:, np.concatenate(starts)], exclude=owners)
    for i in keep:
        mine = np.flatnonzero(owners == i)
        k = mine[np.argmin(vals[mine])]
        best = min(best, _polished(np.delete(C, i, axis=1), dirs[:, k], vals[k]))
    return float(best)


def aod(r, S):
    """Angle of deviation of a residual from subspace ``S``, in ``[0, pi/2]``."""
    r = np.asarray(r, dtype=float)
    if np.linalg.norm(r) <= AOD_ZERO:
        raise ValueError("AoD undefined for a zero residual")
    B = _basis(S)
    par = B @ (B.T @ r)
    npar = np.linalg.norm(par)
    if npar <= AOD_PAR_ZERO:
        return 0.5 * np.pi
    return float(np.arctan2(np.linalg.norm(r - par), npar))


def residual_split(R, S):
    """Norms of the in-subspace and orthogonal parts of each column of ``R``."""
    B = _basis(S)
    R = np.atleast_2d(np.asarray(R, dtype=float).T).T
    coords = B.T @ R
    par = np.linalg.norm(coords, axis=0)
    perp = np.linalg.norm(R - B @ coords, axis=0)
    return par, perp


def pca_subspace(points, d):
    """Top-``d`` eigenvectors of the uncentered second-moment matrix."""
    X = np.asarray(points, dtype=float)
    n, N = X.shape
    if N < d:
        raise ValueError("need at least d points")
    w, V = sym_eig(X @ X.T)
    w = w[::-1]
    if w[d - 1] <= 1e-10 * max(w[0], 1e-300):
        raise ValueError(f"d={d} exceeds the rank of the points")
    return SubspaceModel(V[:, ::-1][:, :d].copy())


def summarize(dataset, models, **inradius_kw):
    """Per-cluster coherence, in-radius and minimal angle plus pairwise affinity."""
    ks = list(dataset.clusters)
    L = len(models)
    rho = np.array([[affinity(models[a], models[b]) for b in range(L)] for a in range(L)])
    return GeometrySummary(
        mu_c={k: worst_coherence(dataset, k) for k in ks},
        r_k={k: inradius_cluster(dataset.cluster(k), **inradius_kw) for k in ks},
        theta_k={k: min_angle_to_others(models, idx) for idx, k in enumerate(ks)},
        rho=rho,
    )
