"""Similarity graph, spectral clustering and evaluation metrics."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import AOD_PAR_ZERO, AOD_ZERO, residual_split
from .numerics import rng_stream, sym_eig

DEGREE_FLOOR = 1e-12


@dataclass
class MetricSeries:
    """Per-iteration averages over all query points still active at iteration ``m``.

    Index ``m - 1`` of every array refers to iteration ``m``.
    """

    r_par_mean: np.ndarray
    r_perp_mean: np.ndarray
    aod_mean: np.ndarray
    p_correct: np.ndarray
    n_active: np.ndarray
    ccr: float = None


def build_similarity(C):
    """Symmetric graph ``W[i, j] = |C[i, j]| + |C[j, i]|`` from row coefficient vectors."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("coefficients must form a square (N, N) array")
    if np.any(np.diag(C) != 0.0):
        raise ValueError("self-coefficients must be zero")
    A = np.abs(C)
    return A + A.T


def _kmeans_once(X, k, rng, max_iter):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))
        centers.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    M = X[centers].copy()
    labels = None
    for _ in range(max_iter):
        dist = ((X[:, None, :] - M[None, :, :]) ** 2).sum(axis=2)
        new = dist.argmin(axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = labels == c
            if members.any():
                M[c] = X[members].mean(axis=0)
            else:
                # refill an empty cluster with the point worst served by its center
                far = int(np.argmax(dist[np.arange(n), labels]))
                M[c] = X[far]
                labels[far] = c
    dist = ((X[:, None, :] - M[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    inertia = float(dist[np.arange(n), labels].sum())
    return labels, inertia


def kmeans(X, k, seed=0, n_init=10, max_iter=100):
    """Lloyd's k-means with farthest-point seeding; lowest inertia over restarts."""
    X = np.asarray(X, dtype=float)
    best_labels, best_inertia = None, np.inf
    for s in range(n_init):
        labels, inertia = _kmeans_once(X, k, rng_stream(seed, s), max_iter)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def spectral_embedding(W, n_clusters):
    """Row-normalized eigenvectors of the normalized Laplacian for its smallest eigenvalues."""
    W = np.asarray(W, dtype=float)
    deg = np.maximum(W.sum(axis=1), DEGREE_FLOOR)
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(W.shape[0]) - inv_sqrt[:, None] * W * inv_sqrt[None, :]
    _, V = sym_eig(lap)
    emb = V[:, :n_clusters]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return np.divide(emb, norms, out=np.zeros_like(emb), where=norms > 0)


def spectral_cluster(W, n_clusters, seed=0):
    """Normalized spectral clustering of a similarity graph; labels in ``0..L-1``."""
    W = np.asarray(W, dtype=float)
    N = W.shape[0]
    if n_clusters < 2:
        raise ValueError("need at least two clusters")
    if n_clusters > N:
        raise ValueError("more clusters than points")
    return kmeans(spectral_embedding(W, n_clusters), n_clusters, seed=seed)


def ccr(predicted, truth):
    """Fraction of points correctly clustered under the best label matching."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("label arrays differ in length")
    _, p = np.unique(predicted, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    table = np.zeros((p.max(initial=-1) + 1, t.max(initial=-1) + 1), dtype=int)
    np.add.at(table, (p, t), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / truth.size


def compute_metrics(traces, models, labels, eps=None):
    """Residual, AoD and correct-selection statistics per iteration.

    Parameters
    ----------
    traces : list of GreedyTrace
        One per point, with residual snapshots retained.
    models : sequence of SubspaceModel
        True subspaces, aligned with ``numpy.unique(labels)``.
    labels : array-like, shape (N,)
    eps : float, optional
        Noise bound; informational only.

    Returns
    -------
    MetricSeries
    """
    labels = np.asarray(labels)
    uniq = list(np.unique(labels))
    if len(models) != len(uniq):
        raise ValueError("need one subspace model per cluster label")
    m_len = max((t.n_iter for t in traces), default=0)
    par_sum = np.zeros(m_len)
    perp_sum = np.zeros(m_len)
    aod_sum = np.zeros(m_len)
    aod_cnt = np.zeros(m_len, dtype=int)
    hit = np.zeros(m_len)
    active = np.zeros(m_len, dtype=int)
    for t in traces:
        if t.n_iter == 0:
            continue
        if t.residuals is None:
            raise ValueError("residual snapshots are required; enable keep_residuals")
        k = labels[t.query_index]
        par, perp = residual_split(t.residuals.T, models[uniq.index(k)])
        m = t.n_iter
        par_sum[:m] += par
        perp_sum[:m] += perp
        ok = (np.hypot(par, perp) > AOD_ZERO)
        ang = np.where(par > AOD_PAR_ZERO, np.arctan2(perp, np.maximum(par, AOD_PAR_ZERO)), 0.5 * np.pi)
        aod_sum[:m] += np.where(ok, ang, 0.0)
        aod_cnt[:m] += ok
        hit[:m] += labels[np.asarray(t.selections)] == k
        active[:m] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        return MetricSeries(
            r_par_mean=par_sum / active,
            r_perp_mean=perp_sum / active,
            aod_mean=aod_sum / aod_cnt,
            p_correct=hit / active,
            n_active=active,
        )


def snr_db(eps):
    """Signal-to-noise ratio ``10 log10(1 / eps^2)`` in dB."""
    return 10.0 * np.log10(1.0 / np.asarray(eps, dtype=float) ** 2)


def eps_from_snr(snr):
    return 10.0 ** (-np.asarray(snr, dtype=float) / 20.0)
