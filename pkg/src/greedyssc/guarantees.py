"""Sufficient conditions for correct neighbor selection by MP/OMP.

The first selection is certified by comparing worst-case inter-cluster
coherence against the in-radius, each moved by the extreme noisy-inner-
product perturbation. Later selections are certified from the angle of
deviation of the current residual.
"""

from dataclasses import dataclass, field

import numpy as np

from .extremal import f_extremes
from .geometry import (
    aod,
    inradius_cluster,
    min_angle_to_others,
    mutual_coherence,
    worst_coherence,
)
from .greedy import GreedyConfig, regress

CONVENTIONS = ("lemma", "printed")
_ALIASES = {"lemma": "lemma", "lemma-consistent": "lemma", "printed": "printed", "as-printed": "printed"}
_UNIT_CLAMP = 1e-12


def _convention(name):
    try:
        return _ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown convention {name!r}; expected one of {CONVENTIONS}") from None


@dataclass
class StepCertificate:
    m: int
    lhs: float
    rhs: float
    holds: bool
    aod: float
    theta_k: float


@dataclass
class CertificateReport:
    """Certificate evaluation along one greedy regression.

    ``certified`` is how many leading selections the certificates vouch for;
    ``unsound`` flags a wrong selection among them.
    """

    query_index: int
    label: int
    convention: str
    first_holds: bool
    first_lhs: float
    first_rhs: float
    first_margin: float
    steps: list = field(default_factory=list)
    sdp: bool = True
    selections: list = field(default_factory=list)
    certified: int = 0
    unsound: bool = False


def noise_penalty(mu_c, r_k, eps, convention="lemma"):
    """``max f`` at ``arccos(mu_c)`` minus ``min f`` at ``arccos(r_k)``.

    The ``"printed"`` convention multiplies the difference by a further
    ``eps``.
    """
    conv = _convention(convention)
    if eps == 0:
        return 0.0
    upper = f_extremes(float(np.arccos(mu_c)), eps).f_max
    lower = f_extremes(float(np.arccos(r_k)), eps).f_min
    pen = upper - lower
    return eps * pen if conv == "printed" else pen


def check_first_selection(mu_c, r_k, eps, convention="lemma"):
    """First-selection certificate: ``mu_c < r_k - penalty``.

    Returns
    -------
    holds : bool
    margin : float
        ``r_k - penalty - mu_c``; positive exactly when ``holds``.
    penalty : float
    """
    if not (0.0 < mu_c < 1.0 and 0.0 < r_k < 1.0):
        raise ValueError("coherence and in-radius must lie in (0, 1)")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    pen = noise_penalty(mu_c, r_k, eps, convention)
    margin = r_k - pen - mu_c
    return bool(margin > 0.0), float(margin), float(pen)


def check_next_selection(r_m, S_k, theta_k, Xk_clean, i, eps):
    """Certificate for the selection following residual ``r_m``.

    Parameters
    ----------
    r_m : ndarray, shape (n,)
    S_k : SubspaceModel
        True subspace of the query's cluster.
    theta_k : float
        Minimal angle from ``S_k`` to every other subspace.
    Xk_clean : ndarray, shape (n, N_k)
        Clean points of the query's cluster.
    i : int or None
        Column of ``Xk_clean`` holding the query itself, excluded from the max.
    eps : float

    Returns
    -------
    (holds, lhs, rhs)
    """
    r_m = np.asarray(r_m, dtype=float)
    r_norm = np.linalg.norm(r_m)
    if r_norm <= 1e-12:
        raise ValueError("zero residual: iteration already converged")
    phi = aod(r_m, S_k)
    lhs = np.cos(max(theta_k - phi, 0.0)) + 2.0 * eps
    cos = np.abs(np.asarray(Xk_clean, dtype=float).T @ r_m) / r_norm
    if i is not None:
        cos = np.delete(cos, i)
    rhs = float(cos.max()) if cos.size else 0.0
    return bool(lhs < rhs), float(lhs), rhs


def normalized_residuals(Y, traces):
    """Unit residuals ``r_0 = y_i, ..., r_{m-1}`` that drove each selection, as columns."""
    Y = np.asarray(Y, dtype=float)
    cols = []
    for t in traces:
        if t.n_iter and t.residuals is None:
            raise ValueError("residual snapshots are required")
        driving = [Y[:, t.query_index]] + (list(t.residuals[:-1]) if t.n_iter else [])
        for r in driving[: max(t.n_iter, 1)]:
            nr = np.linalg.norm(r)
            if nr > 1e-12:
                cols.append(r / nr)
    return np.array(cols).T


def check_noiseless_omp(W_k, other_clusters, r_k, eps=0.0):
    """Noiseless OMP condition ``max_l mu_c(W_k, X_l) < r_k``."""
    if eps != 0:
        raise ValueError("the residual-coherence condition is a noiseless condition")
    W_k = np.asarray(W_k, dtype=float)
    worst = max(mutual_coherence(W_k, X_l) for X_l in other_clusters)
    return bool(worst < r_k)


def sdp_verdict(trace, labels, i=None):
    """True when every selected neighbor shares the query's label."""
    labels = np.asarray(labels)
    i = trace.query_index if i is None else i
    if not trace.selections:
        return True
    return bool(np.all(labels[np.asarray(trace.selections)] == labels[i]))


@dataclass
class ClusterGeometry:
    mu_c: float
    r_k: float
    theta_k: float


def cluster_geometry(dataset, models, **inradius_kw):
    """Coherence, in-radius and minimal angle for every cluster of ``dataset``."""
    if dataset.clean_points is None or dataset.labels is None:
        raise ValueError("certificates need clean points and labels")
    ks = list(dataset.clusters)
    if len(models) != len(ks):
        raise ValueError("need one subspace model per cluster")
    out = {}
    for idx, k in enumerate(ks):
        out[k] = ClusterGeometry(
            mu_c=worst_coherence(dataset, k),
            r_k=inradius_cluster(dataset.cluster(k), span_dim=models[idx].dim, **inradius_kw),
            theta_k=min_angle_to_others(models, idx),
        )
    return out


def _clamp_unit(x):
    return min(max(x, _UNIT_CLAMP), 1.0 - _UNIT_CLAMP)


def certify_run(dataset, models, cfg, algorithm=None, convention="lemma",
                geometry=None, traces=None, inradius_kw=None):
    """Run MP/OMP on every point and evaluate the certificates along each run.

    Parameters
    ----------
    dataset : DataSet
        Needs labels, clean points and ``noise_bound``.
    models : list of SubspaceModel
        True subspaces aligned with ``numpy.unique(dataset.labels)``.
    cfg : GreedyConfig
    algorithm : {"MP", "OMP"}, optional
        Overrides ``cfg.algorithm``.
    convention : {"lemma", "printed"}
    geometry, traces : optional
        Precomputed :func:`cluster_geometry` output and per-point traces.

    Returns
    -------
    list of CertificateReport
        One per point, in index order.
    """
    conv = _convention(convention)
    if dataset.clean_points is None or dataset.labels is None or dataset.noise_bound is None:
        raise ValueError("certify_run needs clean points, labels and the noise bound")
    eps = float(dataset.noise_bound)
    if algorithm is not None:
        cfg = GreedyConfig(cfg.m_max, cfg.tau_abs, cfg.tau_rel, algorithm, keep_residuals=True)
    elif not cfg.retain_residuals(dataset.n_points):
        cfg = GreedyConfig(cfg.m_max, cfg.tau_abs, cfg.tau_rel, cfg.algorithm, keep_residuals=True)
    geometry = geometry or cluster_geometry(dataset, models, **(inradius_kw or {}))
    ks = list(dataset.clusters)
    labels = dataset.labels
    Y = dataset.points

    first = {}
    for k, g in geometry.items():
        if g.r_k <= 0.0:
            first[k] = (False, float("nan"), float("nan"), float("-inf"))
            continue
        # clamping keeps the arguments inside the open unit interval; moving
        # mu_c up or r_k down only tightens the condition
        mu, r = _clamp_unit(g.mu_c), _clamp_unit(g.r_k)
        holds, margin, pen = check_first_selection(mu, r, eps, conv)
        first[k] = (holds, mu, r - pen, margin)

    reports = []
    for i in range(dataset.n_points):
        k = labels[i]
        idx = ks.index(k)
        trace = traces[i] if traces is not None else regress(Y, i, cfg)
        members = np.flatnonzero(labels == k)
        Xk = dataset.clean_points[:, members]
        pos = int(np.flatnonzero(members == i)[0])
        ok1, lhs1, rhs1, margin1 = first[k]
        entries = []
        for m in range(1, trace.n_iter + 1):
            r_m = trace.residuals[m - 1]
            if np.linalg.norm(r_m) <= 1e-12:
                break
            h, lhs, rhs = check_next_selection(r_m, models[idx], geometry[k].theta_k, Xk, pos, eps)
            entries.append(StepCertificate(m, lhs, rhs, h, aod(r_m, models[idx]), geometry[k].theta_k))
        certified = 0
        if ok1 and trace.n_iter:
            certified = 1
            for e in entries:
                if not e.holds or certified >= trace.n_iter:
                    break
                certified += 1
        wrong = labels[np.asarray(trace.selections[:certified], dtype=int)] != k
        reports.append(CertificateReport(
            query_index=i, label=int(k), convention=conv,
            first_holds=ok1, first_lhs=lhs1, first_rhs=rhs1, first_margin=margin1,
            steps=entries, sdp=sdp_verdict(trace, labels, i),
            selections=list(trace.selections), certified=certified,
            unsound=bool(wrong.any()),
        ))
    return reports
