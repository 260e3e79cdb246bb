"""scikit-learn compatible front end for greedy sparse subspace clustering."""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .clustering import build_similarity, spectral_cluster
from .greedy import ALGORITHMS, GreedyConfig, coefficient_matrix, regress_all


class GreedySubspaceClustering(ClusterMixin, BaseEstimator):
    """Sparse subspace clustering with MP or OMP neighbor selection.

    Every sample is regressed on the other samples by matching pursuit
    (``algorithm="MP"``) or orthogonal matching pursuit (``"OMP"``). The
    coefficient magnitudes form a symmetric similarity graph, which is
    split by normalized spectral clustering.

    Parameters
    ----------
    n_clusters : int, default=8
        Number of clusters.
    algorithm : {"MP", "OMP"}, default="MP"
    n_nonzero : int, default=10
        Maximum number of greedy iterations per sample.
    tau_abs : float, default=1e-6
        Absolute residual-norm stopping threshold.
    tau_rel : float, default=1e-6
        Stopping threshold relative to the sample norm.
    random_state : int or None, default=None
        Seed for the k-means stage; None means 0.
    keep_residuals : bool, default=False
        Retain per-iteration residuals in ``traces_``.

    Attributes
    ----------
    representation_matrix_ : ndarray, shape (n_samples, n_samples)
        Row ``i`` holds the greedy coefficients of sample ``i``.
    affinity_matrix_ : ndarray, shape (n_samples, n_samples)
    labels_ : ndarray, shape (n_samples,)
    traces_ : list of GreedyTrace
    n_iter_ : ndarray, shape (n_samples,)
        Greedy selections made for each sample.
    """

    def __init__(self, n_clusters=8, algorithm="MP", n_nonzero=10, tau_abs=1e-6,
                 tau_rel=1e-6, random_state=None, keep_residuals=False):
        self.n_clusters = n_clusters
        self.algorithm = algorithm
        self.n_nonzero = n_nonzero
        self.tau_abs = tau_abs
        self.tau_rel = tau_rel
        self.random_state = random_state
        self.keep_residuals = keep_residuals

    def _config(self):
        if str(self.algorithm).upper() not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        return GreedyConfig(m_max=self.n_nonzero, tau_abs=self.tau_abs, tau_rel=self.tau_rel,
                            algorithm=self.algorithm, keep_residuals=self.keep_residuals)

    def fit_self_representation(self, X, y=None):
        """Compute the greedy representation matrix without clustering.

        Parameters
        ----------
        X : array-like, shape (n_samples, n_features)
        """
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        if np.any(np.linalg.norm(X, axis=1) == 0.0):
            raise ValueError("samples must be nonzero")
        self.traces_ = regress_all(X.T, self._config())
        self.representation_matrix_ = coefficient_matrix(self.traces_)
        self.n_iter_ = np.array([t.n_iter for t in self.traces_])
        self.n_features_in_ = X.shape[1]
        return self

    def fit(self, X, y=None):
        """Regress every sample on the others, then cluster the similarity graph.

        Parameters
        ----------
        X : array-like, shape (n_samples, n_features)
        y : ignored

        Returns
        -------
        self
        """
        self.fit_self_representation(X)
        self.affinity_matrix_ = build_similarity(self.representation_matrix_)
        seed = 0 if self.random_state is None else int(self.random_state)
        self.labels_ = spectral_cluster(self.affinity_matrix_, self.n_clusters, seed=seed)
        return self
