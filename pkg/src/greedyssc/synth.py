"""Synthetic unions of equally separated subspaces with bounded noise."""

from dataclasses import asdict, dataclass

import numpy as np

from .geometry import DataSet, SubspaceModel, affinity, min_subspace_angle
from .numerics import rng_stream, sample_ball

VERIFY_TOL = 1e-10

# stream ids under the master seed
_ROTATION, _POINTS, _NOISE = 0, 1, 2


@dataclass
class SynthSpec:
    n: int = 100
    d: int = 20
    L: int = 3
    rho: float = 0.5
    N_l: int = 150
    epsilon: float = 0.1
    master_seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.n < self.d * (self.L + 1):
            raise ValueError(f"infeasible spec: need n >= d (L + 1) = {self.d * (self.L + 1)}, got n={self.n}")
        if self.N_l < 1:
            raise ValueError("N_l must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    def to_dict(self):
        return asdict(self)


def random_rotation(rng, n):
    """Haar-distributed orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def gen_subspaces(spec):
    """``L`` subspaces of dimension ``d`` with every pairwise affinity equal to ``rho``.

    Basis vector ``t`` of subspace ``l`` is ``cos(a) w_t + sin(a) v_{l,t}``
    with ``cos(a)^2 = rho``, where the ``w`` block is shared and the ``v``
    blocks are mutually orthogonal. Every principal cosine between two
    subspaces is then ``rho``.
    """
    n, d, L = spec.n, spec.d, spec.L
    c, s = np.sqrt(spec.rho), np.sqrt(1.0 - spec.rho)
    rot = random_rotation(rng_stream(spec.master_seed, _ROTATION), n)
    shared = rot[:, :d]
    models = []
    for l in range(L):
        own = rot[:, d * (l + 1): d * (l + 2)]
        models.append(SubspaceModel(c * shared + s * own))
    target_angle = np.arccos(spec.rho)
    for a in range(L):
        for b in range(a + 1, L):
            if abs(affinity(models[a], models[b]) - spec.rho) > VERIFY_TOL:
                raise RuntimeError("generated subspaces miss the target affinity")
            if abs(min_subspace_angle(models[a], models[b]) - target_angle) > VERIFY_TOL:
                raise RuntimeError("generated subspaces miss the target minimal angle")
    return models


def gen_points(model, N_l, rng):
    """``N_l`` points drawn uniformly from the unit sphere of ``model``'s subspace."""
    if N_l < 1:
        raise ValueError("N_l must be >= 1")
    g = rng.standard_normal((model.dim, N_l))
    g /= np.linalg.norm(g, axis=0)
    X = model.basis @ g
    return X / np.linalg.norm(X, axis=0)


def add_noise(X, eps, rng):
    """``Y = X + E`` with each column of ``E`` uniform in the ``eps``-ball; no renormalization."""
    X = np.asarray(X, dtype=float)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return X.copy()
    return X + sample_ball(rng, X.shape[0], eps, size=X.shape[1])


def generate(spec):
    """Build the full labelled dataset and its ground-truth subspaces.

    Returns
    -------
    dataset : DataSet
        Labels run from 1 to ``L``.
    models : list of SubspaceModel
    """
    models = gen_subspaces(spec)
    clean, noisy, labels = [], [], []
    for l, model in enumerate(models):
        X = gen_points(model, spec.N_l, rng_stream(spec.master_seed, _POINTS, l))
        clean.append(X)
        noisy.append(add_noise(X, spec.epsilon, rng_stream(spec.master_seed, _NOISE, l)))
        labels.append(np.full(spec.N_l, l + 1))
    dataset = DataSet(
        points=np.hstack(noisy),
        labels=np.concatenate(labels),
        clean_points=np.hstack(clean),
        noise_bound=spec.epsilon,
    )
    return dataset, models
