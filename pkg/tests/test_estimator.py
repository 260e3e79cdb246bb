import numpy as np
import pytest
from sklearn.base import clone

from greedyssc import GreedySubspaceClustering
from greedyssc.clustering import ccr
from greedyssc.synth import SynthSpec, generate


@pytest.fixture(scope="module")
def data():
    ds, _ = generate(SynthSpec(n=30, d=4, L=3, N_l=20, rho=0.3, epsilon=0.05, master_seed=1))
    return ds.points.T, ds.labels


def test_params_round_trip():
    est = GreedySubspaceClustering(n_clusters=3, algorithm="OMP", n_nonzero=4)
    p = est.get_params()
    assert p["n_clusters"] == 3 and p["algorithm"] == "OMP" and p["n_nonzero"] == 4
    est.set_params(n_nonzero=6)
    assert clone(est).get_params()["n_nonzero"] == 6


@pytest.mark.parametrize("alg", ["MP", "OMP"])
def test_fit_predict(data, alg):
    X, y = data
    est = GreedySubspaceClustering(n_clusters=3, algorithm=alg, n_nonzero=4, random_state=0)
    labels = est.fit_predict(X)
    assert labels.shape == (X.shape[0],)
    assert ccr(labels, y) >= 0.9
    assert est.representation_matrix_.shape == (60, 60)
    assert np.array_equal(est.affinity_matrix_, est.affinity_matrix_.T)
    assert est.n_features_in_ == 30
    assert np.all(est.n_iter_ <= 4)


def test_deterministic(data):
    X, _ = data
    a = GreedySubspaceClustering(n_clusters=3, random_state=2).fit(X).labels_
    b = GreedySubspaceClustering(n_clusters=3, random_state=2).fit(X).labels_
    assert np.array_equal(a, b)


def test_input_validation(data):
    X, _ = data
    with pytest.raises(ValueError):
        GreedySubspaceClustering(algorithm="lasso").fit(X)
    bad = X.copy()
    bad[0] = 0.0
    with pytest.raises(ValueError):
        GreedySubspaceClustering(n_clusters=3).fit(bad)
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        GreedySubspaceClustering(n_clusters=3).fit(bad)


def test_self_representation_only(data):
    X, _ = data
    est = GreedySubspaceClustering(n_nonzero=3, keep_residuals=True).fit_self_representation(X)
    assert not hasattr(est, "labels_")
    assert est.traces_[0].residuals.shape == (est.traces_[0].n_iter, 30)
