import numpy as np
import pytest

from greedyssc.extremal import grid_extremes
from greedyssc.geometry import SubspaceModel, aod
from greedyssc.greedy import GreedyConfig, GreedyTrace
from greedyssc.guarantees import (
    certify_run,
    check_first_selection,
    check_next_selection,
    check_noiseless_omp,
    cluster_geometry,
    noise_penalty,
    normalized_residuals,
    sdp_verdict,
)
from greedyssc.geometry import DataSet
from greedyssc.synth import SynthSpec, generate


def test_first_selection_zero_noise():
    holds, margin, pen = check_first_selection(0.3, 0.5, 0.0)
    assert holds and pen == 0.0 and margin == pytest.approx(0.2)
    assert not check_first_selection(0.5, 0.3, 0.0)[0]


def test_first_selection_equal_inputs_fail():
    for eps in (1e-3, 0.1, 0.5):
        for conv in ("lemma", "printed"):
            assert not check_first_selection(0.4, 0.4, eps, conv)[0]


def test_first_selection_domain():
    for mu, r in ((0.0, 0.5), (0.2, 1.0), (-0.1, 0.4)):
        with pytest.raises(ValueError):
            check_first_selection(mu, r, 0.1)
    with pytest.raises(ValueError):
        check_first_selection(0.2, 0.5, 0.1, convention="other")


def test_first_selection_grid_oracle():
    mu, r, eps = 0.2, 0.6, 0.1
    up = grid_extremes(np.arccos(mu), eps)[1]
    lo = grid_extremes(np.arccos(r), eps)[3]
    holds, margin, _ = check_first_selection(mu, r, eps, "lemma")
    assert margin == pytest.approx(r - (up - lo) - mu, abs=1e-8)
    assert holds == (margin > 0)
    _, m_printed, _ = check_first_selection(mu, r, eps, "printed")
    assert m_printed == pytest.approx(r - eps * (up - lo) - mu, abs=1e-8)


def test_first_selection_margin_monotone_in_noise():
    for conv in ("lemma", "printed"):
        margins = [check_first_selection(0.25, 0.55, e, conv)[1] for e in np.linspace(0, 0.9, 19)]
        assert all(b <= a + 1e-12 for a, b in zip(margins, margins[1:]))


def test_convention_aliases():
    assert noise_penalty(0.2, 0.6, 0.1, "lemma-consistent") == noise_penalty(0.2, 0.6, 0.1, "lemma")
    assert noise_penalty(0.2, 0.6, 0.1, "as-printed") == noise_penalty(0.2, 0.6, 0.1, "printed")


S3 = SubspaceModel(np.eye(3)[:, :2])


def test_later_selection_trivial_hold():
    r = np.array([1.0, 0.0, 0.0])
    X = np.column_stack([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    holds, lhs, rhs = check_next_selection(r, S3, np.pi / 2, X, 0, 0.0)
    assert holds and lhs == pytest.approx(0.0, abs=1e-15) and rhs == 1.0


def test_later_selection_fails_when_deviation_exceeds_angle():
    r = np.array([0.2, 0.0, 1.0])
    X = np.column_stack([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    a = aod(r, S3)
    holds, lhs, _ = check_next_selection(r, S3, a * 0.5, X, None, 0.05)
    assert not holds and lhs == pytest.approx(1.1)


def test_later_selection_recomputation():
    ds, models = generate(SynthSpec(n=20, d=3, L=2, N_l=8, rho=0.3, epsilon=0.1, master_seed=1))
    rng = np.random.default_rng(0)
    Xk = ds.cluster(1)
    for _ in range(20):
        r = rng.standard_normal(20)
        theta = 1.0
        holds, lhs, rhs = check_next_selection(r, models[0], theta, Xk, 2, 0.1)
        P = models[0].basis
        par = np.linalg.norm(P.T @ r)
        perp = np.linalg.norm(r - P @ (P.T @ r))
        ang = np.arctan(perp / par)
        assert lhs == pytest.approx(np.cos(max(theta - ang, 0)) + 0.2, abs=1e-12)
        cos = [abs(Xk[:, j] @ r) / np.linalg.norm(r) for j in range(Xk.shape[1]) if j != 2]
        assert rhs == pytest.approx(max(cos), abs=1e-12)
        assert holds == (rhs - lhs > 0)


def test_later_selection_lhs_monotonicity():
    rng = np.random.default_rng(2)
    X = np.eye(3)
    for _ in range(30):
        r = rng.standard_normal(3)
        base = check_next_selection(r, S3, 0.8, X, None, 0.1)[1]
        assert check_next_selection(r, S3, 1.0, X, None, 0.1)[1] <= base + 1e-15
        assert check_next_selection(r, S3, 0.8, X, None, 0.2)[1] >= base
    # more deviation, same everything else
    lhs_small = check_next_selection(np.array([1.0, 0.0, 0.1]), S3, 1.2, X, None, 0.0)[1]
    lhs_big = check_next_selection(np.array([1.0, 0.0, 0.5]), S3, 1.2, X, None, 0.0)[1]
    assert lhs_big >= lhs_small


def test_later_selection_noiseless_angular_form():
    r = np.array([0.6, 0.8, 0.0])
    X = np.column_stack([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    holds, lhs, rhs = check_next_selection(r, S3, 0.7, X, None, 0.0)
    assert lhs == pytest.approx(np.cos(0.7))
    assert holds == (np.cos(0.7) < 0.8)


def test_later_selection_zero_residual():
    with pytest.raises(ValueError):
        check_next_selection(np.zeros(3), S3, 1.0, np.eye(3), None, 0.0)


def test_noiseless_residual_condition():
    E = np.eye(6)
    assert check_noiseless_omp(E[:, :2], [E[:, 2:4], E[:, 4:]], 0.5)
    assert not check_noiseless_omp(np.column_stack([E[:, 0], E[:, 2]]), [E[:, 2:4]], 1.0)
    with pytest.raises(ValueError, match="noiseless"):
        check_noiseless_omp(E[:, :2], [E[:, 2:4]], 0.5, eps=0.1)


def test_noiseless_residual_condition_brute_force():
    rng = np.random.default_rng(3)
    W = rng.standard_normal((5, 4))
    W /= np.linalg.norm(W, axis=0)
    Xl = rng.standard_normal((5, 6))
    Xl /= np.linalg.norm(Xl, axis=0)
    worst = max(abs(W[:, i] @ Xl[:, j]) for i in range(4) for j in range(6))
    for r_k in (worst - 1e-3, worst + 1e-3):
        assert check_noiseless_omp(W, [Xl], r_k) == (worst < r_k)


def test_sdp_verdict():
    labels = np.array([1, 1, 2, 2])
    assert sdp_verdict(GreedyTrace(0), labels)
    assert not sdp_verdict(GreedyTrace(0, selections=[1, 2]), labels)
    assert sdp_verdict(GreedyTrace(0, selections=[1, 1]), labels)


def test_normalized_residuals_columns():
    Y = np.column_stack([[3.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
    t = GreedyTrace(0, selections=[2], residual_norms=[0.0], residuals=np.zeros((1, 2)))
    R = normalized_residuals(Y, [t])
    np.testing.assert_allclose(R, [[1.0], [0.0]])


def test_certify_requires_ground_truth():
    ds = DataSet(points=np.eye(4)[:, :3], labels=[1, 1, 2])
    with pytest.raises(ValueError):
        certify_run(ds, [], GreedyConfig(m_max=2))
    with pytest.raises(ValueError):
        cluster_geometry(ds, [])


@pytest.mark.parametrize("alg", ["MP", "OMP"])
@pytest.mark.parametrize("conv", ["lemma", "printed"])
def test_certify_small_run_sound(alg, conv):
    ds, models = generate(SynthSpec(n=24, d=3, L=2, N_l=9, rho=0.1, epsilon=0.02, master_seed=5))
    reps = certify_run(ds, models, GreedyConfig(m_max=3, algorithm=alg), convention=conv,
                       inradius_kw={"n_directions": 3000})
    assert len(reps) == ds.n_points
    assert not any(r.unsound for r in reps)
    assert sum(r.certified for r in reps) > 0
    for r in reps:
        assert r.first_holds == (r.first_margin > 0)
        for e in r.steps:
            assert e.holds == (e.rhs - e.lhs > 0)
