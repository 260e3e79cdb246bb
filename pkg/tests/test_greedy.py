import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedyssc.greedy import GreedyConfig, coefficient_matrix, mp_regress, omp_regress, regress, regress_all
from greedyssc.synth import SynthSpec, generate

Q20 = np.array([0.9397, 0.3420])
A = np.array([1.0, 0.0])
B = np.array([0.5, 0.8660])


def cfg(m=10, alg="MP"):
    return GreedyConfig(m_max=m, algorithm=alg, keep_residuals=True)


def test_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(m_max=0)
    with pytest.raises(ValueError):
        GreedyConfig(m_max=3, tau_abs=-1)
    with pytest.raises(ValueError):
        GreedyConfig(m_max=3, tau_rel=1.0)
    with pytest.raises(ValueError):
        GreedyConfig(m_max=3, algorithm="lasso")
    assert GreedyConfig(m_max=3, algorithm="omp").algorithm == "OMP"
    assert GreedyConfig(m_max=3).retain_residuals(100)
    assert not GreedyConfig(m_max=3).retain_residuals(5000)


@pytest.mark.parametrize("alg", ["MP", "OMP"])
def test_orthogonal_dictionary(alg):
    Y = np.column_stack([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    t = regress(Y, 2, cfg(alg=alg))
    assert t.selections == [1, 0]
    np.testing.assert_allclose(t.residuals[0], [0.6, 0.0], atol=1e-15)
    assert t.residual_norms[-1] == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(t.coefficients, [0.6, 0.8, 0.0], atol=1e-15)


def test_mp_reselects_earlier_atom():
    Y = np.column_stack([A, B, Q20])
    t = mp_regress(Y, 2, cfg(m=3))
    assert t.selections == [0, 1, 0]
    np.testing.assert_allclose(t.residuals[0], [0.0, 0.3420], atol=1e-4)
    np.testing.assert_allclose(t.residuals[1], [-0.1481, 0.0855], atol=1e-4)
    r1 = t.residuals[1]
    assert abs(r1 @ A) == pytest.approx(0.1481, abs=1e-4)
    assert abs(r1 @ B) < 1e-4


def test_omp_stops_after_spanning():
    Y = np.column_stack([A, B, Q20])
    t = omp_regress(Y, 2, cfg(m=3, alg="OMP"))
    assert t.selections == [0, 1]
    assert t.residual_norms[-1] <= 1e-12
    np.testing.assert_allclose(Y[:, :2] @ t.coefficients[:2], Q20, atol=1e-12)


@pytest.mark.parametrize("alg", ["MP", "OMP"])
def test_exact_duplicate_stops_after_one(alg):
    Y = np.column_stack([[0.3, 0.4, 0.5], [1.0, 0.0, 0.0], [0.3, 0.4, 0.5]])
    t = regress(Y, 2, cfg(alg=alg))
    assert t.selections == [0]
    assert t.residual_norms[0] == pytest.approx(0.0, abs=1e-15)


def test_m_max_one():
    Y = np.random.default_rng(0).standard_normal((5, 8))
    for alg in ("MP", "OMP"):
        assert regress(Y, 3, cfg(m=1, alg=alg)).n_iter == 1


@pytest.mark.parametrize("alg", ["MP", "OMP"])
def test_zero_query_rejected(alg):
    Y = np.column_stack([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        regress(Y, 1, cfg(alg=alg))


def test_tie_break_lowest_index():
    Y = np.column_stack([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert mp_regress(Y, 2, cfg(m=1)).selections == [0]
    assert omp_regress(Y, 2, cfg(m=1, alg="OMP")).selections == [0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(4, 15))
def test_residual_invariants(seed, n, N):
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((n, N))
    for alg in ("MP", "OMP"):
        t = regress(Y, 0, cfg(m=6, alg=alg))
        norms = [np.linalg.norm(Y[:, 0])] + t.residual_norms
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
        assert 0 not in t.selections
        assert t.n_iter <= 6
        for m, r in enumerate(t.residuals):
            if alg == "OMP":
                assert np.abs(Y[:, t.selections[: m + 1]].T @ r).max() <= 1e-9
            else:
                assert abs(Y[:, t.selections[m]] @ r) <= 1e-9
        if alg == "OMP":
            assert len(set(t.selections)) == len(t.selections)
            # residual equals y minus its fit on the support
            np.testing.assert_allclose(Y[:, 0] - Y @ t.coefficients, t.residuals[-1], atol=1e-9)
        else:
            np.testing.assert_allclose(Y[:, 0] - Y @ t.coefficients, t.residuals[-1], atol=1e-9)


def test_mp_equals_omp_on_orthogonal_atoms():
    Qm, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((6, 6)))
    y = Qm @ np.array([0.5, -0.3, 0.2, 0.1, 0.05, 0.0])
    Y = np.column_stack([Qm, y])
    a = mp_regress(Y, 6, cfg(m=5))
    b = omp_regress(Y, 6, cfg(m=5, alg="OMP"))
    assert a.selections == b.selections
    np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-12)


def test_determinism_and_coefficient_matrix():
    ds, _ = generate(SynthSpec(n=24, d=3, L=3, N_l=8, rho=0.3, epsilon=0.05))
    for alg in ("MP", "OMP"):
        c = cfg(m=3, alg=alg)
        t1 = regress_all(ds.points, c)
        t2 = regress_all(ds.points, c)
        assert [t.selections for t in t1] == [t.selections for t in t2]
        C = coefficient_matrix(t1)
        assert C.shape == (24, 24)
        assert np.all(np.diag(C) == 0.0)


def test_noisy_inputs_not_renormalized():
    Y = np.column_stack([[2.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    t = mp_regress(Y, 2, cfg(m=1))
    # coefficient divides by the squared column norm
    assert t.coefficients[0] == pytest.approx(0.5)


def test_stopping_threshold():
    Y = np.column_stack([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1e-7, 0.0]])
    t = mp_regress(Y, 2, GreedyConfig(m_max=5, tau_abs=1e-6, keep_residuals=True))
    assert t.n_iter == 1
