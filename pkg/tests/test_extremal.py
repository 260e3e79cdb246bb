import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedyssc.extremal import (
    extremal_perturbations,
    f_eval,
    f_extremes,
    grid_extremes,
    make_pair,
    mc_validate,
    noisy_inner_bounds,
    pairwise_objective,
    stationarity_residual,
)


def test_f_eval_zero_noise():
    assert np.all(f_eval(0.7, 0.0, np.linspace(0, 6, 50)) == 0.0)


def test_f_eval_closed_form():
    assert f_eval(np.pi / 3, 0.2, 0.0) == pytest.approx(0.4 * np.cos(np.pi / 6) + 0.04, abs=1e-15)
    assert f_eval(np.pi / 3, 0.2, 0.0) == pytest.approx(0.386410, abs=1e-6)


def test_f_extremes_zero_noise():
    r = f_extremes(0.4, 0.0)
    assert r.f_max == 0.0 and r.f_min == 0.0


def test_f_extremes_matches_grid_oracle():
    r = f_extremes(0.8, 0.4)
    tmax, fmax, tmin, fmin = grid_extremes(0.8, 0.4)
    assert abs(r.f_max - fmax) <= 1e-8
    assert abs(r.f_min - fmin) <= 1e-8
    assert np.abs(stationarity_residual(0.8, 0.4, r.stationary)).max() <= 1e-8


@pytest.mark.parametrize("method", ["quartic", "bracketed-1d"])
def test_solver_paths_agree(method):
    for phi in (0.1, 0.7, 1.2):
        for eps in (0.05, 0.5, 0.95):
            a = f_extremes(phi, eps, method=method)
            b = f_extremes(phi, eps, method="bracketed-1d")
            assert a.f_max == pytest.approx(b.f_max, abs=1e-10)
            assert a.f_min == pytest.approx(b.f_min, abs=1e-10)


def test_near_right_angle_uses_bracketing():
    r = f_extremes(np.pi / 2, 0.3)
    assert r.method == "bracketed-1d"
    _, fmax, _, fmin = grid_extremes(np.pi / 2, 0.3, n_grid=200_000)
    assert r.f_max == pytest.approx(fmax, abs=1e-8)


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        f_extremes(0.5, -0.1)


def test_noisy_inner_bounds_zero_noise():
    c = np.cos(0.9)
    assert noisy_inner_bounds(c, 0.0) == (c, c)


@pytest.mark.parametrize("c", [0.0, 1.0, -0.3, 1.2])
def test_noisy_inner_bounds_hypothesis(c):
    with pytest.raises(ValueError, match="lemma hypothesis violated"):
        noisy_inner_bounds(c, 0.1)


def test_noisy_inner_bounds_two_dimensional_oracle():
    phi, eps = 0.9, 0.3
    c = np.cos(phi)
    up, lo = noisy_inner_bounds(c, eps)
    g = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    obj = pairwise_objective(phi, eps, g[:, None], g[None, :])
    i, j = np.unravel_index(np.argmax(obj), obj.shape)
    from scipy.optimize import minimize
    best = minimize(lambda t: -pairwise_objective(phi, eps, t[0], t[1]), [g[i], g[j]], method="Nelder-Mead",
                    options={"xatol": 1e-12, "fatol": 1e-14}).fun
    assert abs(up - max(-best, obj.max())) <= 1e-6
    i, j = np.unravel_index(np.argmin(obj), obj.shape)
    worst = minimize(lambda t: pairwise_objective(phi, eps, t[0], t[1]), [g[i], g[j]], method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14}).fun
    assert abs(lo - min(worst, obj.min())) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0))
def test_upper_dominates_aligned_perturbation(c, eps):
    up, lo = noisy_inner_bounds(c, eps)
    at_zero = c + f_eval(np.arccos(c), eps, 0.0)
    assert up >= at_zero - 1e-12
    assert lo <= c + 1e-12 <= up + 2e-12


def test_bounds_monotone_in_eps():
    for c in (0.1, 0.5, 0.9):
        prev = None
        for eps in np.linspace(0.0, 1.0, 21):
            up, lo = noisy_inner_bounds(c, eps)
            if prev is not None:
                assert up >= prev[0] - 1e-12
                assert lo <= prev[1] + 1e-12
            prev = (up, lo)


def test_pairwise_objective_cases():
    phi, eps = 0.7, 0.25
    for th in (0.0, 1.1, 4.0):
        assert pairwise_objective(phi, eps, th, th) == pytest.approx(np.cos(phi) + f_eval(phi, eps, th))
    assert pairwise_objective(phi, 0.0, 0.3, 2.0) == pytest.approx(np.cos(phi))
    assert pairwise_objective(phi, eps, 0.0, 0.0) == pytest.approx(
        np.cos(phi) + 2 * eps * np.cos(phi / 2) + eps**2)


def test_pairwise_objective_matches_vectors():
    phi, eps, n = 0.8, 0.3, 4
    x1, x2 = make_pair(phi, n)
    ti, tj = 0.4, 2.2
    e1 = eps * np.array([np.cos(ti), np.sin(ti), 0, 0])
    e2 = eps * np.array([np.cos(tj), -np.sin(tj), 0, 0])
    assert (x1 + e1) @ (x2 + e2) == pytest.approx(pairwise_objective(phi, eps, ti, tj), abs=1e-14)


def test_make_pair():
    x1, x2 = make_pair(np.pi / 3, 5)
    assert x1 @ x2 == pytest.approx(0.5)
    assert np.linalg.norm(x1) == pytest.approx(1.0) and np.linalg.norm(x2) == pytest.approx(1.0)
    a, b = make_pair(1e-6, 3)
    assert a @ b == pytest.approx(1.0)
    with pytest.raises(ValueError):
        make_pair(0.5, 1)


def test_symmetric_optimum_on_pair_grid():
    # optimizing over both noise angles lands on theta_i == theta_j
    for phi in (0.3, 1.3):
        for eps in (0.1, 0.5):
            g = np.linspace(0, 2 * np.pi, 600, endpoint=False)
            obj = pairwise_objective(phi, eps, g[:, None], g[None, :])
            for idx in (np.argmax(obj), np.argmin(obj)):
                i, j = np.unravel_index(idx, obj.shape)
                assert min(abs(i - j), 600 - abs(i - j)) <= 1


def test_mc_validate_zero_noise():
    rep = mc_validate(0.6, 0.0, 50, master_seed=1)
    assert rep.empirical_max == pytest.approx(np.cos(0.6), abs=1e-15)
    assert rep.empirical_min == pytest.approx(np.cos(0.6), abs=1e-15)
    assert rep.violations == 0


def test_mc_validate_no_violations_small():
    rep = mc_validate(None, 0.5, 500, master_seed=2)
    assert rep.violations == 0
    assert np.all((rep.phi > 0) & (rep.phi < np.pi / 2))


def test_extremal_perturbations_attain_bound():
    for phi in (0.2, 0.9, 1.4):
        for eps in (0.2, 0.8):
            r = f_extremes(phi, eps)
            x1, x2 = make_pair(phi, 5)
            e1, e2 = extremal_perturbations(eps, r.theta_max, 5)
            assert np.linalg.norm(e1) == pytest.approx(eps)
            assert (x1 + e1) @ (x2 + e2) == pytest.approx(np.cos(phi) + r.f_max, abs=1e-9)
            e1, e2 = extremal_perturbations(eps, r.theta_min, 5)
            assert (x1 + e1) @ (x2 + e2) == pytest.approx(np.cos(phi) + r.f_min, abs=1e-9)


def test_interior_norm_never_optimal():
    # scanning noise radius as well as angle, the optimum sits on the boundary
    phi, eps = 0.7, 0.4
    radii = np.linspace(0.0, eps, 41)
    th = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    R1, T1 = np.meshgrid(radii, th, indexing="ij")
    x1, x2 = make_pair(phi, 2)
    best_max, best_min = (-np.inf, None), (np.inf, None)
    for r2 in radii:
        for t2 in th[::8]:
            e2 = r2 * np.array([np.cos(t2), -np.sin(t2)])
            y2 = x2 + e2
            vals = (x1[0] + R1 * np.cos(T1)) * y2[0] + (x1[1] + R1 * np.sin(T1)) * y2[1]
            k = np.unravel_index(np.argmax(vals), vals.shape)
            if vals[k] > best_max[0]:
                best_max = (vals[k], (R1[k], r2))
            k = np.unravel_index(np.argmin(vals), vals.shape)
            if vals[k] < best_min[0]:
                best_min = (vals[k], (R1[k], r2))
    assert best_max[1] == (eps, eps)
    assert best_min[1] == (eps, eps)
