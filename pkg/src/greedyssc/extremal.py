"""Extremes of the noisy inner product of two unit vectors.

For unit vectors at angle ``phi`` perturbed by noise of norm at most
``eps``, the extreme inner products are ``cos(phi)`` plus the max/min over
``theta`` of::

    f(theta) = 2 eps cos(phi/2 + theta) + eps^2 cos(2 theta)

The stationarity condition ``sin(phi/2 + theta) + eps sin(2 theta) = 0``
reduces, with ``x = tan(theta/2 - phi/4)``, to the quartic::

    E t x^4 + (1 - 3E) x^3 + 3 t (1 - E) x^2 + (E - 3) x - t = 0

where ``t = tan(phi)`` and ``E = (1 - eps) / (1 + eps)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .numerics import quartic_real_roots, rng_stream, sample_ball

TWO_PI = 2.0 * np.pi
STATIONARY_TOL = 1e-8
BOUND_SLACK = 1e-9
TAN_BLOWUP = 0.05
N_BRACKETS = 4096
_GUARD_GRID = np.linspace(0.0, TWO_PI, 97)[:-1]


@dataclass
class ExtremalResult:
    theta_max: float
    f_max: float
    theta_min: float
    f_min: float
    method: str
    stationary: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class McReport:
    trials: int
    violations: int
    empirical_max: float
    empirical_min: float
    bound_max: float
    bound_min: float
    phi: np.ndarray = field(repr=False, default=None)
    samples: np.ndarray = field(repr=False, default=None)
    upper: np.ndarray = field(repr=False, default=None)
    lower: np.ndarray = field(repr=False, default=None)


def f_eval(phi, eps, theta):
    """Perturbation term of the noisy inner product (vectorized in theta)."""
    theta = np.asarray(theta, dtype=float)
    return 2.0 * eps * np.cos(0.5 * phi + theta) + eps**2 * np.cos(2.0 * theta)


def stationarity_residual(phi, eps, theta):
    """``sin(phi/2 + theta) + eps sin(2 theta)``; zero at stationary points."""
    theta = np.asarray(theta, dtype=float)
    return np.sin(0.5 * phi + theta) + eps * np.sin(2.0 * theta)


def _newton_theta(phi, eps, theta, steps=4):
    for _ in range(steps):
        h = np.sin(0.5 * phi + theta) + eps * np.sin(2.0 * theta)
        dh = np.cos(0.5 * phi + theta) + 2.0 * eps * np.cos(2.0 * theta)
        if dh == 0.0:
            break
        theta = theta - h / dh
    return theta % TWO_PI


def quartic_coefficients(phi, eps):
    """Coefficients (degree 4 first) of the stationarity quartic."""
    t = np.tan(phi)
    E = (1.0 - eps) / (1.0 + eps)
    return E * t, 1.0 - 3.0 * E, 3.0 * t * (1.0 - E), E - 3.0, -t


def _dedupe(thetas, tol=1e-9):
    out = []
    for th in sorted(thetas):
        if not out or abs(th - out[-1]) > tol:
            out.append(th)
    if len(out) > 1 and TWO_PI - out[-1] + out[0] <= tol:
        out.pop()
    return np.asarray(out)


def _stationary_quartic(phi, eps):
    roots = quartic_real_roots(*quartic_coefficients(phi, eps))
    cands = []
    for x in roots:
        a2 = np.arctan(x)
        # tan fixes A2 only mod pi; both branches give the same theta mod 2 pi
        for branch in (a2, a2 + np.pi):
            th = _newton_theta(phi, eps, (2.0 * branch + 0.5 * phi) % TWO_PI)
            if abs(stationarity_residual(phi, eps, th)) <= STATIONARY_TOL:
                cands.append(th)
    return _dedupe(cands)


def _stationary_bracketed(phi, eps, n_brackets=N_BRACKETS):
    grid = np.linspace(0.0, TWO_PI, n_brackets + 1)
    h = stationarity_residual(phi, eps, grid)
    cands = list(grid[:-1][h[:-1] == 0.0])
    for k in np.flatnonzero(h[:-1] * h[1:] < 0.0):
        root = optimize.brentq(
            lambda th: np.sin(0.5 * phi + th) + eps * np.sin(2.0 * th),
            grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps,
        )
        cands.append(root % TWO_PI)
    return _dedupe(cands)


def _select(phi, eps, thetas, method):
    vals = f_eval(phi, eps, thetas)
    imax, imin = int(np.argmax(vals)), int(np.argmin(vals))
    return ExtremalResult(
        theta_max=float(thetas[imax]), f_max=float(vals[imax]),
        theta_min=float(thetas[imin]), f_min=float(vals[imin]),
        method=method, stationary=thetas,
    )


def f_extremes(phi, eps, method="auto"):
    """Maximum and minimum of ``f`` over ``theta``.

    Parameters
    ----------
    phi : float
        Angle between the noiseless vectors, in ``(0, pi/2)``; values up to
        ``pi/2`` inclusive are accepted and routed to the bracketed solver.
    eps : float
        Noise bound, ``eps >= 0``.
    method : {"auto", "quartic", "bracketed-1d"}
        ``"auto"`` uses the quartic unless ``phi`` is within 0.05 of
        ``pi/2`` or the quartic candidates look unreliable.

    Returns
    -------
    ExtremalResult
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0.0:
        return ExtremalResult(0.0, 0.0, 0.0, 0.0, "quartic" if method != "bracketed-1d" else method,
                              np.zeros(1))
    if method not in ("auto", "quartic", "bracketed-1d"):
        raise ValueError(f"unknown method {method!r}")

    use_quartic = method == "quartic" or (method == "auto" and abs(phi - 0.5 * np.pi) >= TAN_BLOWUP)
    if use_quartic:
        thetas = _stationary_quartic(phi, eps)
        if thetas.size >= 2:
            res = _select(phi, eps, thetas, "quartic")
            guard = f_eval(phi, eps, _GUARD_GRID)
            if method == "quartic" or (res.f_max >= guard.max() - 1e-12 and res.f_min <= guard.min() + 1e-12):
                return res
        elif method == "quartic":
            raise RuntimeError("quartic path produced fewer than two stationary points")
    return _select(phi, eps, _stationary_bracketed(phi, eps), "bracketed-1d")


def grid_extremes(phi, eps, n_grid=10**6):
    """Dense-grid + golden-section extremes of ``f``; an oracle independent of the quartic.

    Returns ``(theta_max, f_max, theta_min, f_min)``.
    """
    grid = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
    vals = f_eval(phi, eps, grid)
    step = TWO_PI / n_grid
    out = []
    for sign, k in ((-1.0, int(np.argmax(vals))), (1.0, int(np.argmin(vals)))):
        c = grid[k]
        res = optimize.minimize_scalar(
            lambda th: sign * f_eval(phi, eps, th),
            bracket=(c - step, c, c + step), method="golden", tol=1e-12,
        )
        th, val = res.x, -sign * res.fun
        # the grid value is already a valid extreme estimate; keep the better one
        if sign * val > sign * vals[k]:
            th, val = c, vals[k]
        out.extend([float(th % TWO_PI), float(val)])
    return tuple(out)


def noisy_inner_bounds(c, eps):
    """Largest and smallest ``(x_i + e_i)^T (x_j + e_j)`` over ``||e|| <= eps``.

    Parameters
    ----------
    c : float
        Noiseless inner product ``x_i^T x_j``, strictly inside ``(0, 1)``.
    eps : float

    Returns
    -------
    (upper, lower) : tuple of float
    """
    if not 0.0 < c < 1.0:
        raise ValueError("lemma hypothesis violated: inner product must lie in (0, 1)")
    res = f_extremes(float(np.arccos(c)), eps)
    return c + res.f_max, c + res.f_min


def pairwise_objective(phi, eps, theta_i, theta_j):
    """Noisy inner product when ``e_i`` sits at angle ``theta_i`` (counter-clockwise)
    and ``e_j`` at ``theta_j`` (clockwise), both of norm ``eps``.
    """
    theta_i = np.asarray(theta_i, dtype=float)
    theta_j = np.asarray(theta_j, dtype=float)
    return (np.cos(phi)
            + eps * (np.cos(0.5 * phi + theta_i) + np.cos(0.5 * phi + theta_j))
            + eps**2 * np.cos(theta_i + theta_j))


def make_pair(phi, n):
    """Two unit vectors in R^n at angle ``phi``, symmetric about the first axis."""
    if n < 2:
        raise ValueError("n must be at least 2")
    x1 = np.zeros(n)
    x2 = np.zeros(n)
    x1[:2] = np.cos(0.5 * phi), np.sin(0.5 * phi)
    x2[:2] = np.cos(0.5 * phi), -np.sin(0.5 * phi)
    return x1, x2


def extremal_perturbations(eps, theta, n):
    """Noise pair attaining ``f(theta)`` for the vectors of :func:`make_pair`."""
    e1 = np.zeros(n)
    e2 = np.zeros(n)
    e1[:2] = eps * np.cos(theta), eps * np.sin(theta)
    e2[:2] = eps * np.cos(theta), -eps * np.sin(theta)
    return e1, e2


def mc_validate(phi, eps, trials, master_seed, n=5):
    """Monte Carlo check of :func:`noisy_inner_bounds`.

    Each trial draws a noise pair uniformly from the ``eps``-ball. When
    ``phi`` is None every trial also draws its own angle uniformly from
    ``(0, pi/2)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phis = np.empty(trials)
    samples = np.empty(trials)
    upper = np.empty(trials)
    lower = np.empty(trials)
    cache = {}
    for t in range(trials):
        rng = rng_stream(master_seed, t)
        p = rng.uniform(0.0, 0.5 * np.pi) if phi is None else float(phi)
        while p <= 0.0:
            p = rng.uniform(0.0, 0.5 * np.pi)
        x1, x2 = make_pair(p, n)
        e1 = sample_ball(rng, n, eps)
        e2 = sample_ball(rng, n, eps)
        if p not in cache:
            res = f_extremes(p, eps)
            c = np.cos(p)
            cache[p] = (c + res.f_max, c + res.f_min)
        phis[t] = p
        samples[t] = (x1 + e1) @ (x2 + e2)
        upper[t], lower[t] = cache[p]
    bad = (samples > upper + BOUND_SLACK) | (samples < lower - BOUND_SLACK)
    return McReport(
        trials=trials, violations=int(bad.sum()),
        empirical_max=float(samples.max()), empirical_min=float(samples.min()),
        bound_max=float(upper.max()), bound_min=float(lower.min()),
        phi=phis, samples=samples, upper=upper, lower=lower,
    )
