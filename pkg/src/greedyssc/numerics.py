"""Dense linear-algebra, polynomial root and random-sampling primitives.

Points and basis vectors are stored as matrix *columns* throughout the
package. Every routine here is a pure function of its inputs.
"""

import numpy as np

RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10
LEADING_COEF_TOL = 1e-12
ROOT_IMAG_TOL = 1e-6
ROOT_RESIDUAL_TOL = 1e-8


def orthonormalize(cols, tol=RANK_TOL):
    """Orthonormal basis for the span of ``cols``.

    Columns whose residual after projection onto the previously kept
    columns falls below ``tol`` times the largest column norm are dropped.

    Parameters
    ----------
    cols : array-like, shape (n, k)
    tol : float
        Relative rank tolerance.

    Returns
    -------
    Q : ndarray, shape (n, r)
        Orthonormal columns, ``r <= k``.
    """
    A = np.asarray(cols, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    norms = np.linalg.norm(A, axis=0)
    scale = norms.max() if norms.size else 0.0
    if scale == 0.0:
        raise ValueError("degenerate span")
    kept = []
    for k in range(A.shape[1]):
        v = A[:, k].copy()
        # two passes of classical Gram-Schmidt keep orthogonality at 1e-15
        for _ in range(2):
            for q in kept:
                v -= (q @ v) * q
        nv = np.linalg.norm(v)
        if nv > tol * scale:
            kept.append(v / nv)
    return np.column_stack(kept)


def project(basis, v):
    """Split ``v`` into its component in ``span(basis)`` and the remainder."""
    basis = np.asarray(basis, dtype=float)
    v = np.asarray(v, dtype=float)
    v_par = basis @ (basis.T @ v)
    return v_par, v - v_par


def least_squares(A, b):
    """Minimum-norm minimizer of ``||A c - b||``."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.shape[1] < 1:
        raise ValueError("least_squares needs at least one column")
    coef, *_ = np.linalg.lstsq(A, np.asarray(b, dtype=float), rcond=None)
    return coef


def sym_eig(S, tol=SYMMETRY_TOL):
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending.

    Returns
    -------
    w : ndarray, shape (k,)
    V : ndarray, shape (k, k)
        Orthonormal eigenvectors as columns.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("sym_eig expects a square matrix")
    scale = max(1.0, np.abs(S).max(initial=0.0))
    if np.abs(S - S.T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(0.5 * (S + S.T))


def _polish(coefs, x, steps=3):
    # Newton steps on the real polynomial; stop if the step stops helping
    p = np.poly1d(coefs)
    dp = p.deriv()
    best, best_val = x, abs(p(x))
    for _ in range(steps):
        d = dp(best)
        if d == 0.0:
            break
        cand = best - p(best) / d
        val = abs(p(cand))
        if val >= best_val:
            break
        best, best_val = cand, val
    return best


def quartic_real_roots(c4, c3, c2, c1, c0):
    """Real roots of ``c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0``.

    Roots come from companion-matrix eigenvalues (``numpy.roots``), are
    kept when their imaginary part is negligible, then polished by Newton
    steps. Tiny leading coefficients reduce the degree.

    Returns
    -------
    roots : ndarray
        Sorted real roots, repeated according to multiplicity.
    """
    coefs = np.array([c4, c3, c2, c1, c0], dtype=float)
    scale = np.abs(coefs).max()
    if scale == 0.0:
        raise ValueError("identically zero polynomial")
    lead = np.flatnonzero(np.abs(coefs) >= LEADING_COEF_TOL * scale)[0]
    coefs = coefs[lead:]
    if coefs.size == 1:
        return np.empty(0)
    roots = np.roots(coefs)
    out = []
    for z in roots:
        if abs(z.imag) <= ROOT_IMAG_TOL * (1.0 + abs(z)):
            out.append(_polish(coefs, z.real))
    return np.sort(np.asarray(out, dtype=float))


def rng_stream(master_seed, *indices):
    """Independent, reproducible generator keyed by ``(master_seed, *indices)``.

    Streams with different index tuples are statistically independent and
    do not depend on the order in which they are created.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return np.random.default_rng(ss)


def sample_unit_sphere(rng, n, size=None):
    """Uniform sample(s) from the unit sphere in R^n.

    With ``size=None`` a vector of length ``n`` is returned, otherwise an
    array of shape ``(n, size)`` whose columns are samples.
    """
    shape = (n,) if size is None else (n, size)
    g = rng.standard_normal(shape)
    return g / np.linalg.norm(g, axis=0)


def sample_ball(rng, n, eps, size=None):
    """Uniform sample(s) from the closed Euclidean ball of radius ``eps``."""
    direction = sample_unit_sphere(rng, n, size)
    u = rng.random() if size is None else rng.random(size)
    return direction * (eps * u ** (1.0 / n))
