"""Dense symmetric linear algebra primitives.

All functions operate on square numpy arrays that represent symmetric
matrices.  Inputs are validated once at entry: finite entries, symmetry up
to round-off.  Everything here is a pure function, so results may be shared
freely between threads.
"""

import numpy as np
from scipy.linalg import cho_factor, cholesky, LinAlgError

DEFAULT_RANK_TOL = 1e-10


class NotPositiveDefiniteError(ValueError):
    """Raised when a factorization requires a positive definite matrix."""


def as_symmetric(m, *, atol_rel=1e-12):
    """Validate and symmetrize a square matrix.

    Rejects NaN/Inf and gross asymmetry; returns 0.5 * (m + m.T) so that
    downstream eigensolvers see an exactly symmetric array.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > atol_rel * scale * 1e3:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def sym_eig(m):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted in
    descending order and eigenvectors as orthonormal columns, so that
    V @ diag(w) @ V.T reconstructs the input.
    """
    a = as_symmetric(m)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"symmetric eigensolver did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def pseudo_inverse(m, rank_tol=DEFAULT_RANK_TOL):
    """Moore-Penrose pseudo-inverse via eigendecomposition.

    Eigenvalues with |w| <= rank_tol * max|w| are treated as exact zeros.
    Raises on the all-zero matrix.
    """
    w, v = sym_eig(m)
    wmax = np.abs(w).max()
    if wmax == 0.0:
        raise ValueError("rank zero")
    nz = np.abs(w) > rank_tol * wmax
    inv_w = np.zeros_like(w)
    inv_w[nz] = 1.0 / w[nz]
    out = (v * inv_w) @ v.T
    return 0.5 * (out + out.T)


def logdet_pd(m):
    """log det of a positive definite matrix via Cholesky.

    Fails loudly (NotPositiveDefiniteError) on non-PD input; callers use
    that as the signal that a variogram candidate is invalid.
    """
    a = as_symmetric(m)
    try:
        c, _ = cho_factor(a, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc
    return 2.0 * np.sum(np.log(np.diag(c)))


def chol_lower(m):
    """Lower Cholesky factor of a positive definite matrix."""
    a = as_symmetric(m)
    try:
        return cholesky(a, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix not positive definite") from exc


def is_positive_definite(m):
    try:
        logdet_pd(m)
    except NotPositiveDefiniteError:
        return False
    return True
