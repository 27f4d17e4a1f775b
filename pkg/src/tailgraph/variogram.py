"""Parameter-space maps between variograms, rooted covariances, precision
matrices and edge weights.

A variogram is a symmetric zero-diagonal matrix Gamma; it is valid when it
is strictly conditionally negative definite (x' Gamma x < 0 for nonzero x
with x'1 = 0), which is equivalent to positive definiteness of any rooted
covariance Sigma^(k).  The precision Theta is the pseudo-inverse of
P(-Gamma/2)P with P the centering projector; its negated off-diagonal is
the edge-weight matrix Q.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import (
    NotPositiveDefiniteError,
    as_symmetric,
    logdet_pd,
    pseudo_inverse,
    sym_eig,
)

DEFAULT_ZERO_TOL = 1e-9


class InvalidVariogramError(ValueError):
    """Raised when a variogram is not strictly conditionally negative definite."""


def as_variogram(gamma, *, diag_tol=1e-12):
    """Validate a variogram candidate: symmetric, zero diagonal, d >= 2."""
    g = as_symmetric(gamma)
    d = g.shape[0]
    if d < 2:
        raise ValueError("variogram dimension must be >= 2")
    scale = max(np.abs(g).max(), 1.0)
    if np.abs(np.diag(g)).max() > diag_tol * scale:
        raise ValueError("variogram diagonal must be zero")
    np.fill_diagonal(g, 0.0)
    return g


def centering_projector(d):
    """The orthogonal projector onto the complement of the all-ones vector."""
    return np.eye(d) - np.full((d, d), 1.0 / d)


def gamma_to_sigma_k(gamma, k):
    """Rooted covariance: Sigma_ij = (Gamma_ik + Gamma_jk - Gamma_ij) / 2
    for i, j != k, with row/column k deleted (0-based k)."""
    g = as_variogram(gamma)
    d = g.shape[0]
    if not 0 <= k < d:
        raise IndexError(f"root {k} out of range for dimension {d}")
    idx = np.delete(np.arange(d), k)
    col = g[idx, k]
    sigma = 0.5 * (col[:, None] + col[None, :] - g[np.ix_(idx, idx)])
    return sigma


def sigma_k_to_gamma(sigma, k):
    """Inverse of gamma_to_sigma_k: rebuild the d x d variogram from the
    (d-1) x (d-1) rooted covariance at root k (0-based)."""
    s = as_symmetric(sigma)
    d = s.shape[0] + 1
    if not 0 <= k < d:
        raise IndexError(f"root {k} out of range for dimension {d}")
    dg = np.diag(s)
    small = dg[:, None] + dg[None, :] - 2.0 * s
    g = np.zeros((d, d))
    idx = np.delete(np.arange(d), k)
    g[np.ix_(idx, idx)] = small
    g[idx, k] = dg
    g[k, idx] = dg
    return g


def gamma_to_theta(gamma, rank_tol=1e-10):
    """Precision matrix Theta = (P (-Gamma/2) P)^+.

    Raises InvalidVariogramError when Gamma is not strictly conditionally
    negative definite (detected through a non-PD rooted covariance).
    """
    g = as_variogram(gamma)
    d = g.shape[0]
    try:
        logdet_pd(gamma_to_sigma_k(g, 0))
    except NotPositiveDefiniteError as exc:
        raise InvalidVariogramError(
            "not strictly conditionally negative definite"
        ) from exc
    p = centering_projector(d)
    sigma = p @ (-0.5 * g) @ p
    return pseudo_inverse(sigma, rank_tol)


def theta_to_gamma(theta, rank_tol=1e-8):
    """Variogram from a precision matrix: Gamma_ij = S_ii + S_jj - 2 S_ij
    with S the pseudo-inverse of Theta."""
    t = as_symmetric(theta)
    d = t.shape[0]
    w, _ = sym_eig(t)
    wmax = np.abs(w).max()
    if wmax == 0.0 or np.sum(np.abs(w) > rank_tol * wmax) != d - 1:
        raise ValueError("precision rank defect")
    s = pseudo_inverse(t)
    dg = np.diag(s)
    g = dg[:, None] + dg[None, :] - 2.0 * s
    np.fill_diagonal(g, 0.0)
    return 0.5 * (g + g.T)


def theta_to_q(theta):
    """Edge-weight matrix: zero diagonal, q_ij = -theta_ij off-diagonal."""
    t = as_symmetric(theta)
    q = -t.copy()
    np.fill_diagonal(q, 0.0)
    return q


def q_to_theta(q):
    """Laplacian with off-diagonal -q_ij and zero row sums."""
    qm = as_symmetric(q)
    t = -qm
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, -t.sum(axis=1))
    return t


def pseudo_det(theta, rank_tol=1e-8):
    """Product of the nonzero eigenvalues of a rank d-1 precision matrix."""
    t = as_symmetric(theta)
    d = t.shape[0]
    w, _ = sym_eig(t)
    wmax = np.abs(w).max()
    if wmax == 0.0:
        raise ValueError("precision rank defect")
    nz = np.abs(w) > rank_tol * wmax
    if np.count_nonzero(nz) != d - 1:
        raise ValueError("precision rank defect")
    return float(np.prod(w[nz]))


def _prufer_to_edges(seq, d):
    """Decode a Pruefer sequence into the edge list of a labeled tree."""
    degree = [1] * d
    for v in seq:
        degree[v] += 1
    edges = []
    seq = list(seq)
    leaves = sorted(i for i in range(d) if degree[i] == 1)
    for v in seq:
        leaf = leaves.pop(0)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            # keep the leaf pool sorted for a deterministic traversal
            lo, hi = 0, len(leaves)
            while lo < hi:
                mid = (lo + hi) // 2
                if leaves[mid] < v:
                    lo = mid + 1
                else:
                    hi = mid
            leaves.insert(lo, v)
    edges.append((leaves[0], leaves[1]))
    return edges


def spanning_tree_sum(q):
    """Brute-force sum over all labeled spanning trees of prod of edge
    weights, via Pruefer enumeration.  Restricted to d <= 8."""
    qm = as_symmetric(q)
    d = qm.shape[0]
    if d > 8:
        raise ValueError("oracle restricted to small d")
    if d == 1:
        return 1.0
    total = 0.0
    for seq in product(range(d), repeat=d - 2):
        prod_w = 1.0
        for i, j in _prufer_to_edges(seq, d):
            prod_w *= qm[i, j]
            if prod_w == 0.0:
                break
        total += prod_w
    return float(total)


def bordered_matrix(gamma):
    """The (d+1) x (d+1) bordered matrix [[0, -1'], [1, -Gamma/2]]."""
    g = as_variogram(gamma)
    d = g.shape[0]
    b = np.zeros((d + 1, d + 1))
    b[0, 1:] = -1.0
    b[1:, 0] = 1.0
    b[1:, 1:] = -0.5 * g
    return b


def cayley_menger_logdet(gamma):
    """log det of the bordered matrix [[0, -1'], [1, -Gamma/2]].

    Equals log det Sigma^(k) for every root k, hence finite exactly on
    valid variograms; computed through a Cholesky factorization of
    Sigma^(1) so that invalid input fails loudly.
    """
    g = as_variogram(gamma)
    try:
        return float(logdet_pd(gamma_to_sigma_k(g, 0)))
    except NotPositiveDefiniteError as exc:
        raise InvalidVariogramError(
            "not strictly conditionally negative definite"
        ) from exc


@dataclass(frozen=True)
class VariogramReport:
    strictly_cnd: bool
    positive_offdiag: bool
    is_metric: bool


def check_variogram(gamma):
    """Diagnostic report: strict CND (via PD of Sigma^(1)), positivity of
    the off-diagonal, and the triangle inequality on Gamma itself."""
    g = as_variogram(gamma)
    d = g.shape[0]
    try:
        logdet_pd(gamma_to_sigma_k(g, 0))
        strictly_cnd = True
    except NotPositiveDefiniteError:
        strictly_cnd = False
    off = g[~np.eye(d, dtype=bool)]
    positive_offdiag = bool(off.min() > 0.0) if off.size else True
    tol = 1e-12 * max(np.abs(g).max(), 1.0)
    is_metric = True
    for k in range(d):
        if np.any(g > g[:, [k]] + g[[k], :] + tol):
            is_metric = False
            break
    return VariogramReport(strictly_cnd, positive_offdiag, is_metric)


def _connected(adj):
    """Connectivity of a boolean adjacency matrix by union-find."""
    d = adj.shape[0]
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(d):
        for j in range(i + 1, d):
            if adj[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    root = find(0)
    return all(find(i) == root for i in range(d))


def is_emtp2(theta, zero_tol=DEFAULT_ZERO_TOL):
    """True iff theta_ij <= tol off-diagonal and the support graph of the
    positive edge weights is connected.  zero_tol is relative to the
    largest off-diagonal magnitude."""
    t = as_symmetric(theta)
    d = t.shape[0]
    if d == 1:
        return True
    off_mask = ~np.eye(d, dtype=bool)
    scale = np.abs(t[off_mask]).max()
    tol = zero_tol * scale if scale > 0 else zero_tol
    if np.any(t[off_mask] > tol):
        return False
    q = theta_to_q(t)
    return _connected(q > tol)


def fiedler_identity_residual(gamma):
    """Max-abs residual of the bordered-inverse identity linking a valid
    variogram and its precision matrix.

    With Theta the precision, Sigma its pseudo-inverse, xi = diag(Sigma),
    r = Theta xi / 2 + 1/d and R^2 = xi' (r + 1/d) / 2, the inverse of
    [[4R^2, -2r'], [-2r, Theta]] equals -[[0, 1'], [1, Gamma]] / 2.
    """
    g = as_variogram(gamma)
    d = g.shape[0]
    theta = gamma_to_theta(g)
    sigma = pseudo_inverse(theta)
    xi = np.diag(sigma).copy()
    ones = np.ones(d)
    r = 0.5 * theta @ xi + ones / d
    r2 = 0.5 * xi @ (r + ones / d)
    lhs = np.zeros((d + 1, d + 1))
    lhs[0, 1:] = ones
    lhs[1:, 0] = ones
    lhs[1:, 1:] = g
    lhs *= -0.5
    rhs = np.zeros((d + 1, d + 1))
    rhs[0, 0] = 4.0 * r2
    rhs[0, 1:] = -2.0 * r
    rhs[1:, 0] = -2.0 * r
    rhs[1:, 1:] = theta
    return float(np.abs(lhs - np.linalg.inv(rhs)).max())
