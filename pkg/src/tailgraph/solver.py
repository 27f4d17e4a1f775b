"""Block coordinate descent for the Laplacian-constrained surrogate MLE.

The primal problem maximizes log DetTheta - <<Gbar, Q>> over Laplacians of
connected graphs; its dual maximizes the bordered log-determinant of Gamma
over all strictly conditionally negative definite Gamma with Gamma <= Gbar
entrywise.  The solver walks the dual: every sweep updates each row of
Gamma by solving a small bound-constrained QP, every iterate stays dually
feasible, and convergence is certified by the duality gap
<<Gbar, Q(Gamma)>> - (d - 1) together with the KKT conditions
Q >= 0, Gamma <= Gbar and (Gbar - Gamma) * Q = 0.
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .linalg import NotPositiveDefiniteError, chol_lower, logdet_pd, pseudo_inverse
from .qp import LowerBoundedQP, solve_lb_qp
from .variogram import (
    InvalidVariogramError,
    as_variogram,
    cayley_menger_logdet,
    centering_projector,
    gamma_to_sigma_k,
    gamma_to_theta,
    is_emtp2,
    theta_to_gamma,
    theta_to_q,
    q_to_theta,
)


@dataclass(frozen=True)
class FitConfig:
    gap_tol: float = 1e-8
    sweep_tol: float = 1e-10
    max_sweeps: int = 10000
    zero_tol: float = 1e-6
    qp_tol: float = 1e-10
    qp_max_iter: int = 100000
    gap_check_every: int = 1

    def __post_init__(self):
        for name in ("gap_tol", "sweep_tol", "zero_tol", "qp_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_sweeps < 1 or self.qp_max_iter < 1 or self.gap_check_every < 1:
            raise ValueError("iteration counts must be positive")


@dataclass(frozen=True)
class KktReport:
    min_q: float
    max_gamma_violation: float
    max_comp_slack: float
    gap: float


@dataclass
class FitResult:
    gamma_hat: np.ndarray
    theta_hat: np.ndarray
    q_hat: np.ndarray
    graph: list  # edges (i, j), 0-based, i < j
    gap_trace: list  # (sweep, duality_gap, wall_time)
    kkt: KktReport
    converged: bool
    sweeps: int
    config: FitConfig = field(repr=False, default=None)


def existence_check(gbar):
    """The constrained optimum exists iff every off-diagonal entry of the
    input variogram is strictly positive."""
    g = as_variogram(gbar)
    d = g.shape[0]
    off = g[~np.eye(d, dtype=bool)]
    return bool(off.min() > 0.0)


def _single_linkage_ultrametric(r):
    """Max-over-paths-of-min ultrametric of a similarity matrix, computed
    through a maximum spanning tree (bottleneck path values)."""
    d = r.shape[0]
    # scipy builds minimum spanning trees; negate to get the maximum one
    mst = minimum_spanning_tree(-r + (np.abs(r).max() + 1.0)).toarray()
    shift = np.abs(r).max() + 1.0
    adj = [[] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            if mst[i, j] != 0.0:
                w = shift - mst[i, j]
                adj[i].append((j, w))
                adj[j].append((i, w))
    u = np.ones((d, d))
    for src in range(d):
        # bottleneck (min edge weight) along the unique tree path
        stack = [(src, np.inf)]
        seen = {src}
        while stack:
            node, bottleneck = stack.pop()
            for nxt, w in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    b = min(bottleneck, w)
                    u[src, nxt] = b
                    stack.append((nxt, b))
    return 0.5 * (u + u.T)


def initial_point(gbar):
    """A dually feasible starting point: strictly CND and <= gbar entrywise.

    Fast path returns gbar itself when it is already strictly CND.
    Otherwise maps gbar to a second-moment matrix S, lifts the implied
    correlations to a single-linkage ultrametric (clipped at zero), and
    maps the resulting positive definite Z back to a variogram; the
    ultrametric dominates the correlations entrywise, which gives dual
    feasibility by construction.
    """
    g = as_variogram(gbar)
    if not existence_check(g):
        raise InvalidVariogramError("off-diagonal entries must be positive")
    try:
        cayley_menger_logdet(g)
        return g.copy()
    except InvalidVariogramError:
        pass
    d = g.shape[0]
    p = centering_projector(d)
    s = p @ (-0.5 * g) @ p
    sd = np.diag(s)
    if np.any(sd <= 0.0):
        raise ValueError("degenerate second-moment structure")
    scale = np.sqrt(sd)
    r = s / np.outer(scale, scale)
    np.fill_diagonal(r, 1.0)
    if np.any(np.abs(r[~np.eye(d, dtype=bool)]) >= 1.0):
        raise ValueError("degenerate second-moment structure")
    u = np.maximum(_single_linkage_ultrametric(r), 0.0)
    np.fill_diagonal(u, 1.0)
    z = u * np.outer(scale, scale)
    if np.any(z < s - 1e-12 * np.abs(s).max()):
        raise ValueError("degenerate second-moment structure")
    chol_lower(z)  # assert positive definiteness
    zd = np.diag(z)
    g0 = zd[:, None] + zd[None, :] - 2.0 * z
    np.fill_diagonal(g0, 0.0)
    g0 = np.minimum(0.5 * (g0 + g0.T), g)
    return g0


def _row_qp(gamma, gbar, i, cfg):
    """Assemble and solve the QP for row i; returns the new row values."""
    d = gamma.shape[0]
    a = -0.5 * gamma
    idx = np.delete(np.arange(d), i)
    a_sub = a[np.ix_(idx, idx)]
    try:
        b = np.linalg.inv(a_sub)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("inner block singular") from exc
    b1 = b.sum(axis=1)
    m = np.outer(b1, b1) - b1.sum() * b
    # normalize so the QP tolerance acts relative to the problem scale
    scale = max(np.abs(m).max(), np.abs(b1).max(), 1.0)
    problem = LowerBoundedQP(m / scale, b1 / scale, -0.5 * gbar[idx, i])
    warm = a[idx, i]
    sol = solve_lb_qp(problem, tol=cfg.qp_tol, max_iter=cfg.qp_max_iter, y0=warm)
    y = sol.y
    # guard: never accept an iterate worse than the current (feasible) row
    if problem.objective(y) > problem.objective(warm):
        y = warm
    return -2.0 * y, idx


def row_update(gamma, gbar, i, cfg=None):
    """One block update of row/column i of gamma; returns a new matrix.

    The input must be dually feasible (strictly CND and <= gbar); the
    output is dually feasible as well and the dual objective does not
    decrease.
    """
    cfg = cfg or FitConfig()
    g = as_variogram(gamma)
    gb = as_variogram(gbar)
    if g.shape != gb.shape:
        raise ValueError("gamma and gbar must share dimension")
    if not 0 <= i < g.shape[0]:
        raise IndexError("row index out of range")
    row, idx = _row_qp(g, gb, i, cfg)
    out = g.copy()
    out[i, idx] = row
    out[idx, i] = row
    return out


def _gap_and_min_q(gamma, gbar):
    d = gamma.shape[0]
    q = theta_to_q(gamma_to_theta(gamma))
    iu = np.triu_indices(d, 1)
    gap = float(np.sum(gbar[iu] * q[iu]) - (d - 1))
    return gap, float(q[iu].min()), float(q[iu].max())


def duality_gap(gamma, gbar):
    """<<gbar, Q(gamma)>> - (d - 1); nonnegative on the dual-feasible set,
    zero exactly at the optimum."""
    g = as_variogram(gamma)
    gb = as_variogram(gbar)
    return _gap_and_min_q(g, gb)[0]


def kkt_report(ghat, gbar, zero_tol=1e-6):
    """Evaluate the three optimality conditions at a candidate solution."""
    g = as_variogram(ghat)
    gb = as_variogram(gbar)
    d = g.shape[0]
    q = theta_to_q(gamma_to_theta(g))
    iu = np.triu_indices(d, 1)
    gap = float(np.sum(gb[iu] * q[iu]) - (d - 1))
    return KktReport(
        min_q=float(q[iu].min()),
        max_gamma_violation=float((g[iu] - gb[iu]).max()),
        max_comp_slack=float(np.abs((gb[iu] - g[iu]) * q[iu]).max()),
        gap=gap,
    )


def extract_graph(theta, zero_tol=1e-6):
    """Edges where the edge weight exceeds zero_tol times the largest one."""
    q = theta_to_q(theta)
    d = q.shape[0]
    iu = np.triu_indices(d, 1)
    qmax = q[iu].max(initial=0.0)
    if qmax <= 0.0:
        return []
    thr = zero_tol * qmax
    return [(int(i), int(j)) for i, j in zip(*iu) if q[i, j] > thr]


def _edges_connected(edges, d):
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    root = find(0)
    return all(find(v) == root for v in range(d))


def fit(gbar, cfg=None):
    """Run the block coordinate descent to the duality-gap tolerance.

    Cycles the rows in order, tracking the gap every cfg.gap_check_every
    sweeps (and always when the per-sweep change falls below sweep_tol).
    Returns a FitResult with the estimated variogram, precision, graph,
    gap trace and KKT report; converged=False when max_sweeps runs out.
    """
    cfg = cfg or FitConfig()
    gb = as_variogram(gbar)
    if not existence_check(gb):
        raise InvalidVariogramError("off-diagonal entries must be positive")
    d = gb.shape[0]
    t0 = time.perf_counter()
    gap_trace = []

    if d == 2:
        # the dual objective log(gamma_12) is increasing, so the optimum
        # sits at the bound
        gamma = gb.copy()
        gap_trace.append((0, 0.0, time.perf_counter() - t0))
        return _finalize(gamma, gb, cfg, gap_trace, True, 0, t0)

    gamma = initial_point(gb)
    gap, min_q, max_q = _gap_and_min_q(gamma, gb)
    gap_trace.append((0, gap, time.perf_counter() - t0))
    # the gap pairs the bound with Q(gamma), so it certifies optimality
    # only when Q(gamma) is itself (nearly) nonnegative
    if gap <= cfg.gap_tol and min_q >= -10.0 * cfg.gap_tol * max(max_q, 1e-300):
        return _finalize(gamma, gb, cfg, gap_trace, True, 0, t0)

    converged = False
    sweeps = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        sweeps = sweep
        change = 0.0
        for i in range(d):
            row, idx = _row_qp(gamma, gb, i, cfg)
            change = max(change, np.abs(gamma[i, idx] - row).max())
            gamma[i, idx] = row
            gamma[idx, i] = row
        stalled = change < cfg.sweep_tol
        if sweep % cfg.gap_check_every == 0 or stalled or sweep == cfg.max_sweeps:
            gap, min_q, max_q = _gap_and_min_q(gamma, gb)
            gap_trace.append((sweep, gap, time.perf_counter() - t0))
            if gap <= cfg.gap_tol and min_q >= -10.0 * cfg.gap_tol * max(
                max_q, 1e-300
            ):
                converged = True
                break
            if stalled:
                # no further progress is possible at the QP tolerance
                break
    return _finalize(gamma, gb, cfg, gap_trace, converged, sweeps, t0)


def _finalize(gamma, gbar, cfg, gap_trace, converged, sweeps, t0):
    theta = gamma_to_theta(gamma)
    q = theta_to_q(theta)
    graph = extract_graph(theta, cfg.zero_tol)
    report = kkt_report(gamma, gbar, cfg.zero_tol)
    return FitResult(
        gamma_hat=gamma,
        theta_hat=theta,
        q_hat=q,
        graph=graph,
        gap_trace=gap_trace,
        kkt=report,
        converged=converged,
        sweeps=sweeps,
        config=cfg,
    )


def _loglik_terms(q_vec, edges, gbar, d):
    """Pseudo log-likelihood pieces for edge weights on a fixed graph."""
    q = np.zeros((d, d))
    for w, (i, j) in zip(q_vec, edges):
        q[i, j] = w
        q[j, i] = w
    theta = q_to_theta(q)
    sub = theta[1:, 1:]
    try:
        ld = logdet_pd(sub)
    except NotPositiveDefiniteError:
        return None
    return ld, q, theta


def fit_on_graph(gbar, edges, cfg=None):
    """Surrogate MLE constrained to a fixed connected edge set.

    Maximizes log det Theta^(1)(Q) - <<gbar, Q>> over the edge weights
    (sign-unrestricted) by a damped Newton iteration; at the optimum the
    implied variogram matches gbar exactly on every edge.
    """
    cfg = cfg or FitConfig()
    gb = as_variogram(gbar)
    d = gb.shape[0]
    if not existence_check(gb):
        raise InvalidVariogramError("off-diagonal entries must be positive")
    edges = [(min(i, j), max(i, j)) for i, j in edges]
    if len(set(edges)) != len(edges):
        raise ValueError("duplicate edges")
    if not _edges_connected(edges, d):
        raise ValueError("graph must be connected")

    t0 = time.perf_counter()
    n_e = len(edges)
    q_vec = np.array([1.0 / gb[i, j] for i, j in edges])
    tol = cfg.gap_tol
    gap_trace = []
    converged = False
    sweeps = 0
    for it in range(1, 200 + 1):
        sweeps = it
        terms = _loglik_terms(q_vec, edges, gb, d)
        if terms is None:
            raise RuntimeError("iterate left the feasible cone")
        _, q, theta = terms
        sigma = pseudo_inverse(theta)
        sdiag = np.diag(sigma)
        gamma = sdiag[:, None] + sdiag[None, :] - 2.0 * sigma
        grad = np.array([gamma[i, j] - gb[i, j] for i, j in edges])
        err = np.abs(grad).max()
        gap_trace.append((it, err, time.perf_counter() - t0))
        if err <= tol:
            converged = True
            break
        # Hessian of the log pseudo-determinant: H_ef = (v_e' Sigma v_f)^2
        vs = np.zeros((n_e, d))
        for a, (i, j) in enumerate(edges):
            vs[a, i] = 1.0
            vs[a, j] = -1.0
        cross = vs @ sigma @ vs.T
        hess = cross**2
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(n_e), grad)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(hess, grad, rcond=None)
        # backtracking line search on the concave objective
        iu = np.triu_indices(d, 1)
        def objective(qv):
            terms2 = _loglik_terms(qv, edges, gb, d)
            if terms2 is None:
                return -np.inf
            ld2, q2, _ = terms2
            return ld2 - float(np.sum(gb[iu] * q2[iu]))
        base = objective(q_vec)
        t = 1.0
        while t > 1e-12:
            cand = q_vec + t * step
            if objective(cand) > base - 1e-14:
                q_vec = cand
                break
            t *= 0.5
        else:
            break
    terms = _loglik_terms(q_vec, edges, gb, d)
    _, q, theta = terms
    gamma = theta_to_gamma(theta)
    graph = extract_graph(theta, cfg.zero_tol)
    report = kkt_report(gamma, gb, cfg.zero_tol)
    return FitResult(
        gamma_hat=gamma,
        theta_hat=theta,
        q_hat=q,
        graph=graph,
        gap_trace=gap_trace,
        kkt=report,
        converged=converged,
        sweeps=sweeps,
        config=cfg,
    )
