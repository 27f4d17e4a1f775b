"""Bound-constrained quadratic subproblem.

Minimizes y' M y - 2 c' y subject to y >= lower, where M is positive
semidefinite and typically singular (the all-ones vector lies in its
kernel).  Standard strictly-convex QP routines break on this structure, so
the solver is an over-relaxed operator-splitting (ADMM) iteration with a
small diagonal regularization applied inside the linear-system step only.
An active-set polish is attempted periodically: once the splitting has
identified the active bounds, the reduced stationarity system is solved
directly, which yields residuals near machine precision.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

RELAXATION = 1.6
POLISH_EVERY = 25


@dataclass(frozen=True)
class LowerBoundedQP:
    quad: np.ndarray  # M, PSD, possibly singular
    lin: np.ndarray  # c, objective is y'My - 2c'y
    lower: np.ndarray  # per-coordinate lower bounds, -inf allowed

    def __post_init__(self):
        m = np.asarray(self.quad, dtype=float)
        c = np.asarray(self.lin, dtype=float)
        l = np.asarray(self.lower, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("quadratic term must be a square matrix")
        n = m.shape[0]
        if c.shape != (n,) or l.shape != (n,):
            raise ValueError("dimension mismatch between quad, lin and lower")
        if not np.all(np.isfinite(m)) or not np.all(np.isfinite(c)):
            raise ValueError("objective terms must be finite")
        if np.any(np.isnan(l)) or np.any(l == np.inf):
            raise ValueError("lower bounds must be finite or -inf")
        object.__setattr__(self, "quad", 0.5 * (m + m.T))
        object.__setattr__(self, "lin", c)
        object.__setattr__(self, "lower", l)

    @property
    def dim(self):
        return self.quad.shape[0]

    def objective(self, y):
        return float(y @ self.quad @ y - 2.0 * self.lin @ y)


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def max(self):
        return max(self.stationarity, self.primal, self.complementarity)


@dataclass(frozen=True)
class QPResult:
    y: np.ndarray
    objective: float
    kkt_residuals: KKTResiduals
    iterations: int


class QPNonConvergence(RuntimeError):
    """Iteration budget exhausted; carries the best iterate found."""

    def __init__(self, result):
        super().__init__(
            f"QP did not reach tolerance in {result.iterations} iterations "
            f"(residuals {result.kkt_residuals})"
        )
        self.result = result


class QPUnbounded(RuntimeError):
    pass


def _residuals(problem, y, lam):
    grad = 2.0 * problem.quad @ y - 2.0 * problem.lin
    stat = float(np.abs(grad - lam).max()) if y.size else 0.0
    gap = y - problem.lower
    primal = float(max(np.max(-np.minimum(gap, 0.0), initial=0.0), 0.0))
    finite = np.isfinite(problem.lower)
    comp = float(np.abs(lam[finite] * gap[finite]).max(initial=0.0))
    comp = max(comp, float(np.maximum(-lam, 0.0).max(initial=0.0)))
    return KKTResiduals(stat, primal, comp)


def _polish(problem, z, lam):
    """Active-set refinement seeded by the splitting iterate (z, lam).

    Starts from the bounds flagged active by the splitting, solves the
    reduced stationarity system 2(My - c) = 0 on the free set (least
    squares, since M may be singular), then repairs the guess: free
    coordinates that land below their bound are added to the active set,
    active coordinates with negative multipliers are released.
    """
    m, c, l = problem.quad, problem.lin, problem.lower
    n = problem.dim
    scale = max(np.abs(z).max(initial=0.0), 1.0)
    finite = np.isfinite(l)
    active = finite & ((z - l <= 1e-9 * scale) | (lam > 0.0))
    y = np.where(finite, l, 0.0)
    lam_p = np.zeros(n)
    gscale = max(np.abs(c).max(initial=0.0), np.abs(m).max(initial=0.0), 1.0)
    for _ in range(2 * n + 2):
        free = ~active
        y = np.where(finite, l, 0.0)
        if np.any(free):
            rhs = c[free]
            if np.any(active):
                rhs = rhs - m[np.ix_(free, active)] @ l[active]
            sol, *_ = np.linalg.lstsq(m[np.ix_(free, free)], rhs, rcond=None)
            y[free] = sol
        violated = free & finite & (y < l - 1e-12 * scale)
        if np.any(violated):
            active = active | violated
            continue
        grad = 2.0 * m @ y - 2.0 * c
        lam_p = np.where(active, grad, 0.0)
        negative = active & (lam_p < -1e-10 * gscale)
        if np.any(negative):
            active = active & ~negative
            continue
        break
    y = np.maximum(y, np.where(finite, l, -np.inf))
    return y, lam_p


def _unbounded_direction(problem):
    """A descent ray certificate: a kernel direction of M that respects
    every finite bound and has positive inner product with c (so the
    linear term drives the objective to minus infinity along it)."""
    m, c, l = problem.quad, problem.lin, problem.lower
    w, v = np.linalg.eigh(m)
    wmax = np.abs(w).max(initial=0.0)
    kernel = v[:, np.abs(w) <= 1e-10 * max(wmax, 1.0)]
    if kernel.shape[1] == 0:
        return False
    direction = kernel @ (kernel.T @ c)
    norm = np.linalg.norm(direction)
    if norm <= 1e-12 * max(np.linalg.norm(c), 1.0):
        return False
    direction = direction / norm
    finite = np.isfinite(l)
    return bool(np.all(direction[finite] >= -1e-12))


def solve_lb_qp(problem, tol=1e-10, max_iter=100000, y0=None):
    """Solve the lower-bounded QP to the given KKT tolerance.

    Returns a QPResult whose iterate satisfies the bounds exactly.  An
    optional warm start y0 (clamped to the bounds) seeds the iteration.
    Raises QPNonConvergence with the best iterate when max_iter is hit and
    QPUnbounded when the objective diverges below -1e30.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, c, l = problem.quad, problem.lin, problem.lower
    n = problem.dim
    eigmax = float(np.linalg.eigvalsh(m).max()) if n else 0.0
    spec = max(eigmax, 0.0)
    reg = 1e-9 * max(spec, 1.0)
    # penalty on the splitting consensus constraint; scaled to the curvature
    sigma = max(0.05 * spec, 1e-8)
    try:
        factor = cho_factor(2.0 * m + (sigma + reg) * np.eye(n), lower=True)
    except LinAlgError as exc:  # pragma: no cover - PSD + sigma I is PD
        raise ValueError("quadratic term is not positive semidefinite") from exc

    if _unbounded_direction(problem):
        raise QPUnbounded("subproblem unbounded")

    low = np.where(np.isfinite(l), l, -np.inf)
    z = np.maximum(y0.astype(float).copy() if y0 is not None else np.zeros(n), low)
    u = np.zeros(n)
    best = None
    for it in range(1, max_iter + 1):
        y = cho_solve(factor, 2.0 * c + sigma * (z - u))
        y_rel = RELAXATION * y + (1.0 - RELAXATION) * z
        z = np.maximum(y_rel + u, low)
        u = u + y_rel - z
        lam = -sigma * u

        if it % POLISH_EVERY == 0 or it == max_iter:
            for cand, mult in ((np.maximum(z, low), np.maximum(lam, 0.0)),
                               _polish(problem, z, lam)):
                res = _residuals(problem, cand, mult)
                if best is None or res.max() < best.kkt_residuals.max():
                    best = QPResult(cand, problem.objective(cand), res, it)
            if best.kkt_residuals.max() <= tol:
                return best
            if problem.objective(np.maximum(z, low)) < -1e30:
                raise QPUnbounded("subproblem unbounded")
    raise QPNonConvergence(best)
