"""Tail data pipeline: rank normalization to exponential margins,
threshold-exceedance selection and empirical variogram estimation."""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .variogram import as_variogram  # noqa: F401  (shared validation entry)


@dataclass(frozen=True)
class ExceedanceSet:
    threshold: float
    observations: np.ndarray  # n x d shifted rows, max coordinate > 0
    index_sets: list  # per root k: row indices with observations[i, k] > 0

    @property
    def dim(self):
        return self.observations.shape[1]

    @property
    def count(self):
        return self.observations.shape[0]


@dataclass(frozen=True)
class EmpiricalVariogram:
    gbar: np.ndarray
    per_root: list
    counts: list
    degenerate_roots: list
    zero_entries: list  # off-diagonal (i, j) pairs with gbar == 0


def normalize_margins(raw, plus_one=True):
    """Rank-transform each column to the standard exponential scale.

    F_hat(x) = rank(x) / (m + 1) with average ranks for ties; the +1
    denominator keeps the sample maximum finite.  plus_one=False switches
    to the plain /m empirical CDF (then the column maximum maps to +inf,
    rejected here).
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need an m x d matrix with m >= 2")
    if np.any(np.isnan(x)):
        raise ValueError("raw data must not contain NaN")
    m = x.shape[0]
    out = np.empty_like(x)
    denom = m + 1 if plus_one else m
    for j in range(x.shape[1]):
        col = x[:, j]
        if np.unique(col).size < 2:
            raise ValueError(f"degenerate margin in column {j}")
        f = rankdata(col, method="average") / denom
        if np.any(f >= 1.0):
            raise ValueError("empirical CDF reached 1; use plus_one=True")
        out[:, j] = -np.log1p(-f)
    return out


def select_exceedances(x, quantile):
    """Exceedances over the p-quantile of the exponential scale.

    Keeps rows whose max coordinate exceeds u = -log(1 - p), shifted down
    by u, and records the per-root positive index sets.
    """
    if not 0.0 < quantile < 1.0:
        raise ValueError("quantile must lie in (0, 1)")
    return select_exceedances_at(x, -np.log1p(-quantile))


def select_exceedances_at(x, u):
    """Exceedances over an absolute threshold u on the exponential scale."""
    x = np.asarray(x, dtype=float)
    keep = x.max(axis=1) > u
    if not np.any(keep):
        raise ValueError("threshold too high")
    y = x[keep] - u
    return exceedances_from_samples(y, threshold=u)


def exceedances_from_samples(y, threshold=0.0):
    """Wrap already-shifted samples (max coordinate > 0) as an
    ExceedanceSet; used when data come straight from a Pareto simulator."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("expected an n x d matrix")
    if np.any(y.max(axis=1) <= 0.0):
        raise ValueError("every row must have a positive max coordinate")
    index_sets = [np.nonzero(y[:, k] > 0.0)[0] for k in range(y.shape[1])]
    return ExceedanceSet(threshold=float(threshold), observations=y, index_sets=index_sets)


def variogram_rooted(e, k):
    """Rooted empirical variogram at root k.

    Centers the rows of the root-k subsample at their k-th coordinate,
    takes the 1/|I_k|-normalized covariance and maps it to a variogram;
    with fewer than two usable rows the contribution is the zero matrix.
    """
    d = e.dim
    idx = e.index_sets[k]
    if idx.size < 2:
        return np.zeros((d, d))
    w = e.observations[idx] - e.observations[idx, k][:, None]
    wbar = w.mean(axis=0)
    centered = w - wbar
    omega = centered.T @ centered / idx.size
    dg = np.diag(omega)
    g = dg[:, None] + dg[None, :] - 2.0 * omega
    np.fill_diagonal(g, 0.0)
    return 0.5 * (g + g.T)


def variogram_combined(e):
    """Average of the rooted variograms over all roots (degenerate roots
    contribute zero matrices); zero off-diagonal entries are flagged as
    existence hazards for the downstream fit."""
    d = e.dim
    per_root = [variogram_rooted(e, k) for k in range(d)]
    counts = [int(e.index_sets[k].size) for k in range(d)]
    gbar = sum(per_root) / d
    degenerate = [k for k in range(d) if counts[k] < 2]
    iu = np.triu_indices(d, 1)
    zeros = [
        (int(i), int(j)) for i, j in zip(*iu) if gbar[i, j] == 0.0
    ]
    return EmpiricalVariogram(
        gbar=gbar,
        per_root=per_root,
        counts=counts,
        degenerate_roots=degenerate,
        zero_entries=zeros,
    )
