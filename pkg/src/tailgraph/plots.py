"""Figure rendering for the CLI report path.

Writes static matplotlib figures next to the delimited outputs: the
duality-gap trace on a log scale and the fitted graph on a circular
layout with edge width proportional to log(1 + weight).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_gap_trace(path, gap_trace):
    sweeps = [s for s, _, _ in gap_trace]
    gaps = [max(g, 1e-17) for _, g, _ in gap_trace]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(sweeps, gaps, marker="o", ms=3, lw=1.2)
    ax.set_xlabel("sweep")
    ax.set_ylabel("duality gap")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_graph(path, d, edges, q):
    angles = 2.0 * np.pi * np.arange(d) / d
    xs, ys = np.cos(angles), np.sin(angles)
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, j in edges:
        ax.plot(
            [xs[i], xs[j]],
            [ys[i], ys[j]],
            color="steelblue",
            lw=0.5 + 2.0 * np.log1p(q[i, j]),
            zorder=1,
        )
    ax.scatter(xs, ys, s=240, color="white", edgecolor="black", zorder=2)
    for v in range(d):
        ax.text(xs[v], ys[v], str(v + 1), ha="center", va="center", fontsize=8, zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bench(path, rows):
    """rows: (dim, rep, seconds, gap) tuples."""
    dims = sorted({r[0] for r in rows})
    means = [np.mean([r[2] for r in rows if r[0] == d]) for d in dims]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(dims, means, marker="o")
    ax.set_xlabel("dimension")
    ax.set_ylabel("mean fit time (s)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
