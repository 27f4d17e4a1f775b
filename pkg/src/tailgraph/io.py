"""Stable file formats for the CLI: headerless CSV matrices, graph JSON
and DOT export.  Matrices are written with 17 significant digits so that a
write/read round trip is exact."""

import json

import numpy as np


class MatrixParseError(ValueError):
    pass


def write_matrix(path, m):
    m = np.asarray(m, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(m):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix(path):
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rows.append([float(v) for v in line.split(",")])
    except (OSError, ValueError) as exc:
        raise MatrixParseError(f"cannot parse matrix file {path}: {exc}") from exc
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise MatrixParseError(f"ragged or empty matrix file {path}")
    return np.array(rows, dtype=float)


def read_symmetric_matrix(path, warn=None):
    """Read and symmetrize a square matrix; warns (via the callback) when
    the asymmetry exceeds 1e-12 relative."""
    m = read_matrix(path)
    if m.shape[0] != m.shape[1]:
        raise MatrixParseError(f"matrix in {path} is not square")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > 1e-12 * scale and warn is not None:
        warn(f"input matrix {path} is asymmetric; symmetrizing")
    return 0.5 * (m + m.T)


def graph_json(d, edges, q):
    """Graph document: 1-based node indices, per-edge weight, connectivity."""
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
    connected = all(find(v) == find(0) for v in range(d))
    return {
        "d": d,
        "edges": [
            {"i": int(i) + 1, "j": int(j) + 1, "q": float(q[i, j])} for i, j in edges
        ],
        "connected": bool(connected),
    }


def write_graph_json(path, d, edges, q):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_json(d, edges, q), fh, indent=2)
        fh.write("\n")


def write_graph_dot(path, d, edges, q):
    """DOT export with edge penwidth proportional to log(1 + weight)."""
    lines = ["graph fitted {"]
    for v in range(d):
        lines.append(f"  {v + 1};")
    for i, j in edges:
        w = np.log1p(q[i, j])
        lines.append(f'  {i + 1} -- {j + 1} [penwidth={max(w, 0.1):.4f}, label="{q[i, j]:.4g}"];')
    lines.append("}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
