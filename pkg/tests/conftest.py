"""Shared fixtures and generators for the test suite."""

import numpy as np

from tailgraph import q_to_theta, theta_to_gamma


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def points_variogram(pts):
    """Squared Euclidean distance matrix of a point configuration."""
    pts = np.asarray(pts, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sum(diff**2, axis=2)


def random_valid_variogram(d, rng, scale=1.0):
    """Strictly CND variogram from d affinely independent Gaussian points."""
    pts = scale * rng.standard_normal(size=(d, d - 1))
    return points_variogram(pts)


def sphere_variogram(d, rng):
    """Squared distances of d points drawn uniformly on the unit sphere
    in dimension d-1."""
    pts = rng.standard_normal(size=(d, d - 1))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return points_variogram(pts)


def random_emtp2_variogram(d, rng, low=0.5, high=1.5):
    """Variogram whose precision is a complete-graph Laplacian with
    positive weights, hence EMTP2 by construction."""
    q = np.zeros((d, d))
    iu = np.triu_indices(d, 1)
    q[iu] = rng.uniform(low, high, size=len(iu[0]))
    q = q + q.T
    return theta_to_gamma(q_to_theta(q)), q


def centering(d):
    return np.eye(d) - np.ones((d, d)) / d


# d=3 instance violating the triangle inequality (3 > 1 + 1); the
# constrained optimum moves the first entry down to the metric boundary.
TRIANGLE = np.array([[0.0, 3.0, 1.0], [3.0, 0.0, 1.0], [1.0, 1.0, 0.0]])

# equilateral d=3 instance; its precision is already a Laplacian
ONES3 = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
