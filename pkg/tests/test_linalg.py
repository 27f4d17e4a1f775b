import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import centering, make_rng
from tailgraph.linalg import (
    NotPositiveDefiniteError,
    as_symmetric,
    chol_lower,
    is_positive_definite,
    logdet_pd,
    pseudo_inverse,
    sym_eig,
)


def test_sym_eig_identity():
    w, v = sym_eig(np.eye(3))
    assert_allclose(w, [1.0, 1.0, 1.0])
    assert_allclose(v @ v.T, np.eye(3), atol=1e-12)


def test_sym_eig_two_by_two():
    w, _ = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert_allclose(w, [3.0, 1.0], atol=1e-12)


def test_sym_eig_centering_projector():
    w, _ = sym_eig(centering(3))
    assert_allclose(w, [1.0, 1.0, 0.0], atol=1e-12)


def test_sym_eig_descending_and_reconstructs():
    rng = make_rng(7)
    a = rng.standard_normal((6, 6))
    m = a + a.T
    w, v = sym_eig(m)
    assert np.all(np.diff(w) <= 1e-12)
    assert_allclose(v @ np.diag(w) @ v.T, m, atol=1e-10)


def test_pseudo_inverse_identity():
    assert_allclose(pseudo_inverse(np.eye(4)), np.eye(4), atol=1e-12)


def test_pseudo_inverse_scaled_projector():
    p = centering(3)
    assert_allclose(pseudo_inverse(0.5 * p), 2.0 * p, atol=1e-12)


def test_pseudo_inverse_diagonal_with_zero():
    assert_allclose(
        pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-12
    )


def test_pseudo_inverse_moore_penrose_properties():
    rng = make_rng(11)
    for _ in range(20):
        a = rng.standard_normal((5, 3))
        m = a @ a.T  # rank-deficient PSD
        mp = pseudo_inverse(m)
        assert_allclose(m @ mp @ m, m, atol=1e-9)
        assert_allclose(mp @ m @ mp, mp, atol=1e-9)
        assert_allclose(m @ mp, (m @ mp).T, atol=1e-9)
        assert_allclose(mp @ m, (mp @ m).T, atol=1e-9)


def test_pseudo_inverse_zero_matrix_rejected():
    with pytest.raises(ValueError, match="rank zero"):
        pseudo_inverse(np.zeros((3, 3)))


def test_logdet_identity():
    assert logdet_pd(np.eye(4)) == pytest.approx(0.0, abs=1e-12)


def test_logdet_correlation():
    m = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert logdet_pd(m) == pytest.approx(np.log(0.75), abs=1e-12)


def test_logdet_diagonal():
    assert logdet_pd(np.diag([2.0, 3.0])) == pytest.approx(np.log(6.0))


def test_logdet_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        logdet_pd(np.diag([1.0, -1.0]))


def test_logdet_matches_eigenvalues():
    rng = make_rng(3)
    for _ in range(10):
        a = rng.standard_normal((6, 6))
        m = a @ a.T + 6 * np.eye(6)
        w, _ = sym_eig(m)
        assert logdet_pd(m) == pytest.approx(np.sum(np.log(w)), abs=1e-9)


def test_as_symmetric_validation():
    with pytest.raises(ValueError):
        as_symmetric(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_symmetric(np.array([[np.nan, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        as_symmetric(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_chol_lower_reconstructs():
    m = np.array([[4.0, 2.0], [2.0, 3.0]])
    ell = chol_lower(m)
    assert_allclose(ell @ ell.T, m, atol=1e-12)
    assert np.allclose(ell, np.tril(ell))


def test_is_positive_definite():
    assert is_positive_definite(np.eye(2))
    assert not is_positive_definite(np.diag([1.0, 0.0]))
    assert not is_positive_definite(np.diag([1.0, -1.0]))
