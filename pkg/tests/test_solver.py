import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import (
    ONES3,
    TRIANGLE,
    make_rng,
    random_emtp2_variogram,
    random_valid_variogram,
    sphere_variogram,
)
from tailgraph import (
    FitConfig,
    InvalidVariogramError,
    cayley_menger_logdet,
    check_variogram,
    duality_gap,
    existence_check,
    extract_graph,
    fit,
    fit_on_graph,
    gamma_to_theta,
    initial_point,
    kkt_report,
    row_update,
    theta_to_q,
    tree_metric_variogram,
)


def test_existence_check():
    assert existence_check(ONES3)
    g = ONES3.copy()
    g[0, 1] = g[1, 0] = 0.0
    assert not existence_check(g)
    g[0, 1] = g[1, 0] = -1.0
    assert not existence_check(g)


def test_initial_point_fast_path():
    assert_allclose(initial_point(ONES3), ONES3)


def test_initial_point_violated_triangle():
    g0 = initial_point(TRIANGLE)
    assert check_variogram(g0).strictly_cnd
    assert np.all(g0 <= TRIANGLE + 1e-12)


def test_initial_point_rejects_malformed():
    with pytest.raises(ValueError):
        initial_point(np.array([[1.0, 1.0], [1.0, 0.0]]))


def test_initial_point_feasible_on_random_empirical_like_input():
    rng = make_rng(101)
    for _ in range(10):
        d = int(rng.integers(4, 9))
        g = random_valid_variogram(d, rng)
        # perturb until the triangle structure may break but entries stay
        # positive; the construction must still return a feasible point
        g = g + rng.uniform(0.0, 0.5, size=g.shape)
        g = 0.5 * (g + g.T)
        np.fill_diagonal(g, 0.0)
        g0 = initial_point(g)
        assert check_variogram(g0).strictly_cnd
        assert np.all(g0 <= g + 1e-10)


def test_row_update_fixed_point_all_ones():
    for i in range(3):
        out = row_update(ONES3, ONES3, i)
        assert_allclose(out, ONES3, atol=1e-9)


def test_row_update_converges_on_triangle():
    gamma = initial_point(TRIANGLE)
    for _ in range(40):
        for i in range(3):
            gamma = row_update(gamma, TRIANGLE, i)
    assert gamma[0, 1] == pytest.approx(2.0, abs=1e-6)
    assert gamma[0, 2] == pytest.approx(1.0, abs=1e-6)
    assert gamma[1, 2] == pytest.approx(1.0, abs=1e-6)


def test_row_update_monotone_and_feasible():
    rng = make_rng(71)
    for _ in range(5):
        d = int(rng.integers(4, 7))
        gbar = sphere_variogram(d, rng)
        gamma = initial_point(gbar)
        prev = cayley_menger_logdet(gamma)
        for sweep in range(3):
            for i in range(d):
                gamma = row_update(gamma, gbar, i)
                rep = check_variogram(gamma)
                assert rep.strictly_cnd
                assert np.all(gamma <= gbar + 1e-10)
                val = cayley_menger_logdet(gamma)
                assert val >= prev - 1e-12 * max(1.0, abs(prev))
                prev = val


def test_duality_gap_examples():
    assert duality_gap(ONES3, ONES3) == pytest.approx(0.0, abs=1e-12)

    g0 = initial_point(TRIANGLE)
    rep = kkt_report(g0, TRIANGLE)
    # at a non-optimal feasible point either the gap is positive or the
    # induced weights are not yet feasible
    assert rep.gap > 1e-6 or rep.min_q < -1e-6

    gam, gbar = 0.5, 2.0
    g = np.array([[0.0, gam], [gam, 0.0]])
    gb = np.array([[0.0, gbar], [gbar, 0.0]])
    assert duality_gap(g, gb) == pytest.approx(gbar / gam - 1.0, abs=1e-12)


def test_kkt_report_all_ones_optimum():
    rep = kkt_report(ONES3, ONES3)
    assert rep.min_q == pytest.approx(2.0 / 3.0, abs=1e-10)
    assert rep.max_gamma_violation == pytest.approx(0.0, abs=1e-12)
    assert rep.max_comp_slack == pytest.approx(0.0, abs=1e-10)


def test_kkt_report_triangle_optimum():
    r = fit(TRIANGLE)
    rep = r.kkt
    assert rep.max_comp_slack <= 1e-8
    assert TRIANGLE[0, 1] - r.gamma_hat[0, 1] == pytest.approx(1.0, abs=1e-6)
    assert r.q_hat[0, 1] == pytest.approx(0.0, abs=1e-8)


def test_kkt_report_flags_non_optimal_candidate():
    rep = kkt_report(TRIANGLE, TRIANGLE)
    assert rep.min_q < 0.0


def test_extract_graph():
    r = fit(ONES3)
    assert extract_graph(r.theta_hat) == [(0, 1), (0, 2), (1, 2)]
    r2 = fit(TRIANGLE)
    assert extract_graph(r2.theta_hat) == [(0, 2), (1, 2)]
    assert extract_graph(np.zeros((3, 3))) == []


def test_fit_triangle():
    r = fit(TRIANGLE)
    assert r.converged
    assert r.gamma_hat[0, 1] == pytest.approx(2.0, abs=1e-6)
    assert r.gamma_hat[0, 2] == pytest.approx(1.0, abs=1e-6)
    assert r.gamma_hat[1, 2] == pytest.approx(1.0, abs=1e-6)
    assert r.graph == [(0, 2), (1, 2)]


def test_fit_fixed_point_iff_emtp2():
    rng = make_rng(83)
    for _ in range(5):
        d = int(rng.integers(3, 7))
        g, _ = random_emtp2_variogram(d, rng)
        r = fit(g)
        assert np.abs(r.gamma_hat - g).max() <= 1e-7
    # and conversely: a non-EMTP2 input must change
    r = fit(TRIANGLE)
    assert np.abs(r.gamma_hat - TRIANGLE).max() > 1e-3


def test_fit_idempotent():
    r = fit(TRIANGLE)
    r2 = fit(r.gamma_hat)
    assert np.abs(r2.gamma_hat - r.gamma_hat).max() <= 1e-7


def test_fit_scale_equivariant():
    rng = make_rng(89)
    gbar = sphere_variogram(6, rng)
    c = 3.7
    r1 = fit(gbar)
    r2 = fit(c * gbar)
    assert_allclose(r2.gamma_hat, c * r1.gamma_hat, rtol=1e-7, atol=1e-9)


def test_fit_d2():
    g = np.array([[0.0, 0.9], [0.9, 0.0]])
    r = fit(g)
    assert r.converged
    assert_allclose(r.gamma_hat, g)
    assert r.graph == [(0, 1)]


def test_fit_rejects_nonpositive_entries():
    g = ONES3.copy()
    g[0, 2] = g[2, 0] = 0.0
    with pytest.raises(InvalidVariogramError):
        fit(g)


def test_fit_gap_trace_nonincreasing_tail():
    rng = make_rng(97)
    gbar = sphere_variogram(8, rng)
    r = fit(gbar)
    assert r.converged
    gaps = [g for _, g, _ in r.gap_trace]
    assert gaps[-1] <= r.config.gap_tol
    # the pairing <<gbar, Q(gamma)>> - (d-1) can dip slightly below zero
    # while Q(gamma) still has small negative entries mid-run; only large
    # negative values would indicate a broken iterate
    assert min(gaps) >= -1e-3


def test_fit_on_graph_complete_recovers_input():
    rng = make_rng(103)
    gbar, q = random_emtp2_variogram(5, rng)
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    r = fit_on_graph(gbar, edges)
    assert_allclose(r.q_hat, q, atol=1e-7)


def test_fit_on_graph_matches_constrained_refit():
    r = fit(TRIANGLE)
    r2 = fit_on_graph(TRIANGLE, r.graph)
    assert_allclose(r2.q_hat, r.q_hat, atol=1e-7)


def test_fit_on_graph_tree_metric_exact():
    edges = [(0, 1, 1.0), (1, 2, 0.5), (1, 3, 2.0)]
    g = tree_metric_variogram(edges)
    r = fit_on_graph(g, [(i, j) for i, j, _ in edges])
    assert_allclose(r.gamma_hat, g, atol=1e-7)


def test_fit_on_graph_requires_connected():
    with pytest.raises(ValueError, match="connected"):
        fit_on_graph(ONES3, [(0, 1)])


def test_d3_projection_matches_grid_oracle():
    # with one violated triangle inequality the slack conditions pin two
    # entries at their bounds; the free entry maximizes the bordered
    # determinant on a one-dimensional grid
    for gbar12, g13, g23 in [(3.0, 1.0, 1.0), (5.0, 1.0, 2.0)]:
        gbar = np.array(
            [[0.0, gbar12, g13], [gbar12, 0.0, g23], [g13, g23, 0.0]]
        )
        lo = abs(g13 - g23) + 1e-3
        grid = np.arange(lo, gbar12 + 1e-9, 1e-3)
        vals = []
        for t in grid:
            g = gbar.copy()
            g[0, 1] = g[1, 0] = t
            vals.append(cayley_menger_logdet(g))
        best = grid[int(np.argmax(vals))]
        r = fit(gbar)
        assert r.gamma_hat[0, 1] == pytest.approx(best, abs=2e-3)
        assert r.gamma_hat[0, 2] == pytest.approx(g13, abs=1e-7)
        assert r.gamma_hat[1, 2] == pytest.approx(g23, abs=1e-7)
