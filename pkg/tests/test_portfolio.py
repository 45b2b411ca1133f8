import numpy as np
import pytest

from oracles import grid_two_asset, oracle_frontier, projected_gradient_frontier
from wavecorr.errors import ConfigError, DataError, NumericalError
from wavecorr.ingest import ReturnsPanel, SyntheticSpec, generate_synthetic
from wavecorr.modwt import make_filter
from wavecorr.portfolio import (
    build_covariance,
    default_targets,
    frontier_by_scale,
    min_variance_frontier,
    write_frontier_csv,
    write_gmv_csv,
)

LA8 = make_filter("la8")


def random_instance(rng, n):
    a = rng.standard_normal((n, n + 5))
    cov = a @ a.T / (n + 5) + 0.05 * np.eye(n)
    mu = rng.normal(0.05, 0.03, n)
    return cov, mu


def test_build_covariance_examples():
    np.testing.assert_allclose(build_covariance(np.eye(3), [1.0, 1.0, 1.0]).covariance, np.eye(3))
    c = np.array([[1.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(build_covariance(c, [2.0, 3.0]).covariance, [[4.0, 3.0], [3.0, 9.0]])


def test_build_covariance_errors():
    with pytest.raises(DataError):
        build_covariance(np.eye(2), [1.0, 0.0])
    with pytest.raises(DataError):
        build_covariance(np.eye(2), [1.0, 1.0, 1.0])
    with pytest.raises(DataError):
        build_covariance(np.array([[1.0, 0.2], [0.3, 1.0]]), [1.0, 1.0])


@pytest.mark.parametrize("n", [2, 5, 49])
def test_isotropic_gmv_is_equal_weight(n):
    fr = min_variance_frontier(0.04 * np.eye(n), np.linspace(0.01, 0.1, n), [0.05])
    np.testing.assert_allclose(fr.gmv.weights, np.full(n, 1.0 / n), atol=1e-15)
    assert fr.gmv.stdev == pytest.approx(0.2 / np.sqrt(n), rel=1e-12)


def test_two_asset_corner():
    cov = np.diag([1.0, 4.0])
    mu = np.array([0.1, 0.2])
    fr = min_variance_frontier(cov, mu, [0.1])
    np.testing.assert_allclose(fr.points[0].weights, [1.0, 0.0], atol=1e-14)
    w, var = grid_two_asset(cov, mu, 0.1)
    np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-4)
    assert fr.points[0].stdev ** 2 == pytest.approx(var, abs=1e-4)


def test_two_asset_grid_oracle_with_correlation():
    cov = np.array([[0.04, 0.01], [0.01, 0.09]])
    mu = np.array([0.05, 0.12])
    for m in [0.0, 0.08, 0.2]:
        fr = min_variance_frontier(cov, mu, [m])
        _, var = grid_two_asset(cov, mu, m)
        assert fr.points[0].stdev ** 2 == pytest.approx(var, rel=1e-4)


def test_constraints_and_closed_form_variance():
    rng = np.random.default_rng(0)
    for n in [3, 8, 20]:
        cov, mu = random_instance(rng, n)
        targets = default_targets(mu, 15)
        fr = min_variance_frontier(cov, mu, targets)
        for p in fr.points:
            assert abs(p.weights.sum() - 1) <= 1e-10
            assert abs(p.weights @ mu - p.target_return) <= 1e-10
        np.testing.assert_allclose(
            [p.stdev ** 2 for p in fr.points], fr.variance_at(targets), rtol=1e-9
        )


def test_frontier_is_convex_parabola_with_gmv_minimum():
    cov, mu = random_instance(np.random.default_rng(1), 6)
    targets = np.linspace(mu.min() - 0.05, mu.max() + 0.05, 41)
    fr = min_variance_frontier(cov, mu, targets)
    var = np.array([p.stdev ** 2 for p in fr.points])
    assert np.all(np.diff(var, 2) > 0)
    # a quadratic fit recovers A/D, -2B/D, C/D
    coef = np.polyfit(targets, var, 2)
    np.testing.assert_allclose(coef, [fr.a / fr.d, -2 * fr.b / fr.d, fr.c / fr.d], rtol=1e-8)
    assert np.all(var >= fr.gmv.stdev ** 2 - 1e-15)
    assert fr.gmv.target_return == pytest.approx(fr.b / fr.a)
    assert fr.gmv.stdev ** 2 == pytest.approx(1 / fr.a, rel=1e-12)


def test_against_search_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(2, 11))
        cov, mu = random_instance(rng, n)
        m = float(rng.uniform(mu.min(), mu.max()))
        fr = min_variance_frontier(cov, mu, [m])
        w = oracle_frontier(cov, mu, m)
        assert fr.points[0].stdev ** 2 == pytest.approx(w @ cov @ w, abs=1e-6)


def test_against_projected_gradient_large():
    rng = np.random.default_rng(3)
    cov, mu = random_instance(rng, 49)
    m = float(mu.mean())
    fr = min_variance_frontier(cov, mu, [m])
    w = projected_gradient_frontier(cov, mu, m)
    assert fr.points[0].stdev ** 2 == pytest.approx(w @ cov @ w, abs=1e-6)


def test_singular_covariance_refused():
    c = np.ones((3, 3))
    with pytest.raises(NumericalError, match="ill-conditioned"):
        min_variance_frontier(c, [0.1, 0.2, 0.3], [0.2])


def test_equal_means_degenerate():
    with pytest.raises(NumericalError, match="degenerate"):
        min_variance_frontier(np.eye(3), [0.1, 0.1, 0.1], [0.1])


def test_mu_shape_checked():
    with pytest.raises(DataError):
        min_variance_frontier(np.eye(3), [0.1, 0.2], [0.1])


def slow_factor_panel(n=8, t=4096, seed=0):
    # white idiosyncratic noise plus a common factor concentrated at long scales
    rng = np.random.default_rng(seed)
    f = np.convolve(rng.standard_normal(t + 63), np.ones(64) / 8.0, mode="valid")
    r = 0.01 * (rng.standard_normal((n, t)) + f)
    return ReturnsPanel([f"A{i}" for i in range(n)], list(range(t)), r)


def test_scale_one_frontier_dominates_when_comovement_is_slow():
    p = slow_factor_panel()
    frs = frontier_by_scale(p, None, LA8, 5)
    assert list(frs) == ["raw", 1, 2, 3, 4, 5]
    s1 = np.array([q.stdev for q in frs[1].points])
    s5 = np.array([q.stdev for q in frs[5].points])
    raw = np.array([q.stdev for q in frs["raw"].points])
    assert np.all(s1 < raw) and np.all(raw < s5)
    assert frs[1].gmv.stdev < frs[5].gmv.stdev


def test_equicorrelated_frontiers_coincide_across_scales():
    p = generate_synthetic(SyntheticSpec(6, 8192, "equicorrelated", 0.3, seed=4))
    frs = frontier_by_scale(p, None, LA8, 4)
    base = np.array([q.stdev for q in frs["raw"].points])
    for s in (1, 2, 3, 4):
        got = np.array([q.stdev for q in frs[s].points])
        np.testing.assert_allclose(got, base, rtol=0.1)


def test_identical_panel_refused():
    x = np.random.default_rng(5).standard_normal(512)
    p = ReturnsPanel(["a", "b", "c"], list(range(512)), np.vstack([x, x, x]))
    with pytest.raises(NumericalError):
        frontier_by_scale(p, None, LA8, 2, mu=[0.1, 0.2, 0.3])


def test_frontier_by_scale_window_and_levels():
    p = generate_synthetic(SyntheticSpec(4, 600, seed=6))
    frs = frontier_by_scale(p, (100, 256), LA8, 2, scales=["raw", 2])
    assert list(frs) == ["raw", 2]
    with pytest.raises(ConfigError, match="max_level"):
        frontier_by_scale(p, (0, 256), LA8, 6)
    with pytest.raises(ConfigError):
        frontier_by_scale(p, (500, 256), LA8, 2)


def test_frontier_exports(tmp_path):
    p = generate_synthetic(SyntheticSpec(3, 400, "one-factor", 0.3, seed=7))
    frs = frontier_by_scale(p, None, LA8, 2, targets=[0.0, 0.001])
    write_frontier_csv(tmp_path / "f.csv", frs, p.asset_ids)
    write_gmv_csv(tmp_path / "g.csv", frs, p.asset_ids)
    f = (tmp_path / "f.csv").read_text().splitlines()
    assert f[0] == "scale,target_return,stdev,w_1,w_2,w_3"
    assert len(f) == 1 + 3 * 2
    g = (tmp_path / "g.csv").read_text().splitlines()
    assert g[0] == "scale,return,stdev,A000,A001,A002"
    assert [ln.split(",")[0] for ln in g[1:]] == ["raw", "1", "2"]
