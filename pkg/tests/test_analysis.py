import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecorr.analysis import (
    index_returns,
    one_factor_check,
    partition_by_sdu,
    partition_report,
    window_returns,
    write_partition_csv,
)
from wavecorr.eigen import to_sdu
from wavecorr.errors import ConfigError, DataError
from wavecorr.ingest import ReturnsPanel, SyntheticSpec, generate_regime_panel, generate_synthetic
from wavecorr.modwt import make_filter
from wavecorr.windows import WindowPlan, run_dynamics

LA8 = make_filter("la8")


def crisis_panel(seed=0, n=20):
    # calm windows drift up with little co-movement; crisis windows fall together
    return generate_regime_panel(n, [(400, 0.05, 0.0005), (400, 0.7, -0.002)] * 3, seed=seed)


def test_index_symmetric_pair():
    r = np.array([[0.01, 0.02], [-0.01, 0.04]])
    np.testing.assert_allclose(index_returns(r), [0.0, 0.03], atol=1e-17)


def test_index_single_asset():
    x = np.array([0.1, -0.2, 0.05])
    np.testing.assert_array_equal(index_returns(x), x)


def test_index_weighted_by_hand():
    r = np.array([[0.01, 0.02, -0.03], [0.00, -0.01, 0.02], [0.05, 0.00, 0.01]])
    got = index_returns(r, [0.5, 0.3, 0.2])
    want = [
        0.5 * 0.01 + 0.3 * 0.00 + 0.2 * 0.05,
        0.5 * 0.02 + 0.3 * -0.01 + 0.2 * 0.00,
        0.5 * -0.03 + 0.3 * 0.02 + 0.2 * 0.01,
    ]
    np.testing.assert_allclose(got, want, atol=1e-16)


def test_index_weight_errors():
    r = np.zeros((3, 4))
    with pytest.raises(ConfigError):
        index_returns(r, [0.5, 0.5])
    with pytest.raises(ConfigError, match="sum"):
        index_returns(r, [0.5, 0.3, 0.3])


def test_index_from_panel():
    p = generate_synthetic(SyntheticSpec(4, 50, seed=1))
    np.testing.assert_allclose(index_returns(p), p.returns.mean(axis=0), atol=1e-16)


def test_window_returns():
    x = np.array([0.1, 0.2, -0.1, 0.05])
    np.testing.assert_allclose(window_returns(x, [0, 1, 2], 2), [0.3, 0.1, -0.05], atol=1e-15)
    np.testing.assert_allclose(window_returns(x, [0], 2, "simple"), [1.1 * 1.2 - 1])
    with pytest.raises(ConfigError):
        window_returns(x, [3], 2)
    with pytest.raises(ConfigError):
        window_returns(x, [0], 2, "pct")


def test_partition_hand_example():
    part = partition_by_sdu([1.5, -1.2, 0.3, 2.0], [-0.01, 0.005, 0.001, -0.02])
    assert part.mean_above == pytest.approx(-0.015, abs=1e-15)
    assert part.mean_below == pytest.approx(0.005, abs=1e-15)
    assert part.total_above == pytest.approx(-0.03, abs=1e-15)
    assert list(part.above) == [0, 3] and list(part.below) == [1]


def test_partition_thresholds_strict():
    part = partition_by_sdu([1.0, -1.0, 0.0], [1.0, 2.0, 3.0])
    assert part.empty_above and part.empty_below


def test_partition_empty_flagged():
    part = partition_by_sdu(to_sdu([0.0, 1.0, 0.0, 1.0]), [0.01, 0.02, 0.03, 0.04])
    assert part.count_above == 0 and part.count_below == 0
    assert math.isnan(part.mean_above) and math.isnan(part.mean_below)
    assert part.total_above == 0.0


def test_partition_alignment_and_threshold_errors():
    with pytest.raises(DataError, match="aligned"):
        partition_by_sdu([1.0, 2.0], [0.1])
    with pytest.raises(ConfigError):
        partition_by_sdu([1.0], [0.1], upper=-1, lower=1)


def test_crisis_windows_carry_downward_moves():
    p = crisis_panel()
    dyn = run_dynamics(p, WindowPlan(100, 3, stride=20), LA8)
    wr = window_returns(index_returns(p), dyn.window_starts, 100)
    rows = partition_report(dyn, wr)
    assert [r.scale for r in rows] == ["raw", 1, 2, 3]
    for r in rows:
        assert r.partition.count_above > 0 and r.partition.count_below > 0
        assert r.partition.mean_above < r.partition.mean_below


def test_partition_reproducible_and_scale_invariant():
    p = crisis_panel(seed=1, n=10)
    plan = WindowPlan(100, 2, stride=40)
    dyn = run_dynamics(p, plan, LA8)
    wr = window_returns(index_returns(p), dyn.window_starts, 100)
    first = partition_report(dyn, wr, reference=(0, 20))
    again = partition_report(run_dynamics(p, plan, LA8), wr, reference=(0, 20))
    scaled = ReturnsPanel(p.asset_ids, p.timestamps, 3.7 * p.returns)
    other = partition_report(run_dynamics(scaled, plan, LA8), wr, reference=(0, 20))
    for a, b, c in zip(first, again, other):
        assert np.array_equal(a.partition.above, b.partition.above)
        assert np.array_equal(a.partition.below, b.partition.below)
        assert np.array_equal(a.partition.above, c.partition.above)
        assert np.array_equal(a.partition.below, c.partition.below)


def test_partition_report_second_eigenvalue_and_errors():
    p = crisis_panel(seed=2, n=6)
    dyn = run_dynamics(p, WindowPlan(100, 2, stride=50), LA8)
    wr = np.zeros(dyn.n_windows)
    assert all(r.eigen_rank == 2 for r in partition_report(dyn, wr, eigen_rank=2))
    with pytest.raises(ConfigError):
        partition_report(dyn, wr, eigen_rank=7)
    with pytest.raises(DataError):
        partition_report(dyn, wr[:-1])


def test_partition_csv(tmp_path):
    p = crisis_panel(seed=3, n=6)
    dyn = run_dynamics(p, WindowPlan(100, 2, stride=50), LA8)
    wr = window_returns(index_returns(p), dyn.window_starts, 100)
    rows = partition_report(dyn, wr)
    write_partition_csv(tmp_path / "t.csv", rows)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].startswith("scale,eigen_rank,mean_return_pct_gt1,mean_return_pct_lt_minus1")
    assert [ln.split(",")[0] for ln in lines[1:]] == ["raw", "1", "2"]
    first = rows[0].partition
    cells = lines[1].split(",")
    if not first.empty_above:
        assert float(cells[2]) == pytest.approx(100 * first.mean_above)


def test_one_factor_identity():
    chk = one_factor_check(np.eye(7))
    assert chk.predicted == 1.0
    assert abs(chk.gap) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.floats(0.0, 0.99))
def test_one_factor_exact_on_equicorrelation(n, rho):
    c = np.full((n, n), rho)
    np.fill_diagonal(c, 1.0)
    chk = one_factor_check(c)
    assert chk.predicted == pytest.approx(1 + (n - 1) * rho, abs=1e-12)
    assert abs(chk.gap) <= 1e-10 * n


def test_one_factor_on_sample_matrix():
    p = generate_synthetic(SyntheticSpec(15, 4000, "one-factor", 0.4, seed=4))
    from wavecorr.wavestats import raw_correlation

    chk = one_factor_check(raw_correlation(p.returns))
    # sampling noise only; the model is exactly one-factor
    assert abs(chk.gap) < 0.1
    assert chk.actual >= chk.predicted - 1e-12  # Rayleigh quotient with the flat vector
