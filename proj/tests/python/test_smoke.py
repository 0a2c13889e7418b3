"""End-to-end checks of the python bindings against known values."""

import json
import math
import os

import numpy as np
import pytest

import trendlab as tl

HERE = os.path.dirname(os.path.abspath(__file__))


def test_version():
    assert tl.__version__ == "0.1.0"


def test_min_variance_routes_agree():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.normal(size=(4, 4))
        cov = g @ g.T + 0.5 * np.eye(4)
        closed = tl.min_variance_closed_form(cov)
        whitened = tl.min_variance_whitened(cov)
        psd = tl.min_variance_psd(cov)
        assert np.allclose(closed["weights"], whitened["weights"], atol=1e-10)
        assert np.allclose(closed["weights"], psd["weights"], atol=1e-10)
        assert abs(sum(closed["weights"]) - 1.0) < 1e-10


def test_diagonal_closed_form_value():
    res = tl.min_variance_closed_form(np.diag([1.0, 4.0]))
    assert np.allclose(res["weights"], [0.8, 0.2], atol=1e-12)


def test_barbell_allocation():
    res = tl.min_variance_simplex(tl.toeplitz_matrix(0.8, 0.4))
    assert np.allclose(res["weights"], [0.5, 0.0, 0.5], atol=1e-10)
    assert res["variance"] == pytest.approx(0.7, abs=1e-10)
    opt = tl.barbell_optimal(0.8, 0.4)
    assert np.allclose(opt["weights"], [0.5, 0.0, 0.5])
    assert tl.barbell_profile(0.8, 0.4, 0.5) == pytest.approx(0.7, abs=1e-12)
    assert tl.toeplitz_determinant(0.9, 0.5) == pytest.approx(-0.06, abs=1e-12)


def test_rejects_non_pd():
    with pytest.raises(ValueError):
        tl.min_variance_closed_form(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_trend_score_flat_and_saturated():
    flat = tl.trend_score(np.zeros(120), horizon=20, vol_window=10)
    assert np.all(np.isnan(flat[:29]))
    assert np.all(flat[29:] == 0.0)
    up = np.full(120, 0.02) + 1e-4 * np.arange(120) % 3
    scores = tl.trend_score(up, horizon=20, vol_window=10)
    assert scores[-1] == 1.0


def test_kalman_recovers_static_weights():
    rng = np.random.default_rng(11)
    design = rng.normal(size=(2000, 3))
    w_true = np.array([0.4, -0.2, 0.7])
    y = design @ w_true + 1e-3 * rng.normal(size=2000)
    path = tl.kalman_filter(y, design, obs_noise_var=1e-6, state_noise_var=0.0, initial_var=1e6)
    ols, *_ = np.linalg.lstsq(design, y, rcond=None)
    assert np.allclose(path["means"][-1], ols, atol=1e-3)


def test_metrics_and_utility():
    rng = np.random.default_rng(13)
    strat = rng.normal(5e-4, 0.01, size=500)
    row = tl.metrics(strat, strat)
    assert row["benchmark_corr"] == pytest.approx(1.0)
    assert row["sharpe"] == pytest.approx(
        252 * strat.mean() / (math.sqrt(252) * strat.std(ddof=1)), rel=1e-12
    )
    assert tl.cobb_douglas_utility(0.69, 0.82) == pytest.approx(
        0.69**0.8 * 0.82**0.2, abs=1e-12
    )


def test_stability_diagnostics_convention():
    d = tl.stability_diagnostics([0.2, 0.2, 0.2, 0.2])
    assert d == {"std_dev": 0.0, "autocorr1": 0.0, "max_step": 0.0}
    d = tl.stability_diagnostics([0.1, 0.3, 0.1, 0.3])
    assert d["autocorr1"] == pytest.approx(-1.0)
    assert tl.ema_smooth([0.2, 0.4], 0.5) == pytest.approx(0.3)
    assert tl.percentile([1.0, 2.0, 3.0, 4.0], 40.0) == pytest.approx(2.2)


def test_ablation_fixture_ranking():
    with open(os.path.join(HERE, "..", "data", "ablation_fixture.json")) as fh:
        fixture = json.load(fh)
    rows = tl.ablation_zscores(
        fixture["strategies"],
        fixture["periods"],
        np.array(fixture["sharpe"]),
        np.array(fixture["ret_over_maxdd"]),
        np.array(fixture["corr"]),
    )
    order = [row["strategy"] for row in rows]
    assert order == ["no_125", "no_60", "all_horizons", "no_250", "no_20", "no_500"]
    assert rows[0]["z_overall"] == pytest.approx(0.80, abs=0.15)
    assert rows[-1]["z_overall"] == pytest.approx(-1.12, abs=0.15)


def test_cluster_separates_planted_groups():
    rng = np.random.default_rng(17)
    fast = rng.normal(size=1500)
    slow = rng.normal(size=1500)
    sleeves = np.column_stack(
        [
            fast + 0.2 * rng.normal(size=1500),
            fast + 0.3 * rng.normal(size=1500),
            0.5 * (fast + slow) + 0.4 * rng.normal(size=1500),
            slow + 0.3 * rng.normal(size=1500),
            slow + 0.2 * rng.normal(size=1500),
        ]
    )
    merges = tl.horizon_cluster(["20d", "60d", "125d", "250d", "500d"], sleeves)
    first_two = {(m["left"], m["right"]) for m in merges[:2]}
    assert first_two == {(0, 1), (3, 4)}
    distances = [m["distance"] for m in merges]
    assert distances == sorted(distances)


def test_synthetic_universe_determinism():
    a = tl.generate_synthetic_universe(2, 400, [100.0], seed=9)
    b = tl.generate_synthetic_universe(2, 400, [100.0], seed=9)
    for key in a:
        assert np.array_equal(a[key][1], b[key][1])
    c = tl.generate_synthetic_universe(2, 400, [100.0], seed=10)
    assert not np.array_equal(a["A0"][1], c["A0"][1])


@pytest.fixture(scope="module")
def small_universe():
    prices = tl.generate_synthetic_universe(
        3, 2800, [10.0, 800.0], drift_vol=0.2, noise_vol=0.1, medium_redundancy=True, seed=4
    )
    return {key: tl.to_returns(series) for key, (dates, series) in prices.items()}


def test_walk_forward_smoke(small_universe):
    bench = tl.equal_weight_trend_benchmark(small_universe)
    report = tl.walk_forward(small_universe, "pure_trend", bench)
    assert report["variant"] == "pure_trend"
    assert len(report["net_returns"]) > 0
    assert np.all(report["net_returns"] <= report["gross_returns"] + 1e-15)
    assert math.isfinite(report["full_sample"]["sharpe"])
    again = tl.walk_forward(small_universe, "pure_trend", bench)
    assert np.array_equal(report["net_returns"], again["net_returns"])


def test_dynamic_weights_smoke(small_universe):
    windows = tl.dynamic_horizon_weights(small_universe)
    assert len(windows) > 0
    for window in windows:
        for asset, weights in window["weights"].items():
            assert len(weights) == 5
            assert all(w >= 0 for w in weights)
            assert sum(weights) == pytest.approx(1.0, abs=1e-9)
