import datetime as dt
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaintopo import backtest as bt
from chaintopo import features as ft
from chaintopo.ingest import ValidationError, generate_synthetic
from chaintopo.models import RegressorSpec

ENET0 = RegressorSpec("enet", {"l1_penalty": 0.0, "l2_penalty": 0.0})


def make_series(n_days=60, model="feature-linked", seed=0, kind="baseline"):
    series = generate_synthetic(n_days, 9, model, seed)
    table = ft.feature_table(series, kind, ft.FeatureParams(n=5, num_scales=8))
    return bt.PredictionSeries(
        days=table.days, features=table.values, prices=series.price_array()
    )


# -------------------------------------------------------- build_training_pair

def test_pair_w1_h1_is_previous_day():
    X = np.arange(20, dtype=float).reshape(10, 2)
    y = np.arange(10, dtype=float) * 10
    xhat, target = bt.build_training_pair(X, y, t=5, w=1, h=1)
    assert list(xhat) == [*X[4], y[4]]
    assert target == y[5]


def test_pair_length_is_w_times_d_plus_1():
    X = np.zeros((30, 2))
    y = np.zeros(30)
    xhat, _ = bt.build_training_pair(X, y, t=10, w=3, h=2)
    assert len(xhat) == 3 * (2 + 1)


@given(
    st.integers(min_value=1, max_value=7),
    st.integers(min_value=1, max_value=30),
    st.integers(min_value=0, max_value=20),
)
def test_pair_never_reads_past_t_minus_h(w, h, slack):
    t = w + h - 1 + slack
    X = np.zeros((t + 1, 3))
    y = np.zeros(t + 1)
    log: list[int] = []
    bt.build_training_pair(X, y, t, w, h, index_log=log)
    assert max(log) == t - h
    assert len(log) == w


def test_pair_insufficient_history():
    with pytest.raises(ValidationError):
        bt.build_training_pair(np.zeros((5, 2)), np.zeros(5), t=2, w=3, h=1)


# ----------------------------------------------------------------- fit_for_day

def test_fit_for_day_pair_count():
    # enumeration of the training loop for l=25, w=3, h=1 gives 22 targets
    assert len(bt._training_targets(t=40, w=3, h=1, l=25)) == 22
    assert len(bt._training_targets(t=40, w=1, h=1, l=25)) == 24


def test_fit_for_day_deterministic():
    series = make_series()
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25)
    a, _ = bt.fit_for_day(series, 30, cfg)
    b, _ = bt.fit_for_day(series, 30, cfg)
    assert a.params[0] == b.params[0]
    assert np.array_equal(a.params[1], b.params[1])


def test_fit_for_day_history_too_short():
    series = make_series(n_days=30)
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25)
    with pytest.raises(ValidationError):
        bt.fit_for_day(series, 10, cfg)


# ---------------------------------------------------------------- run_backtest

def test_backtest_recovers_feature_linked_series():
    series = make_series(n_days=80)
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25)
    report = bt.run_backtest(cfg, series)
    assert report.rmse <= 1e-6 * report.actual.mean()


def test_backtest_full_year_row_count():
    series = make_series(n_days=390)
    start = series.days[25]  # l + h - 1 = 25 days of lead-in
    cfg = bt.BacktestConfig(
        "baseline", ENET0, w=3, h=1, l=25,
        eval_start=start, eval_end=series.days[-1],
    )
    report = bt.run_backtest(cfg, series)
    assert len(report.days) == 365


def test_backtest_deterministic_json():
    series = make_series(model="random-walk", seed=3)
    cfg = bt.BacktestConfig(
        "baseline", RegressorSpec("rf", {"n_trees": 10}), w=3, h=1, l=25, seed=11
    )
    assert bt.run_backtest(cfg, series).to_json() == bt.run_backtest(cfg, series).to_json()


def test_backtest_coverage_gap_names_day():
    series = make_series(n_days=40)
    cfg = bt.BacktestConfig(
        "baseline", ENET0, w=3, h=1, l=25, eval_start=dt.date(2018, 6, 1)
    )
    with pytest.raises(ValidationError, match="2018-06-01"):
        bt.run_backtest(cfg, series)


def test_backtest_insufficient_leadin_rejected():
    series = make_series(n_days=40)
    cfg = bt.BacktestConfig(
        "baseline", ENET0, w=3, h=1, l=25, eval_start=series.days[5]
    )
    with pytest.raises(ValidationError, match="lead-in"):
        bt.run_backtest(cfg, series)


def test_backtest_days_independent_of_span():
    # predicting a single day matches the same day inside a longer run
    series = make_series(model="random-walk", seed=5)
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=2, l=25)
    full = bt.run_backtest(cfg, series)
    day = full.days[7]
    single = bt.run_backtest(
        bt.BacktestConfig("baseline", ENET0, w=3, h=2, l=25,
                          eval_start=day, eval_end=day),
        series,
    )
    assert single.predicted[0] == full.predicted[7]


def test_backtest_training_length_only_changes_fits():
    series = make_series(n_days=100, model="random-walk", seed=6)
    start, end = series.days[60], series.days[80]
    days_by_l = {}
    for l in (25, 50):
        cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=l,
                                eval_start=start, eval_end=end)
        days_by_l[l] = bt.run_backtest(cfg, series).days
    assert days_by_l[25] == days_by_l[50]


def test_backtest_instrumented_no_lookahead():
    series = make_series(model="random-walk", seed=9)
    cfg = bt.BacktestConfig("baseline", ENET0, w=5, h=3, l=25)
    report = bt.run_backtest(cfg, series, instrument=True)
    first = 25 + 3 - 1
    for k, reach in enumerate(report.max_index_used):
        assert reach == (first + k) - cfg.h


# -------------------------------------------------------------- rmse and gain

def test_rmse_identities():
    assert bt.rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert bt.rmse([1.0, 3.0], [1.0, 1.0]) == pytest.approx(math.sqrt(2))
    actual = np.array([5.0, -2.0, 7.5])
    assert bt.rmse(actual + 3.25, actual) == pytest.approx(3.25, abs=1e-12)


def test_rmse_rejects_mismatch():
    with pytest.raises(ValidationError):
        bt.rmse([1.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        bt.rmse([], [])


def test_gain_identities():
    assert bt.gain(100.0, 100.0) == 0.0
    assert bt.gain(60.0, 100.0) == pytest.approx(40.0)
    assert bt.gain(120.0, 100.0) < 0
    with pytest.raises(ValidationError):
        bt.gain(1.0, 0.0)


# ----------------------------------------------------------------- grid_search

def test_grid_search_single_cell():
    series = make_series()
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25)
    reports = bt.grid_search({"baseline": series}, [cfg])
    assert len(reports) == 1


def test_grid_search_full_grid_size_and_order():
    series = make_series(n_days=80, model="random-walk", seed=2)
    configs = [
        bt.BacktestConfig("baseline", ENET0, w=w, h=h, l=25)
        for w in (3, 5, 7)
        for h in (1, 2)
    ]
    reports = bt.grid_search({"baseline": series}, configs)
    assert len(reports) == 6
    keys = [bt._rank_key(r) for r in reports]
    assert keys == sorted(keys)


def test_grid_search_parallel_matches_serial():
    series = make_series(n_days=70, model="random-walk", seed=4)
    configs = [
        bt.BacktestConfig("baseline", ENET0, w=w, h=1, l=25) for w in (3, 5)
    ]
    serial = bt.grid_search({"baseline": series}, configs, jobs=1)
    parallel = bt.grid_search({"baseline": series}, configs, jobs=4)
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


def test_grid_search_rejects_empty_and_unknown_kind():
    series = make_series()
    with pytest.raises(ValidationError):
        bt.grid_search({"baseline": series}, [])
    cfg = bt.BacktestConfig("betti", ENET0, w=3, h=1, l=25)
    with pytest.raises(ValidationError):
        bt.grid_search({"baseline": series}, [cfg])


def test_config_validation():
    with pytest.raises(ValidationError):
        bt.BacktestConfig("baseline", ENET0, w=0, h=1, l=25)
    with pytest.raises(ValidationError):
        bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=4)
    with pytest.raises(ValidationError):
        bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25, d2=0)


def test_report_json_shape():
    series = make_series()
    cfg = bt.BacktestConfig("baseline", ENET0, w=3, h=1, l=25)
    payload = json.loads(bt.run_backtest(cfg, series).to_json())
    assert set(payload) == {"config", "rows", "rmse", "gain_vs_baseline"}
    assert set(payload["rows"][0]) == {"date", "predicted", "actual"}
    assert payload["config"]["w"] == 3
