#!/usr/bin/env python3
"""Desk-scale experiment on synthetic data: extract baseline, filtration and
Betti features, backtest every feature kind over a small (w, h) grid with both
regressors, and print the gain-vs-baseline table.

Usage: python3 scripts/run_synthetic_experiment.py [--days 250] [--seed 7]
"""

import argparse
import warnings

from chaintopo import backtest as bt
from chaintopo import features as ft
from chaintopo.ingest import generate_synthetic
from chaintopo.models import RegressorSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--days", type=int, default=250)
    ap.add_argument("--txs-per-day", type=int, default=40)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    print(f"generating {args.days} synthetic days (seed {args.seed})")
    series = generate_synthetic(args.days, args.txs_per_day, "random-walk", args.seed)
    params = ft.FeatureParams(n=10, num_scales=50)

    kinds = ("baseline", "fl", "betti", "betti_deriv")
    series_by_kind = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for kind in kinds:
            table = ft.feature_table(series, kind, params)
            series_by_kind[kind] = bt.PredictionSeries(
                days=table.days, features=table.values, prices=series.price_array()
            )
            print(f"  {kind}: {table.values.shape[1]} features/day")

    specs = {
        "enet": RegressorSpec("enet", {"l1_penalty": 0.1, "l2_penalty": 0.1}, args.seed),
        "rf": RegressorSpec("rf", {"n_trees": 100}, args.seed),
    }
    configs = [
        bt.BacktestConfig(
            feature_kind=kind, regressor=spec, w=w, h=h, l=50,
            d2=None if kind == "baseline" else 10, seed=args.seed,
        )
        for kind in kinds
        for spec in specs.values()
        for w in (3, 7)
        for h in (1, 7)
    ]
    print(f"running {len(configs)} backtests...")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = bt.grid_search(series_by_kind, configs, jobs=args.jobs)

    baseline_rmse = {
        (r.config["regressor"]["kind"], r.config["w"], r.config["h"]): r.rmse
        for r in reports
        if r.config["feature_kind"] == "baseline"
    }
    print(f"\n{'kind':<12} {'model':<5} {'w':>2} {'h':>2} {'rmse':>10} {'gain%':>8}")
    for r in sorted(reports, key=lambda r: (r.config["feature_kind"],
                                            r.config["regressor"]["kind"],
                                            r.config["w"], r.config["h"])):
        c = r.config
        base = baseline_rmse[(c["regressor"]["kind"], c["w"], c["h"])]
        g = bt.gain(r.rmse, base) if base > 0 else float("nan")
        print(f"{c['feature_kind']:<12} {c['regressor']['kind']:<5} "
              f"{c['w']:>2} {c['h']:>2} {r.rmse:>10.3f} {g:>8.2f}")


if __name__ == "__main__":
    main()
