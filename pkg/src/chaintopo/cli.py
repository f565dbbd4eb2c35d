"""Command-line front end: synth -> features -> backtest -> report.

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys
from pathlib import Path

import numpy as np

from chaintopo import backtest as bt
from chaintopo import features as ft
from chaintopo import ingest, tda
from chaintopo.filtration import DEFAULT_SCALES_BTC, FlScales
from chaintopo.ingest import ParseError, ValidationError
from chaintopo.models import RegressorSpec

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _load_config_defaults(argv: list[str]) -> dict:
    # a --config JSON file supplies defaults; explicit flags override
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = Path(argv[i + 1])
            if not path.exists():
                raise ValidationError(f"config file not found: {path}")
            return json.loads(path.read_text())
        if arg.startswith("--config="):
            path = Path(arg.split("=", 1)[1])
            if not path.exists():
                raise ValidationError(f"config file not found: {path}")
            return json.loads(path.read_text())
    return {}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def build_parser(defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaintopo",
        description="Chainlet and Betti features from blockchain transactions, "
        "with a sliding-window price backtest.",
    )
    parser.add_argument("--config", help="JSON file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def d(key, fallback):
        return defaults.get(key, fallback)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p_synth.add_argument("--days", type=int, default=d("days", 365))
    p_synth.add_argument("--txs-per-day", type=int, default=d("txs_per_day", 50))
    p_synth.add_argument(
        "--price-model", choices=ingest.PRICE_MODELS, default=d("price_model", "random-walk")
    )
    p_synth.add_argument("--seed", type=int, default=d("seed", 0))
    p_synth.add_argument("--out-dir", required="out_dir" not in defaults,
                         default=d("out_dir", None))

    p_feat = sub.add_parser("features", help="write per-day feature CSVs")
    _add_data_flags(p_feat, d)
    _add_feature_flags(p_feat, d)
    p_feat.add_argument("--kind", choices=ft.FEATURE_KINDS, default=d("kind", "betti"))
    p_feat.add_argument("--out", required="out" not in defaults, default=d("out", None))

    p_back = sub.add_parser("backtest", help="run sliding-window backtests")
    _add_data_flags(p_back, d)
    _add_feature_flags(p_back, d)
    p_back.add_argument("--kinds", default=d("kinds", "baseline,betti"),
                        help="comma-separated feature kinds (baseline always added)")
    p_back.add_argument("--regressor", choices=("enet", "rf"), default=d("regressor", "enet"))
    p_back.add_argument("--w", type=_int_list, default=d("w", [3]))
    p_back.add_argument("--h", type=_int_list, default=d("h", [1]))
    p_back.add_argument("--l", type=_int_list, default=d("l", [100]))
    p_back.add_argument("--d2", default=d("d2", "full"),
                        help="comma list of PCA dimensions, or 'full' for none")
    p_back.add_argument("--l1", type=float, default=d("l1", 0.01))
    p_back.add_argument("--l2", type=float, default=d("l2", 0.01))
    p_back.add_argument("--n-trees", type=int, default=d("n_trees", 100))
    p_back.add_argument("--eval-start", default=d("eval_start", None))
    p_back.add_argument("--eval-end", default=d("eval_end", None))
    p_back.add_argument("--seed", type=int, default=d("seed", 0))
    p_back.add_argument("--jobs", type=int, default=d("jobs", 1))
    p_back.add_argument("--out-dir", required="out_dir" not in defaults,
                        default=d("out_dir", None))

    p_rep = sub.add_parser("report", help="summarize gains from backtest reports")
    p_rep.add_argument("--in-dir", required="in_dir" not in defaults,
                       default=d("in_dir", None))
    p_rep.add_argument("--out", default=d("report_out", None))
    return parser


def _add_data_flags(p, d):
    p.add_argument("--transactions", default=d("transactions", None))
    p.add_argument("--prices", default=d("prices", None))


def _add_feature_flags(p, d):
    p.add_argument("--n", type=int, default=d("n", 20), help="chainlet matrix dimension")
    p.add_argument("--q", type=int, default=d("q", tda.DEFAULT_Q))
    p.add_argument("--s", type=int, default=d("s", tda.DEFAULT_NUM_SCALES),
                   help="number of Betti filtration scales")
    p.add_argument("--deriv-order", type=int, default=d("deriv_order", 1))
    p.add_argument("--fl-scales-btc", default=d("fl_scales_btc",
                   ",".join(str(x) for x in DEFAULT_SCALES_BTC)))


def _load_series(args) -> ingest.DailySeries:
    if not args.transactions or not args.prices:
        raise ValidationError("--transactions and --prices are required")
    for path in (args.transactions, args.prices):
        if not Path(path).exists():
            raise ValidationError(f"input file not found: {path}")
    txs = ingest.parse_transactions(Path(args.transactions).read_text())
    prices = ingest.parse_prices(Path(args.prices).read_text())
    return ingest.assemble_series(txs, prices)


def _feature_params(args) -> ft.FeatureParams:
    scales = FlScales.from_btc([float(x) for x in args.fl_scales_btc.split(",")])
    return ft.FeatureParams(
        n=args.n, fl_scales=scales, q=args.q, num_scales=args.s,
        derivative_order=args.deriv_order,
    )


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_synth(args) -> int:
    series = ingest.generate_synthetic(
        args.days, args.txs_per_day, args.price_model, args.seed
    )
    out = Path(args.out_dir)
    records = [tx for day_txs in series.transactions for tx in day_txs]
    points = [ingest.PricePoint(d, p) for d, p in zip(series.days, series.prices)]
    _write(out / "transactions.csv", ingest.serialize_transactions(records))
    _write(out / "prices.csv", ingest.serialize_prices(points))
    config = {
        "command": "synth", "days": args.days, "txs_per_day": args.txs_per_day,
        "price_model": args.price_model, "seed": args.seed,
    }
    _write(out / "synth.config.json", json.dumps(config, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out / 'transactions.csv'} and {out / 'prices.csv'}")
    return EXIT_OK


def cmd_features(args) -> int:
    series = _load_series(args)
    params = _feature_params(args)
    table = ft.feature_table(series, args.kind, params)
    out = Path(args.out)
    _write(out, table.to_csv())
    config = {
        "command": "features", "kind": args.kind, "n": args.n, "q": args.q,
        "s": args.s, "deriv_order": args.deriv_order,
        "fl_scales_btc": args.fl_scales_btc,
        "transactions": args.transactions, "prices": args.prices,
    }
    _write(out.with_suffix(out.suffix + ".config.json"),
           json.dumps(config, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out} ({table.values.shape[0]} days x {table.values.shape[1]} features)")
    return EXIT_OK


def _parse_d2(text) -> list[int | None]:
    if text in ("full", "", None):
        return [None]
    return [None if x == "full" else int(x) for x in str(text).split(",")]


def cmd_backtest(args) -> int:
    series = _load_series(args)
    params = _feature_params(args)
    kinds = [k for k in args.kinds.split(",") if k]
    for k in kinds:
        if k not in ft.FEATURE_KINDS:
            raise ValidationError(f"unknown feature kind {k!r}")
    if "baseline" not in kinds:
        kinds = ["baseline"] + kinds

    series_by_kind = {}
    for kind in kinds:
        table = ft.feature_table(series, kind, params)
        series_by_kind[kind] = bt.PredictionSeries(
            days=table.days, features=table.values, prices=series.price_array()
        )

    if args.regressor == "enet":
        spec = RegressorSpec("enet", {"l1_penalty": args.l1, "l2_penalty": args.l2}, args.seed)
    else:
        spec = RegressorSpec("rf", {"n_trees": args.n_trees}, args.seed)

    eval_start = dt.date.fromisoformat(args.eval_start) if args.eval_start else None
    eval_end = dt.date.fromisoformat(args.eval_end) if args.eval_end else None
    configs = []
    for w in args.w:
        for h in args.h:
            for l in args.l:
                for d2 in _parse_d2(args.d2):
                    for kind in kinds:
                        # baseline models keep full dimension (their inputs are few)
                        cell_d2 = None if kind == "baseline" else d2
                        configs.append(bt.BacktestConfig(
                            feature_kind=kind, regressor=spec, w=w, h=h, l=l,
                            d2=cell_d2, eval_start=eval_start, eval_end=eval_end,
                            seed=args.seed,
                        ))
    reports = bt.grid_search(series_by_kind, configs, jobs=args.jobs)

    # attach gain vs the baseline-feature report of the same (w, h, l)
    baseline_rmse = {
        (r.config["w"], r.config["h"], r.config["l"]): r.rmse
        for r in reports
        if r.config["feature_kind"] == "baseline"
    }
    out = Path(args.out_dir)
    summary_rows = []
    for report in reports:
        c = report.config
        base = baseline_rmse.get((c["w"], c["h"], c["l"]))
        g = bt.gain(report.rmse, base) if base and base > 0 else None
        report = bt.BacktestReport(
            config=report.config, days=report.days, predicted=report.predicted,
            actual=report.actual, rmse=report.rmse, gain_vs_baseline=g,
        )
        stem = (f"report_{c['feature_kind']}_{spec.kind}_w{c['w']}_h{c['h']}"
                f"_l{c['l']}_d2{c['d2'] if c['d2'] is not None else 'full'}")
        _write(out / f"{stem}.json", report.to_json())
        _write(out / f"{stem}.csv", report.rows_csv())
        summary_rows.append((c["feature_kind"], spec.kind, c["w"], c["h"], c["l"],
                             c["d2"], report.rmse, g))

    lines = ["kind,regressor,w,h,l,d2,rmse,gain_vs_baseline"]
    for row in summary_rows:
        d2_txt = "full" if row[5] is None else row[5]
        g_txt = "" if row[7] is None else repr(row[7])
        lines.append(f"{row[0]},{row[1]},{row[2]},{row[3]},{row[4]},{d2_txt},"
                     f"{row[6]!r},{g_txt}")
    _write(out / "summary.csv", "\n".join(lines) + "\n")
    print(f"wrote {len(reports)} reports and {out / 'summary.csv'}")
    return EXIT_OK


def cmd_report(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.exists():
        raise ValidationError(f"input directory not found: {in_dir}")
    reports = []
    for path in sorted(in_dir.glob("report_*.json")):
        payload = json.loads(path.read_text())
        c = payload["config"]
        reports.append((c["feature_kind"], c["w"], c["h"], c["l"],
                        payload["rmse"], payload.get("gain_vs_baseline")))
    if not reports:
        raise ValidationError(f"no report_*.json files in {in_dir}")
    reports.sort()
    lines = ["kind,w,h,l,rmse,gain_vs_baseline"]
    for kind, w, h, l, r, g in reports:
        g_txt = "" if g is None else repr(g)
        lines.append(f"{kind},{w},{h},{l},{r!r},{g_txt}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(Path(args.out), text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "backtest": cmd_backtest,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        defaults = _load_config_defaults(argv)
        parser = build_parser(defaults)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
