import json
from pathlib import Path

import pytest

from chaintopo.cli import EXIT_OK, EXIT_USAGE, main


def run_pipeline(tmp_path: Path, seed=7, days=70) -> Path:
    data = tmp_path / "data"
    out = tmp_path / "out"
    assert main([
        "synth", "--days", str(days), "--txs-per-day", "9",
        "--price-model", "random-walk", "--seed", str(seed),
        "--out-dir", str(data),
    ]) == EXIT_OK
    assert main([
        "backtest",
        "--transactions", str(data / "transactions.csv"),
        "--prices", str(data / "prices.csv"),
        "--kinds", "baseline,betti",
        "--regressor", "enet", "--l1", "0.0", "--l2", "0.0",
        "--w", "3", "--h", "1", "--l", "25",
        "--n", "5", "--s", "8", "--seed", str(seed),
        "--out-dir", str(out),
    ]) == EXIT_OK
    return out


def test_synth_writes_parseable_files(tmp_path):
    data = tmp_path / "d"
    assert main([
        "synth", "--days", "20", "--txs-per-day", "5",
        "--price-model", "linear", "--seed", "1", "--out-dir", str(data),
    ]) == EXIT_OK
    assert (data / "transactions.csv").exists()
    assert (data / "prices.csv").exists()
    assert (data / "synth.config.json").exists()


def test_synth_rejects_zero_days(tmp_path):
    assert main([
        "synth", "--days", "0", "--out-dir", str(tmp_path / "d"),
    ]) == EXIT_USAGE


def test_synth_seeds_differ(tmp_path):
    for seed in (1, 2):
        main(["synth", "--days", "10", "--txs-per-day", "4",
              "--price-model", "random-walk", "--seed", str(seed),
              "--out-dir", str(tmp_path / f"d{seed}")])
    a = (tmp_path / "d1" / "transactions.csv").read_bytes()
    b = (tmp_path / "d2" / "transactions.csv").read_bytes()
    assert a != b


def test_features_layout_and_idempotence(tmp_path):
    data = tmp_path / "d"
    main(["synth", "--days", "15", "--txs-per-day", "8",
          "--price-model", "random-walk", "--seed", "3", "--out-dir", str(data)])
    out = tmp_path / "betti.csv"
    args = [
        "features", "--transactions", str(data / "transactions.csv"),
        "--prices", str(data / "prices.csv"),
        "--kind", "betti", "--n", "5", "--s", "10", "--q", "10",
        "--out", str(out),
    ]
    assert main(args) == EXIT_OK
    first = out.read_bytes()
    header = first.decode().split("\n", 1)[0].split(",")
    assert len(header) == 1 + 2 + 2 * 10  # date, price, total_tx, b0s, b1s
    assert main(args) == EXIT_OK
    assert out.read_bytes() == first


def test_features_missing_input_exits_2(tmp_path, capsys):
    code = main([
        "features", "--transactions", str(tmp_path / "nope.csv"),
        "--prices", str(tmp_path / "nope2.csv"),
        "--kind", "baseline", "--out", str(tmp_path / "x.csv"),
    ])
    assert code == EXIT_USAGE
    assert "nope" in capsys.readouterr().err


def test_backtest_reports_and_gain(tmp_path):
    out = run_pipeline(tmp_path)
    reports = sorted(out.glob("report_*.json"))
    kinds = set()
    for path in reports:
        payload = json.loads(path.read_text())
        kinds.add(payload["config"]["feature_kind"])
        if payload["config"]["feature_kind"] != "baseline":
            assert payload["gain_vs_baseline"] is not None
    assert kinds == {"baseline", "betti"}
    assert (out / "summary.csv").exists()


def test_backtest_invalid_horizon_exits_2(tmp_path):
    data = tmp_path / "d"
    main(["synth", "--days", "30", "--txs-per-day", "5",
          "--price-model", "linear", "--seed", "1", "--out-dir", str(data)])
    code = main([
        "backtest", "--transactions", str(data / "transactions.csv"),
        "--prices", str(data / "prices.csv"), "--h", "0",
        "--out-dir", str(tmp_path / "o"),
    ])
    assert code == EXIT_USAGE


def test_pipeline_byte_identical_for_same_seed(tmp_path):
    out_a = run_pipeline(tmp_path / "a", seed=9)
    out_b = run_pipeline(tmp_path / "b", seed=9)
    files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes()


def test_report_summary(tmp_path, capsys):
    out = run_pipeline(tmp_path)
    summary = tmp_path / "gains.csv"
    assert main(["report", "--in-dir", str(out), "--out", str(summary)]) == EXIT_OK
    lines = summary.read_text().strip().split("\n")
    assert lines[0] == "kind,w,h,l,rmse,gain_vs_baseline"
    assert len(lines) == 3  # baseline + betti


def test_report_empty_dir_exits_2(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", "--in-dir", str(empty)]) == EXIT_USAGE


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "days": 12, "txs_per_day": 4, "price_model": "linear",
        "seed": 5, "out_dir": str(tmp_path / "d"),
    }))
    assert main(["--config", str(cfg), "synth"]) == EXIT_OK
    assert (tmp_path / "d" / "prices.csv").exists()
