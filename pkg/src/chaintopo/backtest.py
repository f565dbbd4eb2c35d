"""Rolling sliding-window backtest: one model refit per predicted day.

For a prediction of day t at horizon h, only observations with index <= t - h
are consumed. Each training pair stacks w consecutive feature vectors and the
w matching lagged prices; the training set is drawn from the l most recent
observable days.
"""

from __future__ import annotations

import datetime as dt
import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from chaintopo.ingest import ValidationError
from chaintopo.models import (
    FittedModel,
    PcaProjection,
    RegressorSpec,
    fit,
    pca_fit,
    pca_transform,
    predict,
)


@dataclass(frozen=True)
class PredictionSeries:
    """Aligned per-day feature rows and prices."""

    days: tuple[dt.date, ...]
    features: np.ndarray  # (n_days, d)
    prices: np.ndarray  # (n_days,)

    def __len__(self) -> int:
        return len(self.days)


@dataclass(frozen=True)
class BacktestConfig:
    feature_kind: str
    regressor: RegressorSpec
    w: int = 3
    h: int = 1
    l: int = 100
    d2: int | None = None  # None: no dimensionality reduction
    eval_start: dt.date | None = None  # None: earliest feasible
    eval_end: dt.date | None = None
    seed: int = 0

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValidationError(f"w and h must be >= 1, got w={self.w}, h={self.h}")
        if self.l < self.w + self.h + 1:
            raise ValidationError(f"l={self.l} must be >= w + h + 1 = {self.w + self.h + 1}")
        if self.d2 is not None and self.d2 < 1:
            raise ValidationError(f"d2 must be >= 1, got {self.d2}")

    def echo(self) -> dict:
        return {
            "feature_kind": self.feature_kind,
            "regressor": {
                "kind": self.regressor.kind,
                "hyperparameters": dict(self.regressor.hyperparameters),
                "seed": self.regressor.seed,
            },
            "w": self.w,
            "h": self.h,
            "l": self.l,
            "d2": self.d2,
            "eval_start": None if self.eval_start is None else self.eval_start.isoformat(),
            "eval_end": None if self.eval_end is None else self.eval_end.isoformat(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BacktestReport:
    config: dict
    days: tuple[dt.date, ...]
    predicted: np.ndarray
    actual: np.ndarray
    rmse: float
    gain_vs_baseline: float | None = None
    max_index_used: tuple[int, ...] = ()  # instrumentation: per-day data reach

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "rows": [
                {"date": d.isoformat(), "predicted": float(p), "actual": float(a)}
                for d, p, a in zip(self.days, self.predicted, self.actual)
            ],
            "rmse": self.rmse,
            "gain_vs_baseline": self.gain_vs_baseline,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"

    def rows_csv(self) -> str:
        lines = ["date,predicted,actual"]
        for d, p, a in zip(self.days, self.predicted, self.actual):
            lines.append(f"{d.isoformat()},{float(p)!r},{float(a)!r}")
        return "\n".join(lines) + "\n"


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise ValidationError("predicted and actual must be nonempty and equal-length")
    return float(np.sqrt(np.mean((predicted - actual) ** 2)))


def gain(rmse_m: float, rmse_m0: float) -> float:
    """Percentage RMSE reduction of a model relative to a baseline."""
    if rmse_m0 <= 0:
        raise ValidationError("baseline RMSE must be positive")
    return 100.0 * (1.0 - rmse_m / rmse_m0)


def build_training_pair(
    features: np.ndarray,
    prices: np.ndarray,
    t: int,
    w: int,
    h: int,
    index_log: list[int] | None = None,
) -> tuple[np.ndarray, float]:
    """Stack features and lagged prices for target day t; the most recent index
    consumed is t - h."""
    lo = t - w - h + 1
    if lo < 0:
        raise ValidationError(f"insufficient history for t={t}, w={w}, h={h}")
    idx = list(range(lo, t - h + 1))
    if index_log is not None:
        index_log.extend(idx)
    xhat = np.concatenate([features[idx].reshape(-1), prices[idx]])
    return xhat, float(prices[t])


def _training_targets(t: int, w: int, h: int, l: int) -> range:
    # training window: the l most recent observable indices [t-h-l+1, t-h];
    # targets with a full feature block inside the window
    start = t - h - l + 1
    if start < 0:
        raise ValidationError(f"fewer than l={l} observable days before t={t} at horizon {h}")
    return range(start + w + h - 1, t - h + 1)


def fit_for_day(
    series: PredictionSeries,
    t: int,
    config: BacktestConfig,
    index_log: list[int] | None = None,
) -> tuple[FittedModel, PcaProjection | None]:
    targets = _training_targets(t, config.w, config.h, config.l)
    if len(targets) < 2:
        raise ValidationError(f"only {len(targets)} training pairs for t={t}; need >= 2")
    pairs = [
        build_training_pair(series.features, series.prices, tp, config.w, config.h, index_log)
        for tp in targets
    ]
    X = np.stack([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    projection = None
    if config.d2 is not None:
        projection = pca_fit(X, config.d2)
        X = pca_transform(projection, X)
    spec = replace(config.regressor, seed=_derived_seed(config, t))
    return fit(spec, X, y), projection


def _derived_seed(config: BacktestConfig, t: int) -> int:
    cell = zlib.crc32(json.dumps(config.echo(), sort_keys=True).encode())
    return int(np.random.SeedSequence([config.seed, cell, t]).generate_state(1)[0])


def _eval_indices(series: PredictionSeries, config: BacktestConfig) -> list[int]:
    first_feasible = config.l + config.h - 1
    if config.eval_start is None:
        lo = first_feasible
    else:
        if config.eval_start not in series.days:
            raise ValidationError(f"series does not cover {config.eval_start}")
        lo = series.days.index(config.eval_start)
    if config.eval_end is None:
        hi = len(series) - 1
    else:
        if config.eval_end not in series.days:
            raise ValidationError(f"series does not cover {config.eval_end}")
        hi = series.days.index(config.eval_end)
    if lo > hi:
        raise ValidationError("empty evaluation span")
    if lo < first_feasible:
        raise ValidationError(
            f"insufficient lead-in before {series.days[lo]}: "
            f"need {first_feasible} days of history"
        )
    return list(range(lo, hi + 1))


def run_backtest(
    config: BacktestConfig, series: PredictionSeries, instrument: bool = False
) -> BacktestReport:
    """One prediction per evaluation day, refitting the model each day."""
    indices = _eval_indices(series, config)
    predicted = np.empty(len(indices))
    max_used = []
    for k, t in enumerate(indices):
        index_log: list[int] | None = [] if instrument else None
        model, projection = fit_for_day(series, t, config, index_log)
        x, _ = build_training_pair(
            series.features, series.prices, t, config.w, config.h, index_log
        )
        if projection is not None:
            x = pca_transform(projection, x)
        predicted[k] = predict(model, x)
        if instrument:
            reach = max(index_log)
            assert reach == t - config.h, f"lookahead: used index {reach} for day {t}"
            max_used.append(reach)
    actual = series.prices[np.asarray(indices)]
    return BacktestReport(
        config=config.echo(),
        days=tuple(series.days[t] for t in indices),
        predicted=predicted,
        actual=actual,
        rmse=rmse(predicted, actual),
        max_index_used=tuple(max_used),
    )


def persistence_report(config: BacktestConfig, series: PredictionSeries) -> BacktestReport:
    """Price-only naive baseline: predict the last observable price y_{t-h}."""
    indices = _eval_indices(series, config)
    predicted = series.prices[np.asarray(indices) - config.h]
    actual = series.prices[np.asarray(indices)]
    echo = config.echo()
    echo["feature_kind"] = "persistence"
    echo["regressor"] = None
    return BacktestReport(
        config=echo,
        days=tuple(series.days[t] for t in indices),
        predicted=predicted,
        actual=actual,
        rmse=rmse(predicted, actual),
    )


def _rank_key(report: BacktestReport):
    c = report.config
    d2 = c["d2"]
    return (
        report.rmse,
        c["w"],
        c["h"],
        c["l"],
        (d2 is None, d2 or 0),
        c["feature_kind"],
    )


def grid_search(
    series_by_kind: dict[str, PredictionSeries],
    configs: Iterable[BacktestConfig],
    jobs: int = 1,
) -> list[BacktestReport]:
    """Evaluate every config against its feature kind's series; rank by RMSE
    ascending with a lexicographic (w, h, l, d2, kind) tie-break."""
    configs = list(configs)
    if not configs:
        raise ValidationError("empty grid")
    for c in configs:
        if c.feature_kind not in series_by_kind:
            raise ValidationError(f"no series for feature kind {c.feature_kind!r}")

    def run(c: BacktestConfig) -> BacktestReport:
        return run_backtest(c, series_by_kind[c.feature_kind])

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run, configs))
    else:
        reports = [run(c) for c in configs]
    return sorted(reports, key=_rank_key)
