"""Per-day feature vectors: baseline (price + transaction count), amount
filtration blocks, and Betti curves with optional derivatives."""

from __future__ import annotations

import datetime as dt
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from chaintopo import tda
from chaintopo.chainlet import WindowSnapshot, build_snapshot
from chaintopo.filtration import FlScales, fl_features, flat_names, flatten
from chaintopo.ingest import DailySeries, ValidationError

FEATURE_KINDS = ("baseline", "fl", "betti", "betti_deriv")


@dataclass(frozen=True)
class FeatureVector:
    day: dt.date
    kind: str
    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValidationError("values and names must have equal length")


@dataclass(frozen=True)
class FeatureParams:
    """Knobs shared by all feature kinds; layout is a pure function of these."""

    n: int = 20
    fl_scales: FlScales = field(default_factory=FlScales.from_btc)
    q: int = tda.DEFAULT_Q
    num_scales: int = tda.DEFAULT_NUM_SCALES
    derivative_order: int = 1


def baseline_features(day: dt.date, price: float, total_tx: int) -> FeatureVector:
    return FeatureVector(
        day=day,
        kind="baseline",
        values=np.array([price, float(total_tx)]),
        names=("price", "total_tx"),
    )


def fl_feature_vector(
    day: dt.date, price: float, snapshot: WindowSnapshot, scales: FlScales
) -> FeatureVector:
    feats = fl_features(snapshot, scales)
    values = np.concatenate([[price, float(snapshot.total_tx)], flatten(feats)])
    names = ("price", "total_tx", *flat_names(scales, snapshot.dim))
    return FeatureVector(day=day, kind="fl", values=values, names=names)


def _betti_names(s: int, order: int | None) -> tuple[str, ...]:
    names = ["price", "total_tx"]
    names += [f"b0_{k}" for k in range(1, s + 1)]
    names += [f"b1_{k}" for k in range(1, s + 1)]
    if order is not None:
        names += [f"db0_{k}" for k in range(1, s - order + 1)]
        names += [f"db1_{k}" for k in range(1, s - order + 1)]
    return tuple(names)


def betti_feature_vector(
    day: dt.date,
    price: float,
    total_tx: int,
    curves: tda.BettiCurves | None,
    with_derivatives: bool = False,
    order: int = 1,
) -> FeatureVector:
    """Assemble [price, total_tx, beta0.., beta1..(, dbeta0.., dbeta1..)].

    ``curves=None`` marks a day with no active chainlets: topology entries are
    zero and a warning is emitted.
    """
    s = None if curves is None else len(curves.scales)
    if curves is None:
        warnings.warn(f"{day}: no active chainlets, topology features set to zero")
    kind = "betti_deriv" if with_derivatives else "betti"
    if curves is not None:
        parts = [np.array([price, float(total_tx)]),
                 np.asarray(curves.beta0, dtype=np.float64),
                 np.asarray(curves.beta1, dtype=np.float64)]
        if with_derivatives:
            parts.append(np.asarray(tda.betti_derivative(curves.beta0, order), dtype=np.float64))
            parts.append(np.asarray(tda.betti_derivative(curves.beta1, order), dtype=np.float64))
        values = np.concatenate(parts)
        names = _betti_names(s, order if with_derivatives else None)
        return FeatureVector(day=day, kind=kind, values=values, names=names)
    raise ValidationError("scale count unknown for an inactive day; use feature_table")


@dataclass(frozen=True)
class FeatureTable:
    """All days of one feature kind, with a stable column layout."""

    kind: str
    days: tuple[dt.date, ...]
    names: tuple[str, ...]
    values: np.ndarray  # (n_days, n_features)

    def to_csv(self) -> str:
        lines = [",".join(("date", *self.names))]
        for day, row in zip(self.days, self.values):
            lines.append(day.isoformat() + "," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def feature_table(
    series: DailySeries, kind: str, params: FeatureParams = FeatureParams()
) -> FeatureTable:
    """Compute the feature matrix for a whole series.

    Betti kinds share one scale grid built from the distance matrices of every
    active day of the series, so curves are comparable across days.
    """
    if kind not in FEATURE_KINDS:
        raise ValidationError(f"unknown feature kind {kind!r}")
    snapshots = [
        build_snapshot(txs, params.n, day=day)
        for day, txs in zip(series.days, series.transactions)
    ]
    rows: list[np.ndarray] = []
    names: tuple[str, ...]

    if kind == "baseline":
        vecs = [
            baseline_features(s.day, p, s.total_tx)
            for s, p in zip(snapshots, series.prices)
        ]
        names = vecs[0].names
        rows = [v.values for v in vecs]
    elif kind == "fl":
        vecs = [
            fl_feature_vector(s.day, p, s, params.fl_scales)
            for s, p in zip(snapshots, series.prices)
        ]
        names = vecs[0].names
        rows = [v.values for v in vecs]
    else:
        with_deriv = kind == "betti_deriv"
        matrices = {
            i: tda.distance_matrix(s, params.q)
            for i, s in enumerate(snapshots)
            if s.per_cell_amounts
        }
        if not matrices:
            raise ValidationError("no day has active chainlets; cannot build Betti features")
        grid = tda.build_scale_grid(list(matrices.values()), params.num_scales)
        s_count = len(grid)
        names = _betti_names(s_count, params.derivative_order if with_deriv else None)
        for i, snap in enumerate(snapshots):
            if i in matrices:
                curves = tda.betti_curves(matrices[i], grid)
                vec = betti_feature_vector(
                    snap.day, series.prices[i], snap.total_tx, curves,
                    with_derivatives=with_deriv, order=params.derivative_order,
                )
                rows.append(vec.values)
            else:
                warnings.warn(f"{snap.day}: no active chainlets, topology features set to zero")
                row = np.zeros(len(names))
                row[0] = series.prices[i]
                rows.append(row)
    return FeatureTable(
        kind=kind, days=series.days, names=names, values=np.stack(rows)
    )
