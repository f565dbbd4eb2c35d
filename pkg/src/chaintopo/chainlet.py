"""Classification of transactions into chainlet cells C(i -> o) and
per-day occurrence/amount matrices."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from chaintopo.ingest import TransactionRecord, ValidationError

DEFAULT_DIM = 20


@dataclass(frozen=True, order=True)
class ChainletKey:
    """Cell coordinates (1-based): inputs x outputs, clamped into [1, N]."""

    inputs: int
    outputs: int


@dataclass(frozen=True)
class WindowSnapshot:
    """One day's chainlet census.

    ``occurrence[i-1, o-1]`` counts transactions in cell C(i -> o);
    ``amount`` holds satoshi sums; ``per_cell_amounts`` keeps the individual
    transaction amounts each cell aggregates (consumed by the quantile
    distance downstream).
    """

    day: dt.date
    dim: int
    occurrence: np.ndarray  # (dim, dim) int64
    amount: np.ndarray  # (dim, dim) int64, satoshi
    per_cell_amounts: Mapping[ChainletKey, tuple[int, ...]] = field(default_factory=dict)

    @property
    def total_tx(self) -> int:
        return int(self.occurrence.sum())

    def active_cells(self) -> list[ChainletKey]:
        """Cells with at least one transaction, in (inputs, outputs) order."""
        return sorted(self.per_cell_amounts)

    def to_json(self) -> str:
        cells = [
            [k.inputs, k.outputs, int(self.occurrence[k.inputs - 1, k.outputs - 1]),
             int(self.amount[k.inputs - 1, k.outputs - 1])]
            for k in self.active_cells()
        ]
        return json.dumps(
            {"day": self.day.isoformat(), "dim": self.dim, "cells": cells},
            separators=(",", ":"),
        )


def classify(tx: TransactionRecord, n: int = DEFAULT_DIM) -> ChainletKey:
    """Map a transaction to its cell; counts beyond n clamp into row/column n."""
    if n < 1:
        raise ValidationError(f"matrix dimension must be >= 1, got {n}")
    return ChainletKey(min(tx.input_count, n), min(tx.output_count, n))


def build_snapshot(
    txs: Sequence[TransactionRecord], n: int = DEFAULT_DIM, day: dt.date | None = None
) -> WindowSnapshot:
    """Build the occurrence/amount matrices for one day's transactions.

    All transactions must share the same day; ``day`` is only needed for an
    empty list.
    """
    if txs:
        days = {tx.day for tx in txs}
        if len(days) > 1:
            raise ValidationError(f"transactions span multiple days: {sorted(days)}")
        tx_day = next(iter(days))
        if day is not None and day != tx_day:
            raise ValidationError(f"day {day} does not match transactions on {tx_day}")
        day = tx_day
    elif day is None:
        raise ValidationError("empty transaction list requires an explicit day")

    occurrence = np.zeros((n, n), dtype=np.int64)
    amount = np.zeros((n, n), dtype=np.int64)
    cells: dict[ChainletKey, list[int]] = {}
    for tx in txs:
        key = classify(tx, n)
        occurrence[key.inputs - 1, key.outputs - 1] += 1
        amount[key.inputs - 1, key.outputs - 1] += tx.amount
        cells.setdefault(key, []).append(tx.amount)
    return WindowSnapshot(
        day=day,
        dim=n,
        occurrence=occurrence,
        amount=amount,
        per_cell_amounts={k: tuple(v) for k, v in cells.items()},
    )
