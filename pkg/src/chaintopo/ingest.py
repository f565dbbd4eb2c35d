"""Parsing of normalized transaction/price CSVs and synthetic data generation.

Canonical file formats (UTF-8, ``\\n`` line endings):

* transactions: ``date,tx_id,input_count,output_count,amount_satoshi``
* prices: ``date,price_usd``

Dates are ISO-8601 ``YYYY-MM-DD``; amounts are integer satoshis.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TX_HEADER = ("date", "tx_id", "input_count", "output_count", "amount_satoshi")
PRICE_HEADER = ("date", "price_usd")

SATOSHI_PER_BTC = 10**8

PRICE_MODELS = ("linear", "random-walk", "feature-linked")


class ParseError(ValueError):
    """Malformed input row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ValueError):
    """Well-formed input that violates a domain invariant."""


@dataclass(frozen=True)
class TransactionRecord:
    day: dt.date
    tx_id: str
    input_count: int
    output_count: int
    amount: int  # satoshi, sum of input amounts

    def __post_init__(self):
        if self.input_count < 1 or self.output_count < 1:
            raise ValidationError(
                f"transaction {self.tx_id}: input/output counts must be >= 1, "
                f"got ({self.input_count}, {self.output_count})"
            )
        if self.amount < 0:
            raise ValidationError(f"transaction {self.tx_id}: negative amount {self.amount}")


@dataclass(frozen=True)
class PricePoint:
    day: dt.date
    price: float

    def __post_init__(self):
        if self.price < 0:
            raise ValidationError(f"negative price {self.price} on {self.day}")


@dataclass(frozen=True)
class DailySeries:
    """Gap-free daily series: one price per day, transactions grouped by day."""

    days: tuple[dt.date, ...]
    transactions: tuple[tuple[TransactionRecord, ...], ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.days) == len(self.transactions) == len(self.prices)):
            raise ValidationError("days, transactions and prices must have equal length")
        for a, b in zip(self.days, self.days[1:]):
            if (b - a).days != 1:
                raise ValidationError(f"gap or disorder between {a} and {b}")

    def __len__(self) -> int:
        return len(self.days)

    def tx_counts(self) -> np.ndarray:
        return np.array([len(txs) for txs in self.transactions], dtype=np.int64)

    def price_array(self) -> np.ndarray:
        return np.asarray(self.prices, dtype=np.float64)


def _parse_date(text: str, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise ParseError(line, f"bad date {text!r}") from exc


def parse_transactions(stream: str | io.TextIOBase) -> list[TransactionRecord]:
    """Parse the transactions CSV; returns records sorted by date."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "missing header") from None
    if tuple(header) != TX_HEADER:
        raise ParseError(1, f"expected header {','.join(TX_HEADER)}, got {','.join(header)}")
    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(line, f"expected 5 fields, got {len(row)}")
        day = _parse_date(row[0], line)
        try:
            n_in, n_out, amount = int(row[2]), int(row[3]), int(row[4])
        except ValueError as exc:
            raise ParseError(line, f"bad integer field in {row!r}") from exc
        records.append(TransactionRecord(day, row[1], n_in, n_out, amount))
    records.sort(key=lambda r: r.day)
    return records


def parse_prices(stream: str | io.TextIOBase) -> list[PricePoint]:
    """Parse the prices CSV; returns points sorted by date, duplicates rejected."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(1, "missing header") from None
    if tuple(header) != PRICE_HEADER:
        raise ParseError(1, f"expected header {','.join(PRICE_HEADER)}, got {','.join(header)}")
    points = []
    seen: set[dt.date] = set()
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(line, f"expected 2 fields, got {len(row)}")
        day = _parse_date(row[0], line)
        if day in seen:
            raise ValidationError(f"duplicate price date {day}")
        seen.add(day)
        try:
            price = float(row[1])
        except ValueError as exc:
            raise ParseError(line, f"bad price field {row[1]!r}") from exc
        points.append(PricePoint(day, price))
    points.sort(key=lambda p: p.day)
    return points


def serialize_transactions(records: Iterable[TransactionRecord]) -> str:
    lines = [",".join(TX_HEADER)]
    for r in records:
        lines.append(f"{r.day.isoformat()},{r.tx_id},{r.input_count},{r.output_count},{r.amount}")
    return "\n".join(lines) + "\n"


def serialize_prices(points: Iterable[PricePoint]) -> str:
    lines = [",".join(PRICE_HEADER)]
    for p in points:
        lines.append(f"{p.day.isoformat()},{p.price!r}")
    return "\n".join(lines) + "\n"


def assemble_series(
    txs: Sequence[TransactionRecord], prices: Sequence[PricePoint]
) -> DailySeries:
    """Group transactions by day against the price calendar.

    The price calendar defines the day range; every transaction day must
    have a price. Days with a price but no transactions yield empty windows.
    """
    by_day: dict[dt.date, list[TransactionRecord]] = {}
    for tx in txs:
        by_day.setdefault(tx.day, []).append(tx)
    price_days = {p.day: p.price for p in prices}
    for day in by_day:
        if day not in price_days:
            raise ValidationError(f"no price for transaction day {day}")
    days = tuple(sorted(price_days))
    return DailySeries(
        days=days,
        transactions=tuple(tuple(by_day.get(d, ())) for d in days),
        prices=tuple(price_days[d] for d in days),
    )


def _synthetic_day_count(base: int, day_index: int, model: str) -> int:
    if model == "feature-linked":
        # short deterministic cycle: price becomes an exact linear function of
        # short-lag history, so zero-penalty linear fits can recover it exactly
        step = max(1, base // 3)
        return base + (day_index % 3) * step
    return base


def generate_synthetic(
    n_days: int,
    txs_per_day: int,
    price_model: str,
    seed: int,
    start: dt.date = dt.date(2017, 1, 1),
) -> DailySeries:
    """Seeded synthetic daily series for testing.

    ``feature-linked`` makes each day's price an exact affine function of that
    day's total transaction count; ``linear`` is a deterministic trend;
    ``random-walk`` is a geometric walk.
    """
    if n_days < 1:
        raise ValidationError(f"n_days must be >= 1, got {n_days}")
    if txs_per_day < 1:
        raise ValidationError(f"txs_per_day must be >= 1, got {txs_per_day}")
    if price_model not in PRICE_MODELS:
        raise ValidationError(f"unknown price model {price_model!r}")
    rng = np.random.default_rng(seed)
    days = tuple(start + dt.timedelta(days=i) for i in range(n_days))
    transactions = []
    counts = []
    for i, day in enumerate(days):
        count = _synthetic_day_count(txs_per_day, i, price_model)
        counts.append(count)
        day_txs = []
        for j in range(count):
            n_in = 1 + int(rng.geometric(0.45))
            n_out = 1 + int(rng.geometric(0.45))
            amount = int(rng.lognormal(mean=17.5, sigma=1.6))
            day_txs.append(TransactionRecord(day, f"s{i:04d}_{j:05d}", n_in, n_out, amount))
        transactions.append(tuple(day_txs))

    if price_model == "linear":
        prices = tuple(1000.0 + 5.0 * i for i in range(n_days))
    elif price_model == "random-walk":
        steps = rng.normal(0.0, 0.02, size=n_days)
        prices = tuple(float(p) for p in 1000.0 * np.exp(np.cumsum(steps)))
    else:  # feature-linked
        prices = tuple(100.0 + 0.5 * c for c in counts)
    return DailySeries(days=days, transactions=tuple(transactions), prices=prices)
