"""Chainlet and topological features from blockchain transaction streams.

Pipeline: ingest normalized transaction/price CSVs -> per-day chainlet
matrices -> amount-filtration and Betti-curve features -> sliding-window
price backtest with elastic net / random forest regressors.
"""

from chaintopo.ingest import (
    DailySeries,
    ParseError,
    PricePoint,
    TransactionRecord,
    ValidationError,
    assemble_series,
    generate_synthetic,
    parse_prices,
    parse_transactions,
)
from chaintopo.chainlet import ChainletKey, WindowSnapshot, build_snapshot, classify

__all__ = [
    "ChainletKey",
    "DailySeries",
    "ParseError",
    "PricePoint",
    "TransactionRecord",
    "ValidationError",
    "WindowSnapshot",
    "assemble_series",
    "build_snapshot",
    "classify",
    "generate_synthetic",
    "parse_prices",
    "parse_transactions",
]
