"""Amount-thresholded occurrence matrices: one occurrence matrix per scale,
keeping only transactions whose amount meets the threshold."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from chaintopo.chainlet import WindowSnapshot
from chaintopo.ingest import SATOSHI_PER_BTC, ValidationError

# default thresholds, in BTC, converted to satoshi at construction
DEFAULT_SCALES_BTC = (0, 10, 20, 30, 40, 50)


@dataclass(frozen=True)
class FlScales:
    """Strictly increasing amount thresholds, in satoshi."""

    scales: tuple[int, ...]

    def __post_init__(self):
        if len(self.scales) < 1:
            raise ValidationError("need at least one filtration scale")
        if any(s < 0 for s in self.scales):
            raise ValidationError(f"scales must be non-negative: {self.scales}")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValidationError(f"scales must be strictly increasing: {self.scales}")

    @classmethod
    def from_btc(cls, scales_btc: Sequence[float] = DEFAULT_SCALES_BTC) -> "FlScales":
        return cls(tuple(int(round(s * SATOSHI_PER_BTC)) for s in scales_btc))

    def __len__(self) -> int:
        return len(self.scales)


@dataclass(frozen=True)
class FlFeatures:
    day: dt.date
    scales: FlScales
    blocks: tuple[np.ndarray, ...]  # one (N, N) int64 occurrence matrix per scale


def fl_features(snapshot: WindowSnapshot, scales: FlScales) -> FlFeatures:
    """Per-scale occurrence matrices: cell (i, o) of block for threshold eps
    counts the transactions in that cell with amount >= eps."""
    n = snapshot.dim
    blocks = [np.zeros((n, n), dtype=np.int64) for _ in scales.scales]
    for key, amounts in snapshot.per_cell_amounts.items():
        arr = np.asarray(amounts, dtype=np.int64)
        for block, eps in zip(blocks, scales.scales):
            block[key.inputs - 1, key.outputs - 1] = int((arr >= eps).sum())
    return FlFeatures(day=snapshot.day, scales=scales, blocks=tuple(blocks))


def flatten(features: FlFeatures) -> np.ndarray:
    """Block-major, row-major within block; length S * N^2."""
    return np.concatenate([b.reshape(-1) for b in features.blocks]).astype(np.float64)


def flat_names(scales: FlScales, n: int) -> list[str]:
    """Column labels matching :func:`flatten`: ``fl_<eps>_<i>_<o>``."""
    return [
        f"fl_{eps}_{i}_{o}"
        for eps in scales.scales
        for i in range(1, n + 1)
        for o in range(1, n + 1)
    ]
