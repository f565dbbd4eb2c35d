"""Betti-0/Betti-1 curves of the chainlet network.

Each active chainlet cell becomes a node carrying the quantile vector of its
log-transformed transaction amounts; nodes are compared with the Euclidean
distance between quantile vectors, and the Vietoris-Rips filtration (restricted
to vertices and edges) is swept over a shared scale grid. Betti-0 is counted by
union-find, Betti-1 by cycle rank E - V + C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from chaintopo.chainlet import ChainletKey, WindowSnapshot
from chaintopo.ingest import SATOSHI_PER_BTC, ValidationError

DEFAULT_Q = 10
DEFAULT_NUM_SCALES = 100


class EmptyWindowError(ValueError):
    """Raised when a window has no active chainlets."""


@dataclass(frozen=True)
class QuantileVector:
    """q+1 non-decreasing sample quantiles in log-BTC units."""

    values: tuple[float, ...]

    @property
    def q(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class DistanceMatrix:
    nodes: tuple[ChainletKey, ...]
    d: np.ndarray  # (n, n) symmetric, zero diagonal

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class BettiCurves:
    scales: tuple[float, ...]
    beta0: tuple[int, ...]
    beta1: tuple[int, ...]


@dataclass(frozen=True)
class BettiDerivatives:
    order: int
    d_beta0: tuple[int, ...]
    d_beta1: tuple[int, ...]


def log_amount(a: int) -> float:
    """Satoshi amount -> log(1 + BTC), natural log."""
    if a < 0:
        raise ValidationError(f"negative amount {a}")
    return math.log1p(a / SATOSHI_PER_BTC)


def quantiles(sample: Sequence[float], q: int = DEFAULT_Q) -> QuantileVector:
    """Sample q-quantiles Q(0)..Q(q) with linear interpolation; endpoints are
    the sample min/max."""
    if len(sample) == 0:
        raise ValidationError("cannot take quantiles of an empty sample")
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    values = np.quantile(np.asarray(sample, dtype=np.float64), np.linspace(0.0, 1.0, q + 1))
    return QuantileVector(tuple(float(v) for v in values))


def quantile_distance(a: QuantileVector, b: QuantileVector) -> float:
    if a.q != b.q:
        raise ValidationError(f"quantile vectors disagree on q: {a.q} vs {b.q}")
    diff = np.asarray(a.values) - np.asarray(b.values)
    return float(np.sqrt(diff @ diff))


def distance_matrix(snapshot: WindowSnapshot, q: int = DEFAULT_Q) -> DistanceMatrix:
    """One node per active chainlet cell; full pairwise quantile distances."""
    nodes = snapshot.active_cells()
    if not nodes:
        raise EmptyWindowError(f"no active chainlets on {snapshot.day}")
    vectors = np.stack(
        [
            np.asarray(
                quantiles([log_amount(a) for a in snapshot.per_cell_amounts[k]], q).values
            )
            for k in nodes
        ]
    )
    diff = vectors[:, None, :] - vectors[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(nodes=tuple(nodes), d=d)


class UnionFind:
    """Array union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        return True


def betti_curves(dm: DistanceMatrix, scales: Sequence[float]) -> BettiCurves:
    """Sweep the edge filtration once: at scale eps, edges are the pairs with
    distance <= eps; beta0 = components, beta1 = E - V + beta0."""
    scales = tuple(float(s) for s in scales)
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValidationError(f"scales must be strictly increasing: {scales}")
    n = len(dm)
    iu, ju = np.triu_indices(n, k=1)
    dists = dm.d[iu, ju]
    order = np.argsort(dists, kind="stable")
    iu, ju, dists = iu[order], ju[order], dists[order]

    uf = UnionFind(n)
    beta0, beta1 = [], []
    pos = 0
    for eps in scales:
        while pos < len(dists) and dists[pos] <= eps:
            uf.union(int(iu[pos]), int(ju[pos]))
            pos += 1
        b0 = uf.n_components
        beta0.append(b0)
        beta1.append(pos - n + b0)
    return BettiCurves(scales=scales, beta0=tuple(beta0), beta1=tuple(beta1))


def betti_derivative(curve: Sequence[int], order: int = 1) -> tuple[int, ...]:
    """Finite differences across consecutive scales; length shrinks by order."""
    if order < 1:
        raise ValidationError(f"derivative order must be >= 1, got {order}")
    if len(curve) <= order:
        raise ValidationError(f"curve of length {len(curve)} too short for order {order}")
    out = list(curve)
    for _ in range(order):
        out = [b - a for a, b in zip(out, out[1:])]
    return tuple(out)


def build_scale_grid(
    matrices: Sequence[DistanceMatrix], s: int = DEFAULT_NUM_SCALES
) -> tuple[float, ...]:
    """S uniformly spaced scales spanning [min positive distance, max distance]
    over all supplied matrices."""
    if s < 2:
        raise ValidationError(f"need at least 2 scales, got {s}")
    if not matrices:
        raise ValidationError("need at least one distance matrix")
    lo = math.inf
    hi = 0.0
    for dm in matrices:
        n = len(dm)
        if n < 2:
            continue
        iu, ju = np.triu_indices(n, k=1)
        d = dm.d[iu, ju]
        pos = d[d > 0]
        if pos.size:
            lo = min(lo, float(pos.min()))
        hi = max(hi, float(d.max()))
    if not math.isfinite(lo) or hi <= 0.0:
        raise ValidationError("all pairwise distances are zero; cannot build a scale grid")
    if hi <= lo:
        # single distinct positive distance: widen to keep the grid strictly increasing
        hi = lo * (1.0 + 1e-9) + 1e-12
    return tuple(float(x) for x in np.linspace(lo, hi, s))
