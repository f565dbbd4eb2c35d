"""Independent reference implementations used only to check the library."""

import numpy as np


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over Z/2 by Gaussian elimination."""
    m = (np.asarray(mat, dtype=np.int64) % 2).copy()
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivot = None
        for row in range(rank, rows):
            if m[row, col]:
                pivot = row
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for row in range(rows):
            if row != rank and m[row, col]:
                m[row] ^= m[rank]
        rank += 1
    return rank


def betti_via_boundary(dist: np.ndarray, eps: float) -> tuple[int, int]:
    """Betti-0/1 of the one-dimensional complex at scale eps via the rank of
    the Z/2 vertex-edge boundary matrix."""
    n = dist.shape[0]
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if dist[i, j] <= eps]
    if not edges:
        return n, 0
    boundary = np.zeros((n, len(edges)), dtype=np.int64)
    for k, (i, j) in enumerate(edges):
        boundary[i, k] = 1
        boundary[j, k] = 1
    r = gf2_rank(boundary)
    return n - r, len(edges) - r


def quantile_oracle(sample, q: int) -> list[float]:
    """Linear-interpolation sample quantiles Q(0)..Q(q), written from the
    order-statistics definition."""
    xs = sorted(float(v) for v in sample)
    n = len(xs)
    out = []
    for k in range(q + 1):
        pos = k / q * (n - 1)
        lo = int(np.floor(pos))
        hi = int(np.ceil(pos))
        frac = pos - lo
        out.append(xs[lo] * (1 - frac) + xs[hi] * frac)
    return out


def ols_fit(X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Least squares with intercept via the pseudoinverse."""
    A = np.column_stack([np.ones(len(y)), X])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), coef[1:]


def random_distance_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random symmetric zero-diagonal matrix from points in R^3 (a metric)."""
    pts = rng.normal(size=(n, 3))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return d
