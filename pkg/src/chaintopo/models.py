"""Regressors and dimensionality reduction for the backtest.

Elastic net is solved by cyclic coordinate descent on internally standardized
columns; random forest wraps scikit-learn behind the same fit/predict
contract; PCA is a thin SVD with a deterministic sign convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from chaintopo.ingest import ValidationError

# hyperparameter grids for tuning
ENET_L1_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0, 10.0)
ENET_L2_GRID = (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0)
RF_TREES_GRID = (10, 50, 100, 200, 300, 400, 500, 1000)

CD_TOL = 1e-7
CD_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class RegressorSpec:
    kind: str  # "enet" or "rf"
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("enet", "rf"):
            raise ValidationError(f"unknown regressor kind {self.kind!r}")


@dataclass(frozen=True)
class FittedModel:
    kind: str
    params: Any
    column_mean: np.ndarray
    column_std: np.ndarray
    kept_columns: np.ndarray  # indices of non-constant columns used in the fit
    n_features: int
    objective_path: tuple[float, ...] = ()


def _soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def _enet_objective(r: np.ndarray, beta: np.ndarray, l1: float, l2: float) -> float:
    n = len(r)
    return float(r @ r / (2 * n) + l1 * np.abs(beta).sum() + l2 / 2 * beta @ beta)


def enet_fit(
    X: np.ndarray,
    y: np.ndarray,
    l1: float = 0.0,
    l2: float = 0.0,
    tol: float = CD_TOL,
    max_sweeps: int = CD_MAX_SWEEPS,
) -> FittedModel:
    """Cyclic coordinate descent for
    (1/2n)||y - b0 - Xb||^2 + l1*||b||_1 + (l2/2)*||b||^2,
    intercept unpenalized, columns standardized internally."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("empty design matrix")
    if X.shape[0] != len(y):
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)}")
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 rows to fit")
    n, d_all = X.shape

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    kept = np.flatnonzero(std > 0.0)
    if len(kept) < d_all:
        warnings.warn(f"dropping {d_all - len(kept)} constant column(s) from the fit")
    Xs = (X[:, kept] - mean[kept]) / std[kept]
    d = len(kept)

    # solve on a standardized response so the stopping tolerance is scale-free;
    # with l1 rescaled by 1/sigma_y the optimum maps back to the stated
    # objective exactly (the objective itself only scales by sigma_y^2)
    y_mean = float(y.mean())
    y_scale = float(y.std()) or 1.0
    ys = (y - y_mean) / y_scale
    l1s = l1 / y_scale

    beta = np.zeros(d)
    r = ys.copy()  # residual ys - Xs @ beta (intercept is 0 in centered units)
    objective_path = [_enet_objective(r, beta, l1s, l2)]
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(d):
            old = beta[j]
            # column variance is 1 after standardization, so z_j = 1
            rho = float(Xs[:, j] @ r) / n + old
            new = _soft_threshold(rho, l1s) / (1.0 + l2)
            if new != old:
                r -= Xs[:, j] * (new - old)
                beta[j] = new
                max_delta = max(max_delta, abs(new - old))
        obj = _enet_objective(r, beta, l1s, l2)
        prev = objective_path[-1]
        if obj > prev + 1e-10 * (1.0 + abs(prev)):
            raise AssertionError(f"objective increased across a sweep: {prev} -> {obj}")
        objective_path.append(obj)
        if max_delta < tol:
            break
    return FittedModel(
        kind="enet",
        params=(y_mean, beta * y_scale),
        column_mean=mean,
        column_std=std,
        kept_columns=kept,
        n_features=d_all,
        objective_path=tuple(o * y_scale**2 for o in objective_path),
    )


def rf_fit(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    seed: int = 0,
    max_depth: int | None = None,
    min_leaf: int = 2,
    bootstrap: bool = True,
) -> FittedModel:
    """Forest of CART regression trees on bootstrap resamples with feature
    subsampling (ceil(d/3) features per split); mean of tree outputs."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("empty design matrix")
    if X.shape[0] != len(y):
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)}")
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 rows to fit")
    if n_trees < 1:
        raise ValidationError(f"n_trees must be >= 1, got {n_trees}")
    d = X.shape[1]
    forest = RandomForestRegressor(
        n_estimators=n_trees,
        max_depth=max_depth,
        min_samples_leaf=min_leaf,
        max_features=max(1, -(-d // 3)),
        bootstrap=bootstrap,
        random_state=seed % (2**32),
        n_jobs=1,
    )
    forest.fit(X, y)
    return FittedModel(
        kind="rf",
        params=forest,
        column_mean=np.zeros(d),
        column_std=np.ones(d),
        kept_columns=np.arange(d),
        n_features=d,
    )


def fit(spec: RegressorSpec, X: np.ndarray, y: np.ndarray) -> FittedModel:
    hp = dict(spec.hyperparameters)
    if spec.kind == "enet":
        return enet_fit(X, y, l1=hp.get("l1_penalty", 0.01), l2=hp.get("l2_penalty", 0.01))
    return rf_fit(
        X,
        y,
        n_trees=hp.get("n_trees", 100),
        seed=spec.seed,
        max_depth=hp.get("max_depth"),
        min_leaf=hp.get("min_leaf", 2),
        bootstrap=hp.get("bootstrap", True),
    )


def predict(model: FittedModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.n_features:
        raise ValidationError(
            f"feature dimension {X.shape[1]} does not match fit-time {model.n_features}"
        )
    if model.kind == "enet":
        b0, beta = model.params
        kept = model.kept_columns
        Xs = (X[:, kept] - model.column_mean[kept]) / model.column_std[kept]
        out = b0 + Xs @ beta
    else:
        out = model.params.predict(X)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class PcaProjection:
    d2: int
    mean: np.ndarray
    components: np.ndarray  # (d2, d) orthonormal rows
    explained_variance_share: np.ndarray


def pca_fit(X: np.ndarray, d2: int) -> PcaProjection:
    """Projection onto the top-d2 variance directions after centering; the
    largest-magnitude entry of each direction is made positive."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("empty matrix")
    n, d = X.shape
    if d2 < 1 or d2 > min(n, d):
        raise ValidationError(f"d2={d2} outside [1, min(n={n}, d={d})]")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    components = vt[:d2].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = float((s**2).sum())
    shares = (s[:d2] ** 2 / total) if total > 0 else np.zeros(d2)
    return PcaProjection(d2=d2, mean=mean, components=components, explained_variance_share=shares)


def pca_transform(p: PcaProjection, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    out = ((X[None, :] if single else X) - p.mean) @ p.components.T
    return out[0] if single else out
