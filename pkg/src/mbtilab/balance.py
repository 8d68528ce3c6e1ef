"""Class-imbalance treatments: weighting, up/downsampling, SMOTE.

All samplers are pure functions of (X, y, seed); the RNG stream is derived
from the seed with a per-operation label so treatments never share draws.
Labels are binary arrays with 1 the positive class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mbtilab.errors import DegenerateLabelsError, ParameterError
from mbtilab.rng import rng_for

SAMPLER_KINDS = ("none", "class_weights", "upsample", "smote", "downsample")


@dataclass(frozen=True)
class SamplerKind:
    name: str
    k: int = 5  # SMOTE neighbor count; ignored elsewhere

    def __post_init__(self):
        if self.name not in SAMPLER_KINDS:
            raise ParameterError(f"unknown sampler {self.name!r}")
        if self.name == "smote" and self.k < 1:
            raise ParameterError("smote k must be >= 1")


def _as_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ParameterError("X must be (n, m) and y must be (n,)")
    return X, y.astype(np.int64)


def _require_both_classes(y: np.ndarray) -> None:
    if not ((y == 1).any() and (y == 0).any()):
        raise DegenerateLabelsError("both classes must be present")


def class_weights(y) -> tuple[float, float]:
    """(w_pos, w_neg) with w_c = n / (2 n_c): each class gets total mass n/2."""
    y = np.asarray(y).astype(np.int64)
    _require_both_classes(y)
    n = y.shape[0]
    n_pos = int((y == 1).sum())
    n_neg = n - n_pos
    return n / (2.0 * n_pos), n / (2.0 * n_neg)


def weight_vector(y) -> np.ndarray:
    w_pos, w_neg = class_weights(y)
    y = np.asarray(y).astype(np.int64)
    return np.where(y == 1, w_pos, w_neg)


def _minority_majority(y: np.ndarray) -> tuple[int, int]:
    """(minority_class, majority_class); ties treat the positive class as
    minority so balanced input passes through every sampler unchanged."""
    n_pos = int((y == 1).sum())
    n_neg = int(y.shape[0]) - n_pos
    if n_pos <= n_neg:
        return 1, 0
    return 0, 1


def upsample(X, y, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Append with-replacement copies of minority rows until counts equal."""
    X, y = _as_xy(X, y)
    _require_both_classes(y)
    minority, majority = _minority_majority(y)
    minority_idx = np.flatnonzero(y == minority)
    deficit = int((y == majority).sum()) - minority_idx.size
    if deficit == 0:
        return X.copy(), y.copy()
    rng = rng_for(seed, "sampler/upsample")
    picks = rng.integers(0, minority_idx.size, size=deficit)
    extra = minority_idx[picks]
    X_out = np.vstack([X, X[extra]])
    y_out = np.concatenate([y, y[extra]])
    return X_out, y_out


def downsample(X, y, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Keep all minority rows and a without-replacement majority subset.

    Kept rows stay in their original relative order.
    """
    X, y = _as_xy(X, y)
    _require_both_classes(y)
    minority, majority = _minority_majority(y)
    minority_idx = np.flatnonzero(y == minority)
    majority_idx = np.flatnonzero(y == majority)
    if majority_idx.size == minority_idx.size:
        return X.copy(), y.copy()
    rng = rng_for(seed, "sampler/downsample")
    chosen = rng.choice(majority_idx, size=minority_idx.size, replace=False)
    keep = np.sort(np.concatenate([minority_idx, chosen]))
    return X[keep].copy(), y[keep].copy()


def _nearest_neighbors(points: np.ndarray, k: int, chunk: int = 256) -> np.ndarray:
    """Indices of the k nearest rows (Euclidean, self excluded) per row.

    Brute force with chunked distance blocks; ties broken by row index via
    stable argsort, so results are deterministic.
    """
    n = points.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    sq = (points * points).sum(axis=1)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = points[start:stop]
        d2 = sq[start:stop, None] - 2.0 * (block @ points.T) + sq[None, :]
        d2[np.arange(start, stop) - start, np.arange(start, stop)] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")
        out[start:stop] = order[:, :k]
    return out


def smote(X, y, k: int = 5, n_needed: int | None = None, seed: int = 0) -> np.ndarray:
    """Synthetic minority rows x_i + u (x_nn - x_i), u ~ U[0,1].

    Per synthetic row the draws are: base row (uniform over minority rows),
    neighbor choice (uniform over the k nearest), then u. Returns exactly
    n_needed rows (default: the count that balances the classes).
    """
    X, y = _as_xy(X, y)
    _require_both_classes(y)
    minority, majority = _minority_majority(y)
    minority_rows = X[y == minority]
    n_min = minority_rows.shape[0]
    if n_min < 2:
        raise ParameterError("smote needs at least 2 minority rows")
    if not 1 <= k <= n_min - 1:
        raise ParameterError(f"smote k={k} outside [1, {n_min - 1}]")
    if n_needed is None:
        n_needed = int((y == majority).sum()) - n_min
    if n_needed < 0:
        raise ParameterError("n_needed must be >= 0")
    if n_needed == 0:
        return np.empty((0, X.shape[1]), dtype=np.float64)

    neighbors = _nearest_neighbors(minority_rows, k)
    rng = rng_for(seed, "sampler/smote")
    base = rng.integers(0, n_min, size=n_needed)
    nn_choice = rng.integers(0, k, size=n_needed)
    u = rng.random(size=n_needed)
    x_i = minority_rows[base]
    x_nn = minority_rows[neighbors[base, nn_choice]]
    return x_i + u[:, None] * (x_nn - x_i)


def apply_sampler(
    kind: SamplerKind, X, y, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Apply one treatment; returns (X', y', sample_weights or None)."""
    X, y = _as_xy(X, y)
    if kind.name == "none":
        return X, y, None
    if kind.name == "class_weights":
        return X, y, weight_vector(y)
    if kind.name == "upsample":
        X2, y2 = upsample(X, y, seed)
        return X2, y2, None
    if kind.name == "downsample":
        X2, y2 = downsample(X, y, seed)
        return X2, y2, None
    minority, _ = _minority_majority(y)
    synthetic = smote(X, y, k=kind.k, seed=seed)
    X2 = np.vstack([X, synthetic])
    y2 = np.concatenate([y, np.full(synthetic.shape[0], minority, dtype=np.int64)])
    return X2, y2, None
