"""Random forest of Gini-greedy binary trees with weighted bootstraps.

Trees are stored as flat node arrays (feature, threshold, left, right,
value); leaves carry the weighted positive fraction. Each tree draws from
its own RNG stream spawned from the master seed, so fits are identical no
matter how many worker threads build them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mbtilab import _kernels
from mbtilab.errors import DegenerateLabelsError, ParameterError, ShapeError
from mbtilab.rng import seed_sequence


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # (nodes,) int32, -1 at leaves
    threshold: np.ndarray  # (nodes,) float64
    left: np.ndarray  # (nodes,) int32
    right: np.ndarray  # (nodes,) int32
    value: np.ndarray  # (nodes,) float64 leaf positive fraction

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                return self.value[node]
            idx = np.flatnonzero(internal)
            at = node[idx]
            go_left = X[idx, self.feature[at]] <= self.threshold[at]
            node[idx] = np.where(go_left, self.left[at], self.right[at])


@dataclass(frozen=True)
class RfModel:
    trees: tuple[Tree, ...]
    n_trees: int
    max_depth: int | None
    min_leaf: int
    mtry: int
    n_features: int

    def score(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError("column count does not match the fitted model")
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


class _TreeBuilder:
    def __init__(self, X, wy, w, mtry, max_depth, min_leaf, rng):
        self.X = X
        self.wy = wy
        self.w = w
        self.mtry = mtry
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _add_leaf(self, rows: np.ndarray) -> int:
        mass = self.w[rows].sum()
        value = self.wy[rows].sum() / mass if mass > 0 else 0.5
        idx = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return idx

    def build(self, rows: np.ndarray, depth: int) -> int:
        wy_sum = self.wy[rows].sum()
        w_sum = self.w[rows].sum()
        pure = wy_sum <= 0.0 or wy_sum >= w_sum
        if (
            pure
            or rows.size < 2 * self.min_leaf
            or (self.max_depth is not None and depth >= self.max_depth)
        ):
            return self._add_leaf(rows)
        m = self.X.shape[1]
        feats = self.rng.choice(m, size=min(self.mtry, m), replace=False)
        cols = np.ascontiguousarray(self.X[np.ix_(rows, feats)].T)
        j, thr, _ = _kernels.best_split(cols, self.wy[rows], self.w[rows], self.min_leaf)
        if j < 0:
            return self._add_leaf(rows)
        go_left = self.X[rows, feats[j]] <= thr
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        # float midpoints can collapse onto an endpoint; bail out to a leaf
        if left_rows.size == 0 or right_rows.size == 0:
            return self._add_leaf(rows)
        idx = len(self.feature)
        self.feature.append(int(feats[j]))
        self.threshold.append(float(thr))
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        self.left[idx] = self.build(left_rows, depth + 1)
        self.right[idx] = self.build(right_rows, depth + 1)
        return idx

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value, dtype=np.float64),
        )


def _fit_tree(X, y, w, mtry, max_depth, min_leaf, child_seed) -> Tree:
    rng = np.random.Generator(np.random.PCG64(child_seed))
    n = X.shape[0]
    total = w.sum()
    p = w / total if total > 0 else None
    boot = rng.choice(n, size=n, replace=True, p=p)
    Xb = X[boot]
    wyb = (w * y)[boot]
    wb = w[boot]
    builder = _TreeBuilder(Xb, wyb, wb, mtry, max_depth, min_leaf, rng)
    builder.build(np.arange(n), 0)
    return builder.finish()


def fit_random_forest(
    X,
    y,
    sample_weights=None,
    n_trees: int = 500,
    mtry: int | None = None,
    max_depth: int | None = None,
    min_leaf: int = 1,
    seed: int = 0,
    threads: int = 1,
) -> RfModel:
    """Bootstrap + random-subspace forest; deterministic given seed.

    Bootstraps draw rows proportionally to sample_weights when given. mtry
    defaults to ceil(sqrt(m)).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be (n, m) and y must be (n,)")
    if not ((y == 1).any() and (y == 0).any()):
        raise DegenerateLabelsError("both classes must be present")
    if n_trees < 1:
        raise ParameterError("n_trees must be >= 1")
    if min_leaf < 1:
        raise ParameterError("min_leaf must be >= 1")
    if max_depth is not None and max_depth < 1:
        raise ParameterError("max_depth must be >= 1 or None")
    n, m = X.shape
    if m < 1:
        raise ParameterError("at least one feature is required")
    if mtry is None:
        mtry = math.ceil(math.sqrt(m))
    if not 1 <= mtry <= m:
        raise ParameterError(f"mtry={mtry} outside [1, {m}]")
    if sample_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if w.shape != (n,) or (w < 0).any():
            raise ParameterError("sample_weights must be non-negative, one per row")
        if w.sum() <= 0:
            raise ParameterError("sample_weights must not all be zero")

    children = seed_sequence(seed, "forest").spawn(n_trees)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(
                pool.map(
                    lambda cs: _fit_tree(X, y, w, mtry, max_depth, min_leaf, cs),
                    children,
                )
            )
    else:
        trees = [_fit_tree(X, y, w, mtry, max_depth, min_leaf, cs) for cs in children]

    return RfModel(
        trees=tuple(trees),
        n_trees=n_trees,
        max_depth=max_depth,
        min_leaf=min_leaf,
        mtry=mtry,
        n_features=m,
    )
