"""Reference split search used by tree fitting.

For every candidate feature column, rows are stably sorted and every boundary
between distinct neighbor values is scored by the weighted Gini impurity of
the two sides. The compiled kernel reproduces this routine bit for bit: both
share numpy's stable argsort and sequential accumulation order, the same
score expression tree, and first-minimum tie-breaking in scan order.
"""

from __future__ import annotations

import numpy as np


def best_split(
    cols: np.ndarray, wy: np.ndarray, w: np.ndarray, min_leaf: int
) -> tuple[int, float, float]:
    """Best (feature, threshold, impurity score) over candidate columns.

    cols: (f, n) candidate feature values for the node's rows.
    wy:   (n,) per-row weight times binary label.
    w:    (n,) per-row weight, non-negative.
    Returns (-1, nan, inf) when no boundary satisfies min_leaf rows per side,
    distinct neighbor values, and positive weight on both sides.
    """
    f, n = cols.shape
    best_j = -1
    best_thr = float("nan")
    best_score = np.inf
    if n < 2 * min_leaf:
        return best_j, best_thr, best_score
    for j in range(f):
        order = np.argsort(cols[j], kind="stable")
        xs = cols[j][order]
        cw = np.cumsum(w[order])
        cwy = np.cumsum(wy[order])
        W = cw[-1]
        WY = cwy[-1]

        lo, hi = min_leaf - 1, n - min_leaf  # split positions [lo, hi)
        wl = cw[lo:hi]
        pl = cwy[lo:hi]
        nl = wl - pl
        wr = W - wl
        pr = WY - pl
        nr = wr - pr
        valid = (xs[lo:hi] != xs[lo + 1 : hi + 1]) & (wl > 0.0) & (wr > 0.0)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            score = (wl - (pl * pl + nl * nl) / wl) + (wr - (pr * pr + nr * nr) / wr)
        score = np.where(valid, score, np.inf)
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_j = j
            best_thr = float(0.5 * (xs[lo + i] + xs[lo + i + 1]))
    return best_j, best_thr, best_score
