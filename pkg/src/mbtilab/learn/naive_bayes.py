"""Weighted Gaussian naive Bayes with a variance floor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mbtilab.errors import DegenerateLabelsError, ParameterError, ShapeError

VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class GnbModel:
    priors: np.ndarray  # (2,) for classes (0, 1)
    means: np.ndarray  # (2, m)
    variances: np.ndarray  # (2, m), floored

    def log_joint(self, X: np.ndarray) -> np.ndarray:
        """(n, 2) log prior + log likelihood per class."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.means.shape[1]:
            raise ShapeError("column count does not match the fitted model")
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = self.variances[c]
            quad = ((X - self.means[c]) ** 2 / var).sum(axis=1)
            norm = np.log(2.0 * np.pi * var).sum()
            out[:, c] = np.log(self.priors[c]) - 0.5 * (norm + quad)
        return out

    def score(self, X: np.ndarray) -> np.ndarray:
        """Posterior probability of class 1."""
        lj = self.log_joint(X)
        return np.exp(lj[:, 1] - np.logaddexp(lj[:, 0], lj[:, 1]))


def fit_gnb(X, y, sample_weights=None, var_floor: float = VAR_FLOOR) -> GnbModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be (n, m) and y must be (n,)")
    if not ((y == 1).any() and (y == 0).any()):
        raise DegenerateLabelsError("both classes must be present")
    n, m = X.shape
    if sample_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if w.shape != (n,) or (w < 0).any():
            raise ParameterError("sample_weights must be non-negative, one per row")

    priors = np.empty(2)
    means = np.empty((2, m))
    variances = np.empty((2, m))
    total = w.sum()
    if total <= 0:
        raise ParameterError("sample_weights must not all be zero")
    for c in (0, 1):
        wc = w[y == c]
        Xc = X[y == c]
        mass = wc.sum()
        if mass <= 0:
            raise DegenerateLabelsError(f"class {c} has zero total weight")
        priors[c] = mass / total
        means[c] = (wc[:, None] * Xc).sum(axis=0) / mass
        variances[c] = (wc[:, None] * (Xc - means[c]) ** 2).sum(axis=0) / mass
    variances = np.maximum(variances, var_floor)
    return GnbModel(priors=priors, means=means, variances=variances)
