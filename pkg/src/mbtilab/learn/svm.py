"""Linear soft-margin SVM trained by deterministic full-batch subgradient
descent on (lam/2)|w|^2 + weighted mean hinge loss, bias unregularized.

The schedule eta_t = 1/(lam (t+1)) follows the classic strongly-convex rate.
Iterates are tail-averaged and the best-objective snapshot is kept, so the
reported objective is non-increasing in epochs. Full-batch updates make the
fit deterministic; the seed parameter is accepted for interface uniformity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mbtilab.errors import DegenerateLabelsError, ParameterError, ShapeError


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray  # (m,)
    bias: float
    lam: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.weights.shape[0]:
            raise ShapeError("column count does not match the fitted model")
        return X @ self.weights + self.bias


def svm_objective(X: np.ndarray, y_signed: np.ndarray, w_norm: np.ndarray,
                  weights: np.ndarray, bias: float, lam: float) -> float:
    margins = y_signed * (X @ weights + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * lam * float(weights @ weights) + float(w_norm @ hinge)


def _as_signed(y: np.ndarray) -> np.ndarray:
    values = set(np.unique(y).tolist())
    if values <= {0, 1}:
        return np.where(y == 1, 1.0, -1.0)
    if values <= {-1, 1}:
        return y.astype(np.float64)
    raise ParameterError("y must be binary (0/1 or -1/+1)")


def fit_linear_svm(
    X,
    y,
    sample_weights=None,
    lam: float = 1e-2,
    epochs: int = 500,
    seed: int = 0,
) -> SvmModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be (n, m) and y must be (n,)")
    if lam <= 0:
        raise ParameterError("lam must be positive")
    if epochs < 1:
        raise ParameterError("epochs must be >= 1")
    ys = _as_signed(y)
    if (ys == 1.0).all() or (ys == -1.0).all():
        raise DegenerateLabelsError("both classes must be present")
    n, m = X.shape
    if sample_weights is None:
        sw = np.ones(n)
    else:
        sw = np.asarray(sample_weights, dtype=np.float64)
        if sw.shape != (n,) or (sw < 0).any():
            raise ParameterError("sample_weights must be non-negative, one per row")
    total = sw.sum()
    if total <= 0:
        raise ParameterError("sample_weights must not all be zero")
    w_norm = sw / total

    w = np.zeros(m)
    b = 0.0
    avg_w = np.zeros(m)
    avg_b = 0.0
    best_w = w.copy()
    best_b = b
    best_obj = svm_objective(X, ys, w_norm, w, b, lam)
    for t in range(epochs):
        margins = ys * (X @ w + b)
        active = margins < 1.0
        coef = np.where(active, w_norm * ys, 0.0)
        grad_w = lam * w - X.T @ coef
        grad_b = -float(coef.sum())
        eta = 1.0 / (lam * (t + 1))
        w = w - eta * grad_w
        b = b - eta * grad_b
        # running average of iterates; evaluate it each epoch, keep the best
        avg_w += (w - avg_w) / (t + 1)
        avg_b += (b - avg_b) / (t + 1)
        obj = svm_objective(X, ys, w_norm, avg_w, avg_b, lam)
        if obj < best_obj:
            best_obj = obj
            best_w = avg_w.copy()
            best_b = avg_b
        obj = svm_objective(X, ys, w_norm, w, b, lam)
        if obj < best_obj:
            best_obj = obj
            best_w = w.copy()
            best_b = b
    return SvmModel(weights=best_w, bias=float(best_b), lam=float(lam))
