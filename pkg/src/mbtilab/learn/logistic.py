"""Weighted ridge logistic regression via IRLS with step halving.

The fit maximizes sum_i w_i [y_i eta_i - log(1 + e^eta_i)] - (lam/2)|coef|^2
with the intercept unpenalized. Convergence is max |gradient| < tol. Standard
errors come from the unpenalized observed information at the returned
optimum; with the tiny default ridge this is the usual Wald covariance. When
that matrix is singular the model carries standard_errors=None and only Wald
inference on it is unavailable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from mbtilab.errors import DegenerateLabelsError, NumericError, ParameterError, ShapeError


@dataclass(frozen=True)
class LrModel:
    intercept: float
    coefficients: np.ndarray  # (m,)
    standard_errors: np.ndarray | None  # (m+1,) intercept first; None if singular
    converged: bool
    iterations: int

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.coefficients.shape[0]:
            raise ShapeError("column count does not match the fitted model")
        return self.intercept + X @ self.coefficients

    def score(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision(X))


def _penalized_ll(A: np.ndarray, y: np.ndarray, w: np.ndarray, beta: np.ndarray, lam: float) -> float:
    eta = A @ beta
    ll = float(np.sum(w * (y * eta - np.logaddexp(0.0, eta))))
    return ll - 0.5 * lam * float(beta[1:] @ beta[1:])


def fit_logistic(
    X,
    y,
    sample_weights=None,
    ridge: float = 1e-6,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> LrModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be (n, m) and y must be (n,)")
    if not np.isfinite(X).all():
        raise ParameterError("X must be finite")
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ParameterError("y must be binary 0/1")
    if not ((y == 1).any() and (y == 0).any()):
        raise DegenerateLabelsError("both classes must be present")
    if ridge < 0:
        raise ParameterError("ridge must be >= 0")
    n, m = X.shape
    if sample_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if w.shape != (n,) or (w < 0).any():
            raise ParameterError("sample_weights must be non-negative, one per row")

    A = np.hstack([np.ones((n, 1)), X])
    beta = np.zeros(m + 1)
    penalty_diag = np.concatenate([[0.0], np.full(m, ridge)])

    converged = False
    iterations = 0
    ll = _penalized_ll(A, y, w, beta, ridge)
    for iterations in range(1, max_iter + 1):
        p = expit(A @ beta)
        grad = A.T @ (w * (y - p)) - penalty_diag * beta
        if np.max(np.abs(grad)) < tol:
            converged = True
            iterations -= 1
            break
        r = w * p * (1.0 - p)
        H = (A.T * r) @ A + np.diag(penalty_diag)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError as exc:
            raise NumericError("singular information matrix; set ridge > 0") from exc
        # halve until the penalized log-likelihood does not decrease
        scale = 1.0
        for _ in range(40):
            candidate = beta + scale * step
            cand_ll = _penalized_ll(A, y, w, candidate, ridge)
            if cand_ll >= ll - 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        ll = _penalized_ll(A, y, w, beta, ridge)
    else:
        p = expit(A @ beta)
        grad = A.T @ (w * (y - p)) - penalty_diag * beta
        converged = bool(np.max(np.abs(grad)) < tol)
        iterations = max_iter

    p = expit(A @ beta)
    r = w * p * (1.0 - p)
    info = (A.T * r) @ A  # unpenalized observed information
    # A degenerate design (constant column, perfect separation) leaves the
    # information singular. The fit still predicts; only Wald inference is
    # undefined, so record that instead of failing the fit.
    se = None
    try:
        cov = np.linalg.inv(info)
        diag = np.diag(cov)
        if np.isfinite(diag).all() and (diag > 0).all():
            se = np.sqrt(diag.copy())
    except np.linalg.LinAlgError:
        pass

    return LrModel(
        intercept=float(beta[0]),
        coefficients=beta[1:].copy(),
        standard_errors=se,
        converged=converged,
        iterations=iterations,
    )
