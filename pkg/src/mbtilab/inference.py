"""Feature-importance statistics: association, Wald tests, stepwise
selection, retention chi-squared, Wilson intervals.

Wald statistics use the normal approximation (coefficient / SE, two-sided).
Stepwise selection alternates forward and backward moves on a once-upsampled
dataset so every refit sees identical rows; traces replay exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc, gammaincc, ndtri

from mbtilab.balance import upsample
from mbtilab.errors import (
    NumericError,
    ParameterError,
    ShapeError,
    TestUndefinedError,
)
from mbtilab.learn import LrModel, fit_logistic
from mbtilab.rng import child_seed


def pearson_chi2(table: np.ndarray) -> float:
    """Pearson chi-squared with zero-expected cells contributing zero."""
    table = np.asarray(table, dtype=np.float64)
    n = table.sum()
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row * col / n
    with np.errstate(divide="ignore", invalid="ignore"):
        contrib = (table - expected) ** 2 / expected
    contrib[expected == 0.0] = 0.0
    return float(contrib.sum())


def cramers_v_bias_corrected(table) -> float:
    """Bias-corrected Cramér's V of an r x c contingency table."""
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise ShapeError("table must be at least 2x2")
    if (table < 0).any():
        raise ParameterError("table counts must be non-negative")
    if (table.sum(axis=1) == 0).any() or (table.sum(axis=0) == 0).any():
        raise ShapeError("table must have no all-zero row or column")
    n = table.sum()
    if n < 2:
        raise ShapeError("table total must be at least 2")
    r, c = table.shape
    phi2 = pearson_chi2(table) / n
    phi2_plus = max(0.0, phi2 - (r - 1) * (c - 1) / (n - 1))
    r_plus = r - (r - 1) ** 2 / (n - 1)
    c_plus = c - (c - 1) ** 2 / (n - 1)
    denom = min(r_plus - 1.0, c_plus - 1.0)
    if denom <= 0:
        raise TestUndefinedError("table too small for the bias correction")
    return float(np.sqrt(phi2_plus / denom))


def dichotomy_association(truths) -> np.ndarray:
    """4x4 matrix of bias-corrected V between dichotomy label pairs."""
    truths = np.asarray(truths).astype(np.int64)
    if truths.ndim != 2 or truths.shape[0] != 4:
        raise ShapeError("truths must be (4, n)")
    out = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            table = np.zeros((2, 2))
            for a in (0, 1):
                for b in (0, 1):
                    table[a, b] = int(((truths[i] == a) & (truths[j] == b)).sum())
            out[i, j] = cramers_v_bias_corrected(table)
    return out


def normal_two_sided_p(statistic: float) -> float:
    return float(erfc(abs(statistic) / np.sqrt(2.0)))


def wald_statistics(model: LrModel, feature_names: list[str] | None = None):
    """Per-feature (name, coefficient, se, statistic, two-sided p)."""
    if not model.converged:
        raise ParameterError("model did not converge; Wald statistics are unreliable")
    m = model.coefficients.shape[0]
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(m)]
    if len(feature_names) != m:
        raise ShapeError("one name per coefficient is required")
    if model.standard_errors is None:
        raise NumericError(
            "no standard errors: information matrix was singular; "
            "drop degenerate columns or raise the ridge"
        )
    se = model.standard_errors[1:]  # intercept SE sits at index 0
    if (se <= 0).any() or not np.isfinite(se).all():
        raise NumericError("standard errors must be positive and finite")
    rows = []
    for name, coef, s in zip(feature_names, model.coefficients, se):
        stat = float(coef / s)
        rows.append((name, float(coef), float(s), stat, normal_two_sided_p(stat)))
    return rows


@dataclass
class SelectionTrace:
    """Replayable record of one stepwise run."""

    steps: list[tuple[str, str, float]]  # (action, feature name, p-value)
    retained: list[str]
    names: list[str]  # full candidate roster, in column order
    group_counts: dict[str, tuple[int, int]] = field(default_factory=dict)
    final_model: LrModel | None = None

    def replay(self) -> list[str]:
        current: list[str] = []
        for action, name, _ in self.steps:
            if action == "add":
                current.append(name)
            elif action == "remove":
                current.remove(name)
            else:
                raise ParameterError(f"unknown action {action!r}")
        return current


def _fit_subset(Xu, yu, cols, ridge, tol, max_iter) -> LrModel | None:
    try:
        model = fit_logistic(Xu[:, cols], yu, ridge=ridge, tol=tol, max_iter=max_iter)
    except NumericError:
        return None
    if not model.converged or model.standard_errors is None:
        return None
    return model


def stepwise_select(
    X,
    y,
    names: list[str] | None = None,
    groups: list[str] | None = None,
    p_in: float = 0.05,
    p_out: float = 0.1,
    max_steps: int | None = None,
    seed: int = 0,
    ridge: float = 1e-6,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> SelectionTrace:
    """Alternating add/remove selection on once-upsampled data.

    Forward: refit with each absent candidate; add the smallest refit p-value
    if < p_in. Backward: drop the retained feature with the largest p-value
    if > p_out. Candidates whose refit fails to converge are skipped with a
    warning. A (action, feature) pair never repeats, which with max_steps
    bounds the loop.
    """
    if not p_in < p_out:
        raise ParameterError("p_in must be < p_out")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be (n, m) and y must be (n,)")
    if not np.isfinite(X).all():
        raise ParameterError("X must be finite")
    n, m = X.shape
    if names is None:
        names = [f"x{j}" for j in range(m)]
    if len(names) != m:
        raise ShapeError("one name per column is required")
    if groups is not None and len(groups) != m:
        raise ShapeError("one group per column is required")
    if max_steps is None:
        max_steps = 2 * m

    Xu, yu = upsample(X, y, child_seed(seed, "stepwise"))

    retained: list[int] = []
    steps: list[tuple[str, str, float]] = []
    performed: set[tuple[str, int]] = set()

    def candidate_p(cols: list[int], target: int) -> float | None:
        model = _fit_subset(Xu, yu, cols, ridge, tol, max_iter)
        if model is None:
            warnings.warn(
                f"stepwise: refit with {names[target]!r} did not converge; skipped",
                RuntimeWarning,
                stacklevel=3,
            )
            return None
        pos = cols.index(target)
        se = model.standard_errors[1 + pos]
        if se <= 0 or not np.isfinite(se):
            return None
        return normal_two_sided_p(float(model.coefficients[pos] / se))

    while len(steps) < max_steps:
        changed = False

        best_j, best_p = -1, np.inf
        for j in range(m):
            if j in retained or ("add", j) in performed:
                continue
            p = candidate_p(retained + [j], j)
            if p is not None and p < best_p:
                best_j, best_p = j, p
        if best_j >= 0 and best_p < p_in:
            retained.append(best_j)
            performed.add(("add", best_j))
            steps.append(("add", names[best_j], float(best_p)))
            changed = True

        if retained and len(steps) < max_steps:
            model = _fit_subset(Xu, yu, retained, ridge, tol, max_iter)
            if model is not None:
                worst_pos, worst_p = -1, -np.inf
                se = model.standard_errors[1:]
                for pos, j in enumerate(retained):
                    if se[pos] <= 0 or not np.isfinite(se[pos]):
                        continue
                    p = normal_two_sided_p(float(model.coefficients[pos] / se[pos]))
                    if p > worst_p:
                        worst_pos, worst_p = pos, p
                if worst_pos >= 0 and worst_p > p_out:
                    j = retained[worst_pos]
                    if ("remove", j) in performed:
                        break  # would cycle; terminate
                    retained.pop(worst_pos)
                    performed.add(("remove", j))
                    steps.append(("remove", names[j], float(worst_p)))
                    changed = True

        if not changed:
            break

    final_model = _fit_subset(Xu, yu, retained, ridge, tol, max_iter) if retained else None
    group_counts: dict[str, tuple[int, int]] = {}
    if groups is not None:
        kept = {names[j] for j in retained}
        for name, group in zip(names, groups):
            r, t = group_counts.get(group, (0, 0))
            group_counts[group] = (r + (1 if name in kept else 0), t + 1)
    return SelectionTrace(
        steps=steps,
        retained=[names[j] for j in retained],
        names=list(names),
        group_counts=group_counts,
        final_model=final_model,
    )


@dataclass(frozen=True)
class ImportanceRow:
    feature: str
    statistic: float
    p_value: float
    preferred: str  # dichotomy letter the coefficient pushes toward


def variable_importance(
    trace: SelectionTrace, model: LrModel, pair: tuple[str, str]
) -> list[ImportanceRow]:
    """Retained features ranked by |Wald statistic|, descending.

    Preference: positive coefficient pushes toward the pair's first letter.
    Ties keep the retained order.
    """
    stats = wald_statistics(model, feature_names=list(trace.retained))
    rows = [
        ImportanceRow(
            feature=name,
            statistic=stat,
            p_value=p,
            preferred=pair[0] if coef > 0 else pair[1],
        )
        for name, coef, _, stat, p in stats
    ]
    rows.sort(key=lambda r: -abs(r.statistic))
    return rows


def group_retention_chisq(
    group_counts: dict[str, tuple[int, int]]
) -> tuple[float, int, float]:
    """Pearson chi-squared on the G x 2 retained/excluded table.

    Groups with zero total features are excluded; df = G - 1; p from the
    chi-squared survival function.
    """
    rows = []
    for group in group_counts:
        retained, total = group_counts[group]
        if total == 0:
            continue
        if not 0 <= retained <= total:
            raise ParameterError(f"group {group!r}: retained must lie in [0, total]")
        rows.append((retained, total - retained))
    if len(rows) < 2:
        raise TestUndefinedError("chi-squared needs at least 2 nonempty groups")
    table = np.asarray(rows, dtype=np.float64)
    chi2 = pearson_chi2(table)
    df = len(rows) - 1
    p = float(gammaincc(df / 2.0, chi2 / 2.0))
    return chi2, df, p


@dataclass(frozen=True)
class WilsonInterval:
    successes: int
    n: int
    level: float
    lower: float
    upper: float

    def __post_init__(self):
        point = self.successes / self.n
        if not (0.0 <= self.lower <= point <= self.upper <= 1.0):
            raise ParameterError("interval must bracket the point estimate in [0,1]")


def wilson_ci(successes: int, n: int, level: float = 0.95) -> WilsonInterval:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not 0 <= successes <= n:
        raise ParameterError("successes must lie in [0, n]")
    if not 0.0 < level < 1.0:
        raise ParameterError("level must lie in (0, 1)")
    z = float(ndtri((1.0 + level) / 2.0))
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # At phat in {0, 1} one bound equals phat exactly in real arithmetic;
    # widen by the rounding error so the interval still brackets phat.
    lower = min(max(0.0, center - half), phat)
    upper = max(min(1.0, center + half), phat)
    return WilsonInterval(successes=successes, n=n, level=level, lower=lower, upper=upper)
