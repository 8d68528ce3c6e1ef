"""Stratified cross-validation and the multi-model metric suite.

Per-dichotomy labels are binary with 1 meaning the pair's first letter
(E, N, T, J). Fold metrics are averaged with equal fold weight. AUC uses an
integer trapezoid over the grouped threshold sweep, so it equals pairwise
counting with half credit for ties exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from mbtilab.corpus import DICHOTOMIES, DICHOTOMY_NAMES
from mbtilab.balance import SamplerKind, apply_sampler
from mbtilab.errors import (
    ParameterError,
    ShapeError,
    StratificationError,
    UndefinedInputError,
)
from mbtilab.learn import default_threshold, fit_model, predict_scores
from mbtilab.rng import child_seed, rng_for

MACRO_GRID_POINTS = 1001


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ParameterError("confusion counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


def confusion(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true).astype(np.int64)
    y_pred = np.asarray(y_pred).astype(np.int64)
    if y_true.shape != y_pred.shape:
        raise ShapeError("prediction shape must match truth shape")
    tp = int(((y_true == 1) & (y_pred == 1)).sum())
    fp = int(((y_true == 0) & (y_pred == 1)).sum())
    tn = int(((y_true == 0) & (y_pred == 0)).sum())
    fn = int(((y_true == 1) & (y_pred == 0)).sum())
    return ConfusionMatrix(tp, fp, tn, fn)


def stratified_kfold(y, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """k disjoint test-index sets with per-class proportional allocation.

    Within each class the indices are permuted once; fold sizes differ by at
    most one, extras going to the earliest folds. Deterministic given seed.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise ShapeError("y must be 1-D")
    if k < 2:
        raise ParameterError("k must be >= 2")
    rng = rng_for(seed, "folds")
    folds: list[list[np.ndarray]] = [[] for _ in range(k)]
    classes = np.unique(y)
    for cls in classes:
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise StratificationError(
                f"class {cls!r} has {idx.size} samples, fewer than k={k}"
            )
        perm = idx[rng.permutation(idx.size)]
        base, extra = divmod(idx.size, k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            folds[f].append(perm[start : start + size])
            start += size
    return [np.sort(np.concatenate(parts)) for parts in folds]


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    def __post_init__(self):
        if self.fpr.shape != self.tpr.shape or self.fpr.ndim != 1:
            raise ShapeError("fpr and tpr must be aligned 1-D arrays")
        if self.fpr[0] != 0.0 or self.tpr[0] != 0.0:
            raise ParameterError("curve must begin at (0,0)")
        if self.fpr[-1] != 1.0 or self.tpr[-1] != 1.0:
            raise ParameterError("curve must end at (1,1)")
        if (np.diff(self.fpr) < 0).any() or (np.diff(self.tpr) < 0).any():
            raise ParameterError("curve must be monotone")


def roc_auc(scores, labels) -> tuple[RocCurve, float]:
    """Threshold-sweep ROC and its trapezoidal area.

    Scores are grouped by value (descending); each group contributes one
    curve point, which gives tied scores half credit. The area numerator is
    accumulated in integers, so the result matches the pairwise-counting
    definition exactly.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ShapeError("scores and labels must be aligned 1-D arrays")
    P = int((labels == 1).sum())
    N = int((labels == 0).sum())
    if P == 0 or N == 0:
        raise UndefinedInputError("AUC needs both classes present")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = labels[order] == 1
    # group boundaries where the sorted score changes
    boundary = np.flatnonzero(np.diff(s) != 0.0)
    ends = np.concatenate([boundary + 1, [s.size]])
    tp_cum = np.cumsum(pos)[ends - 1]
    fp_cum = ends - tp_cum

    tps = np.concatenate([[0], tp_cum])
    fps = np.concatenate([[0], fp_cum])
    num = int(np.sum((fps[1:] - fps[:-1]) * (tps[1:] + tps[:-1])))
    auc = num / (2 * P * N)
    curve = RocCurve(fpr=fps / N, tpr=tps / P)
    return curve, auc


def auc_micro(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> float:
    """AUC of all (score, label) pairs pooled across dichotomy models."""
    if not pairs:
        raise ParameterError("at least one (scores, labels) pair is required")
    scores = np.concatenate([np.asarray(s, dtype=np.float64) for s, _ in pairs])
    labels = np.concatenate([np.asarray(l).astype(np.int64) for _, l in pairs])
    return roc_auc(scores, labels)[1]


def _upper_envelope(curve: RocCurve) -> tuple[np.ndarray, np.ndarray]:
    uniq, inverse = np.unique(curve.fpr, return_inverse=True)
    best = np.zeros(uniq.size)
    np.maximum.at(best, inverse, curve.tpr)
    return uniq, best


def auc_macro(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]], grid_points: int = MACRO_GRID_POINTS
) -> float:
    """Mean TPR across models on a shared FPR grid, integrated over [0,1]."""
    if not pairs:
        raise ParameterError("at least one (scores, labels) pair is required")
    grid = np.linspace(0.0, 1.0, grid_points)
    mean_tpr = np.zeros(grid_points)
    for scores, labels in pairs:
        curve, _ = roc_auc(scores, labels)
        fpr, tpr = _upper_envelope(curve)
        mean_tpr += np.interp(grid, fpr, tpr)
    mean_tpr /= len(pairs)
    return float(np.trapezoid(mean_tpr, grid))


@dataclass(frozen=True)
class JointAccuracyReport:
    """Percentages of users with all 4 / >=3 / >=2 / >=1 dichotomies correct."""

    acc_4: float
    acc_ge3: float
    acc_ge2: float
    acc_ge1: float
    counts: np.ndarray | None = None  # per-user correct-dichotomy counts

    def __post_init__(self):
        seq = (self.acc_4, self.acc_ge3, self.acc_ge2, self.acc_ge1)
        for a, b in zip(seq, seq[1:]):
            if a > b + 1e-9:
                raise ParameterError("joint accuracies must be non-decreasing")
        if self.acc_ge1 > 100.0 + 1e-9 or self.acc_4 < 0.0:
            raise ParameterError("joint accuracies must lie in [0, 100]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.acc_4, self.acc_ge3, self.acc_ge2, self.acc_ge1)


def joint_accuracy(predictions, truths) -> JointAccuracyReport:
    """Count correct dichotomies per user; report tail percentages."""
    predictions = np.asarray(predictions).astype(np.int64)
    truths = np.asarray(truths).astype(np.int64)
    if predictions.shape != truths.shape or predictions.ndim != 2 or predictions.shape[0] != 4:
        raise ShapeError("predictions and truths must both be (4, n)")
    n = predictions.shape[1]
    if n == 0:
        raise UndefinedInputError("joint accuracy needs at least one user")
    counts = (predictions == truths).sum(axis=0)
    tails = [100.0 * float((counts >= j).sum()) / n for j in (4, 3, 2, 1)]
    return JointAccuracyReport(
        acc_4=tails[0], acc_ge3=tails[1], acc_ge2=tails[2], acc_ge1=tails[3], counts=counts
    )


def baseline_random() -> tuple[JointAccuracyReport, float]:
    """Analytic fair-coin baseline: binomial(4, 1/2) tails, AUC 1/2."""
    report = JointAccuracyReport(
        acc_4=100.0 * 1 / 16,
        acc_ge3=100.0 * 5 / 16,
        acc_ge2=100.0 * 11 / 16,
        acc_ge1=100.0 * 15 / 16,
    )
    return report, 0.5


def majority_letter(train_y: np.ndarray, pair: tuple[str, str]) -> tuple[str, int]:
    """Training-majority letter of one dichotomy; ties go to the
    alphabetically first letter of the pair."""
    train_y = np.asarray(train_y).astype(np.int64)
    n_pos = int((train_y == 1).sum())
    n_neg = int(train_y.size) - n_pos
    first, second = pair
    if n_pos > n_neg:
        return first, 1
    if n_neg > n_pos:
        return second, 0
    letter = min(first, second)
    return letter, 1 if letter == first else 0


def baseline_majority(
    train_ys: Sequence[np.ndarray],
    test_truths,
    dichotomies: tuple[tuple[str, str], ...] = DICHOTOMIES,
) -> tuple[JointAccuracyReport, float, list[str]]:
    """Constant per-dichotomy majority predictions; AUC defined as 1/2."""
    test_truths = np.asarray(test_truths).astype(np.int64)
    if len(train_ys) != 4 or test_truths.shape[0] != 4:
        raise ShapeError("four dichotomies are required")
    n = test_truths.shape[1]
    letters: list[str] = []
    preds = np.empty_like(test_truths)
    for d, train_y in enumerate(train_ys):
        letter, value = majority_letter(np.asarray(train_y), dichotomies[d])
        letters.append(letter)
        preds[d] = value
    return joint_accuracy(preds, test_truths), 0.5, letters


@dataclass
class DichotomyMetrics:
    name: str
    accuracy: float  # percent, fold-averaged
    auc: float  # fold-averaged
    confusion: ConfusionMatrix  # summed over folds
    fold_accuracies: list[float] = field(default_factory=list)
    fold_aucs: list[float] = field(default_factory=list)


@dataclass
class EvaluationResult:
    model_kind: str
    sampler: SamplerKind
    k: int
    seed: int
    stratified_on: str
    dichotomies: list[DichotomyMetrics]
    joint: JointAccuracyReport
    micro_auc: float
    macro_auc: float
    majority_joint: JointAccuracyReport
    majority_letters: list[str]
    majority_auc: float
    random_joint: JointAccuracyReport
    random_auc: float
    fold_sizes: list[int] = field(default_factory=list)


def _fold_labels(truths: np.ndarray, k: int) -> tuple[np.ndarray, str]:
    """Joint-type stratification when every present type has >= k users;
    otherwise the most imbalanced dichotomy whose classes both have >= k."""
    joint = truths[0] * 8 + truths[1] * 4 + truths[2] * 2 + truths[3]
    _, counts = np.unique(joint, return_counts=True)
    if counts.min() >= k:
        return joint, "joint"
    best_d = -1
    best_imbalance = -1.0
    n = truths.shape[1]
    for d in range(4):
        n_pos = int(truths[d].sum())
        n_neg = n - n_pos
        if min(n_pos, n_neg) < k:
            continue
        imbalance = max(n_pos, n_neg) / n
        if imbalance > best_imbalance:
            best_imbalance = imbalance
            best_d = d
    if best_d < 0:
        raise StratificationError("no dichotomy has both classes with >= k samples")
    return truths[best_d], DICHOTOMY_NAMES[best_d]


def cross_validate(
    X,
    truths,
    model_kind: str,
    sampler: SamplerKind,
    k: int = 10,
    seed: int = 0,
    fit_params: dict | None = None,
    per_fold_transform: Callable | None = None,
    threads: int = 1,
) -> EvaluationResult:
    """Train and score the four dichotomy models under one fold partition.

    One stratified partition is shared by all four dichotomies so joint
    accuracy and pooled AUC are computed on aligned test sets. The sampler is
    applied to each training fold per dichotomy with its own derived seed.
    per_fold_transform(X, train_idx, test_idx) -> (X_train, X_test) supports
    leakage-free per-fold reduction; the default slices a fixed matrix.
    """
    X = np.asarray(X, dtype=np.float64)
    truths = np.asarray(truths).astype(np.int64)
    if truths.ndim != 2 or truths.shape[0] != 4 or truths.shape[1] != X.shape[0]:
        raise ShapeError("truths must be (4, n) aligned with X rows")
    fit_params = dict(fit_params or {})

    labels, stratified_on = _fold_labels(truths, k)
    folds = stratified_kfold(labels, k=k, seed=seed)
    all_idx = np.arange(X.shape[0])

    per_dich: list[DichotomyMetrics] = [
        DichotomyMetrics(DICHOTOMY_NAMES[d], 0.0, 0.0, ConfusionMatrix(0, 0, 0, 0))
        for d in range(4)
    ]
    joint_tails = np.zeros(4)
    micro_sum = 0.0
    macro_sum = 0.0
    maj_tails = np.zeros(4)
    maj_letters_last: list[str] = []
    counts_all = np.zeros(X.shape[0], dtype=np.int64)

    for f, test_idx in enumerate(folds):
        train_mask = np.ones(X.shape[0], dtype=bool)
        train_mask[test_idx] = False
        train_idx = all_idx[train_mask]
        if per_fold_transform is None:
            X_train, X_test = X[train_idx], X[test_idx]
        else:
            X_train, X_test = per_fold_transform(X, train_idx, test_idx)

        fold_preds = np.empty((4, test_idx.size), dtype=np.int64)
        fold_pairs: list[tuple[np.ndarray, np.ndarray]] = []
        train_ys = []
        for d in range(4):
            y_train = truths[d, train_idx]
            y_test = truths[d, test_idx]
            train_ys.append(y_train)
            s_seed = child_seed(seed, f"sampler/fold{f}/dich{d}")
            Xb, yb, weights = apply_sampler(sampler, X_train, y_train, s_seed)
            m_seed = child_seed(seed, f"fit/fold{f}/dich{d}")
            params = dict(fit_params)
            if model_kind == "forest":
                params.setdefault("threads", threads)
            model = fit_model(model_kind, Xb, yb, sample_weights=weights, seed=m_seed, **params)
            scores = predict_scores(model, X_test)
            preds = (scores >= default_threshold(model)).astype(np.int64)
            fold_preds[d] = preds
            fold_pairs.append((scores, y_test))

            metrics = per_dich[d]
            metrics.fold_accuracies.append(100.0 * float((preds == y_test).mean()))
            metrics.fold_aucs.append(roc_auc(scores, y_test)[1])
            metrics.confusion = metrics.confusion.add(confusion(y_test, preds))

        fold_joint = joint_accuracy(fold_preds, truths[:, test_idx])
        joint_tails += np.asarray(fold_joint.as_tuple())
        counts_all[test_idx] = fold_joint.counts
        micro_sum += auc_micro(fold_pairs)
        macro_sum += auc_macro(fold_pairs)
        maj_joint, _, maj_letters_last = baseline_majority(
            train_ys, truths[:, test_idx]
        )
        maj_tails += np.asarray(maj_joint.as_tuple())

    for metrics in per_dich:
        metrics.accuracy = float(np.mean(metrics.fold_accuracies))
        metrics.auc = float(np.mean(metrics.fold_aucs))

    joint_tails /= k
    maj_tails /= k
    random_joint, random_auc = baseline_random()
    return EvaluationResult(
        model_kind=model_kind,
        sampler=sampler,
        k=k,
        seed=seed,
        stratified_on=stratified_on,
        dichotomies=per_dich,
        joint=JointAccuracyReport(*joint_tails.tolist(), counts=counts_all),
        micro_auc=micro_sum / k,
        macro_auc=macro_sum / k,
        majority_joint=JointAccuracyReport(*maj_tails.tolist()),
        majority_letters=maj_letters_last,
        majority_auc=0.5,
        random_joint=random_joint,
        random_auc=random_auc,
        fold_sizes=[int(idx.size) for idx in folds],
    )
