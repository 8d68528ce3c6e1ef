"""Fold construction, AUC variants, joint accuracy, and cross-validation."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbtilab.errors import (
    ParameterError,
    ShapeError,
    StratificationError,
    UndefinedInputError,
)
from mbtilab.balance import SamplerKind
from mbtilab.evaluation import (
    ConfusionMatrix,
    auc_macro,
    auc_micro,
    baseline_majority,
    baseline_random,
    confusion,
    cross_validate,
    joint_accuracy,
    majority_letter,
    roc_auc,
    stratified_kfold,
)


def auc_pairwise(scores, labels):
    """Exact rational AUC by pair counting, ties worth one half."""
    scores = list(scores)
    labels = list(labels)
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    num = 0
    for p in pos:
        for n in neg:
            if p > n:
                num += 2
            elif p == n:
                num += 1
    return Fraction(num, 2 * len(pos) * len(neg))


class TestConfusion:
    def test_counts(self):
        cm = confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
        assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 1, 1)
        assert cm.n == 5

    def test_add(self):
        a = ConfusionMatrix(1, 2, 3, 4)
        b = a.add(ConfusionMatrix(1, 0, 0, 1))
        assert (b.tp, b.fp, b.tn, b.fn) == (2, 2, 3, 5)

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            ConfusionMatrix(-1, 0, 0, 0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            confusion([1, 0], [1])


class TestStratifiedKfold:
    def test_partition(self):
        y = np.array([0] * 30 + [1] * 20)
        folds = stratified_kfold(y, k=5, seed=1)
        all_idx = np.concatenate(folds)
        assert sorted(all_idx.tolist()) == list(range(50))
        assert len(set(all_idx.tolist())) == 50

    def test_class_balance_per_fold(self):
        y = np.array([0] * 30 + [1] * 20)
        for fold in stratified_kfold(y, k=5, seed=1):
            assert (y[fold] == 0).sum() == 6
            assert (y[fold] == 1).sum() == 4

    def test_per_class_sizes_differ_by_at_most_one(self):
        y = np.array([0] * 17 + [1] * 9)
        folds = stratified_kfold(y, k=4, seed=0)
        assert sum(f.size for f in folds) == 26
        for cls in (0, 1):
            per_fold = [(y[f] == cls).sum() for f in folds]
            assert max(per_fold) - min(per_fold) <= 1

    def test_extras_go_to_early_folds(self):
        y = np.array([0] * 7)  # 7 = 3*2 + 1
        sizes = [f.size for f in stratified_kfold(y, k=3, seed=0)]
        assert sizes == [3, 2, 2]

    def test_small_class_rejected(self):
        y = np.array([0] * 10 + [1] * 2)
        with pytest.raises(StratificationError):
            stratified_kfold(y, k=3, seed=0)

    def test_k_bounds(self):
        with pytest.raises(ParameterError):
            stratified_kfold(np.zeros(10), k=1)

    def test_deterministic(self):
        y = np.array([0, 1] * 20)
        a = stratified_kfold(y, k=4, seed=9)
        b = stratified_kfold(y, k=4, seed=9)
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa, fb)

    def test_seed_matters(self):
        y = np.array([0, 1] * 20)
        a = stratified_kfold(y, k=4, seed=1)
        b = stratified_kfold(y, k=4, seed=2)
        assert any(not np.array_equal(fa, fb) for fa, fb in zip(a, b))


class TestRocAuc:
    def test_perfect_and_inverted(self):
        labels = [0, 0, 1, 1]
        assert roc_auc([0.1, 0.2, 0.8, 0.9], labels)[1] == 1.0
        assert roc_auc([0.9, 0.8, 0.2, 0.1], labels)[1] == 0.0

    def test_all_tied_is_half(self):
        assert roc_auc([0.5] * 6, [0, 1, 0, 1, 0, 1])[1] == 0.5

    def test_matches_pair_counting_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            scores = rng.integers(0, 5, size=n) / 4.0  # coarse grid forces ties
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                continue
            got = roc_auc(scores, labels)[1]
            assert got == float(auc_pairwise(scores, labels))

    @given(
        st.lists(
            st.tuples(st.integers(0, 3), st.booleans()), min_size=2, max_size=30
        ).filter(lambda v: 0 < sum(l for _, l in v) < len(v))
    )
    @settings(max_examples=80, deadline=None)
    def test_pair_counting_property(self, pairs):
        scores = np.array([s for s, _ in pairs], dtype=np.float64)
        labels = np.array([int(l) for _, l in pairs])
        assert roc_auc(scores, labels)[1] == float(auc_pairwise(scores, labels))

    def test_curve_endpoints(self):
        curve, _ = roc_auc([0.3, 0.7, 0.1], [0, 1, 0])
        assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
        assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0

    def test_single_class_undefined(self):
        with pytest.raises(UndefinedInputError):
            roc_auc([0.1, 0.2], [1, 1])


class TestPooledAuc:
    def test_micro_is_pooled(self):
        a = (np.array([0.9, 0.1]), np.array([1, 0]))
        b = (np.array([0.4, 0.6, 0.5]), np.array([0, 1, 0]))
        pooled_scores = np.concatenate([a[0], b[0]])
        pooled_labels = np.concatenate([a[1], b[1]])
        assert auc_micro([a, b]) == roc_auc(pooled_scores, pooled_labels)[1]

    def test_macro_extremes(self):
        perfect = (np.array([0.1, 0.2, 0.8, 0.9]), np.array([0, 0, 1, 1]))
        assert auc_macro([perfect]) == pytest.approx(1.0, abs=1e-12)
        # all scores tied: envelope is the diagonal, integral exactly 1/2
        tied = (np.full(6, 0.5), np.array([0, 1] * 3))
        assert auc_macro([tied]) == pytest.approx(0.5, abs=1e-12)

    def test_macro_is_mean_of_curves(self):
        rng = np.random.default_rng(4)
        a = (rng.random(20), np.array([0, 1] * 10))
        b = (rng.random(14), np.array([0, 1] * 7))
        expected = (auc_macro([a]) + auc_macro([b])) / 2
        assert auc_macro([a, b]) == pytest.approx(expected, abs=1e-12)

    def test_macro_envelope_never_below_trapezoid(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            scores = rng.random(12)
            labels = rng.integers(0, 2, size=12)
            if labels.sum() in (0, 12):
                continue
            pair = (scores, labels)
            assert auc_macro([pair]) >= roc_auc(scores, labels)[1] - 1e-12

    def test_macro_duplicated_pair_unchanged(self):
        rng = np.random.default_rng(5)
        scores = rng.random(16)
        labels = np.array([0, 1] * 8)
        pair = (scores, labels)
        assert auc_macro([pair, pair]) == pytest.approx(auc_macro([pair]), abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            auc_micro([])
        with pytest.raises(ParameterError):
            auc_macro([])


class TestJointAccuracy:
    def test_hand_case(self):
        truths = np.array(
            [
                [1, 1, 1, 1],
                [1, 1, 1, 0],
                [1, 1, 0, 0],
                [1, 0, 0, 0],
            ]
        )
        preds = np.ones_like(truths)
        # users have 4, 3, 2, 1 correct dichotomies respectively
        report = joint_accuracy(preds, truths)
        assert report.as_tuple() == (25.0, 50.0, 75.0, 100.0)
        np.testing.assert_array_equal(report.counts, [4, 3, 2, 1])

    def test_shape_checked(self):
        with pytest.raises(ShapeError):
            joint_accuracy(np.zeros((3, 5)), np.zeros((3, 5)))

    def test_empty_undefined(self):
        with pytest.raises(UndefinedInputError):
            joint_accuracy(np.zeros((4, 0)), np.zeros((4, 0)))

    def test_monotonicity_enforced(self):
        from mbtilab.evaluation import JointAccuracyReport

        with pytest.raises(ParameterError):
            JointAccuracyReport(50.0, 25.0, 75.0, 100.0)


class TestBaselines:
    def test_random_exact(self):
        report, auc = baseline_random()
        assert report.as_tuple() == (6.25, 31.25, 68.75, 93.75)
        assert auc == 0.5

    def test_majority_letter(self):
        assert majority_letter(np.array([1, 1, 0]), ("E", "I")) == ("E", 1)
        assert majority_letter(np.array([0, 0, 1]), ("E", "I")) == ("I", 0)

    def test_majority_tie_alphabetical(self):
        # T/F tied: F precedes T alphabetically and maps to the 0 side
        assert majority_letter(np.array([1, 0]), ("T", "F")) == ("F", 0)
        # E/I tied: E precedes I and is the positive letter
        assert majority_letter(np.array([1, 0]), ("E", "I")) == ("E", 1)

    def test_baseline_majority_joint(self):
        train_ys = [np.array([1, 1, 0])] * 4  # every dichotomy majority 1
        truths = np.array(
            [
                [1, 0],
                [1, 0],
                [1, 0],
                [1, 0],
            ]
        )
        report, auc, letters = baseline_majority(train_ys, truths)
        assert report.acc_4 == 50.0
        assert auc == 0.5
        assert letters == ["E", "N", "T", "J"]


def balanced_sixteen(n_per_type=10, seed=0):
    """One block of users per type, ordered, with mildly informative X."""
    rng = np.random.default_rng(seed)
    truths = []
    for t in range(16):
        bits = [(t >> (3 - d)) & 1 for d in range(4)]
        truths.extend([bits] * n_per_type)
    truths = np.array(truths).T  # (4, n)
    n = truths.shape[1]
    X = rng.normal(size=(n, 6))
    for d in range(4):
        X[:, d] += 1.5 * truths[d]
    return X, truths


class TestCrossValidate:
    def test_joint_stratification_when_types_abundant(self):
        X, truths = balanced_sixteen(n_per_type=10)
        result = cross_validate(X, truths, "logistic", SamplerKind("none"), k=5, seed=1)
        assert result.stratified_on == "joint"
        assert sum(result.fold_sizes) == truths.shape[1]

    def test_fallback_to_most_imbalanced_dichotomy(self):
        rng = np.random.default_rng(2)
        n = 60
        truths = np.array(
            [
                rng.integers(0, 2, size=n),
                (rng.random(n) < 0.85).astype(np.int64),  # most imbalanced
                rng.integers(0, 2, size=n),
                rng.integers(0, 2, size=n),
            ]
        )
        for d in range(4):  # guarantee both classes clear k
            truths[d, :6] = [0, 1] * 3
        X = rng.normal(size=(n, 4))
        result = cross_validate(X, truths, "gnb", SamplerKind("none"), k=3, seed=0)
        assert result.stratified_on == "N/S"

    def test_deterministic(self):
        X, truths = balanced_sixteen(n_per_type=5, seed=3)
        a = cross_validate(X, truths, "logistic", SamplerKind("upsample"), k=2, seed=4)
        b = cross_validate(X, truths, "logistic", SamplerKind("upsample"), k=2, seed=4)
        assert [m.accuracy for m in a.dichotomies] == [m.accuracy for m in b.dichotomies]
        assert a.micro_auc == b.micro_auc
        assert a.macro_auc == b.macro_auc
        assert a.joint.as_tuple() == b.joint.as_tuple()

    def test_signal_beats_baselines(self):
        X, truths = balanced_sixteen(n_per_type=10, seed=5)
        result = cross_validate(X, truths, "logistic", SamplerKind("none"), k=5, seed=6)
        assert result.joint.acc_4 > result.random_joint.acc_4
        for metrics in result.dichotomies:
            assert metrics.auc > 0.8
            assert metrics.confusion.n == truths.shape[1]

    def test_every_user_scored_once(self):
        X, truths = balanced_sixteen(n_per_type=5, seed=7)
        result = cross_validate(X, truths, "gnb", SamplerKind("none"), k=2, seed=8)
        assert result.joint.counts is not None
        assert result.joint.counts.size == truths.shape[1]
        assert (result.joint.counts <= 4).all()

    def test_misaligned_shapes_rejected(self):
        X = np.zeros((10, 2))
        with pytest.raises(ShapeError):
            cross_validate(X, np.zeros((3, 10)), "logistic", SamplerKind("none"), k=2)
        with pytest.raises(ShapeError):
            cross_validate(X, np.zeros((4, 9)), "logistic", SamplerKind("none"), k=2)
