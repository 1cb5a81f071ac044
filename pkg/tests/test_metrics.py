import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenkit.metrics import (
    EvalInput,
    classification_metrics,
    compute_report,
    confusion,
    ranking_auc,
    ranking_auprc,
    screening_metrics,
)
from screenkit.svm import ContingencyTable


def brute_force_auc(scores, labels):
    """Pairwise positive/negative comparison with ties counted one half."""
    pos = np.asarray(scores)[np.asarray(labels) == 1]
    neg = np.asarray(scores)[np.asarray(labels) == -1]
    wins = halves = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                halves += 1
    return (wins + 0.5 * halves) / (len(pos) * len(neg))


def sweep_auprc(scores, labels):
    """All-thresholds precision/recall sweep, stepwise integration."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    thresholds = np.unique(scores)[::-1]
    area = 0.0
    prev_recall = 0.0
    for t in thresholds:
        pred = scores >= t
        tp = int(np.sum(pred & (labels == 1)))
        recall = tp / n_pos
        precision = tp / int(pred.sum())
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


class TestConfusion:
    def test_simple(self):
        t = confusion([1.0, -1.0], [1, -1], 0.0)
        assert (t.tp, t.tn, t.fp, t.fn) == (1, 1, 0, 0)

    def test_score_at_threshold_counts_positive(self):
        t = confusion([0.0], [-1], 0.0)
        assert t.fp == 1

    def test_all_wrong(self):
        t = confusion([-1.0] * 4, [1] * 4, 0.0)
        assert t.fn == 4

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([1.0], [1, -1], 0.0)


class TestClassificationMetrics:
    def test_worked_example(self):
        m = classification_metrics(ContingencyTable(tp=3, fp=1, tn=5, fn=1))
        assert m.precision == pytest.approx(0.75)
        assert m.recall == pytest.approx(0.75)
        assert m.f_measure == pytest.approx(0.75)
        assert m.accuracy == pytest.approx(0.8)

    def test_error_rates(self):
        # recall losses 0.2 and 0.4
        m = classification_metrics(ContingencyTable(tp=8, fn=2, fp=4, tn=6))
        assert m.am_error == pytest.approx(0.3)
        assert m.qd_error == pytest.approx(np.sqrt((0.04 + 0.16) / 2))

    def test_undefined_precision_is_none(self):
        m = classification_metrics(ContingencyTable(tp=0, fp=0, tn=5, fn=2))
        assert m.precision is None
        assert m.recall == 0.0
        assert m.f_measure is None

    def test_f_beta(self):
        m = classification_metrics(ContingencyTable(tp=3, fp=1, tn=5, fn=1), beta=2.0)
        assert m.f_measure == pytest.approx(0.75)  # precision == recall

    def test_matches_independent_recomputation(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            tp, fp, tn, fn = (int(v) for v in rng.integers(0, 30, 4))
            if tp + fp + tn + fn == 0:
                continue
            m = classification_metrics(ContingencyTable(tp=tp, fp=fp, tn=tn, fn=fn))
            if tp + fp > 0:
                assert m.precision == tp / (tp + fp)
            if tp + fn > 0:
                assert m.recall == tp / (tp + fn)
            assert m.accuracy == (tp + tn) / (tp + fp + tn + fn)
            if m.precision is not None and m.recall is not None and m.precision + m.recall > 0:
                assert m.f_measure == pytest.approx(
                    2 * m.precision * m.recall / (m.precision + m.recall))
            if tp + fn > 0 and fp + tn > 0:
                assert m.am_error == pytest.approx((fn / (tp + fn) + fp / (fp + tn)) / 2)


class TestRankingAuc:
    def test_perfect(self):
        assert ranking_auc([3.0, 2.0, 1.0, 0.0], [1, 1, -1, -1]) == pytest.approx(1.0)

    def test_constant_scores_half(self):
        assert ranking_auc([1.0] * 6, [1, -1, 1, -1, -1, -1]) == pytest.approx(0.5)

    def test_single_class_undefined(self):
        assert ranking_auc([1.0, 2.0], [1, 1]) is None

    def test_matches_pair_counting(self):
        rng = np.random.default_rng(1)
        for trial in range(10):
            labels = np.where(rng.random(200) < 0.2, 1, -1)
            if np.unique(labels).size < 2:
                continue
            scores = np.round(rng.normal(0, 1, 200), 1)  # rounding forces ties
            assert ranking_auc(scores, labels) == pytest.approx(
                brute_force_auc(scores, labels), abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=9999))
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        scores = rng.normal(0, 1, 50)
        labels = np.where(rng.random(50) < 0.3, 1, -1)
        if np.unique(labels).size < 2:
            return
        a = ranking_auc(scores, labels)
        b = ranking_auc(np.exp(scores * 0.5) + 3, labels)
        assert a == pytest.approx(b, abs=1e-12)

    def test_negation_complement_for_tie_free(self):
        rng = np.random.default_rng(2)
        scores = rng.permutation(40).astype(float)
        labels = np.array([1] * 10 + [-1] * 30)
        assert ranking_auc(scores, labels) + ranking_auc(-scores, labels) == pytest.approx(1.0)


class TestRankingAuprc:
    def test_single_positive_first(self):
        assert ranking_auprc([5.0, 1.0, 0.5], [1, -1, -1]) == pytest.approx(1.0)

    def test_single_positive_last(self):
        n = 8
        scores = np.arange(n, 0, -1).astype(float)
        labels = np.array([-1] * (n - 1) + [1])
        assert ranking_auprc(scores, labels) == pytest.approx(1.0 / n)

    def test_no_positives_undefined(self):
        assert ranking_auprc([1.0, 2.0], [-1, -1]) is None

    def test_matches_threshold_sweep(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            labels = np.where(rng.random(120) < 0.25, 1, -1)
            if not (labels == 1).any():
                continue
            scores = np.round(rng.normal(0, 1, 120), 1)
            assert ranking_auprc(scores, labels) == pytest.approx(
                sweep_auprc(scores, labels), abs=1e-6)


class TestScreeningMetrics:
    def test_utility_formula(self):
        # yield 0.98, burden 0.5 -> utility (19*0.98 + 0.5)/20
        got = screening_metrics(EvalInput(
            scores=np.array([1.0] * 30 + [-1.0] * 70),
            labels=np.array([1] * 24 + [-1] * 6 + [1] * 1 + [-1] * 69),
            threshold=0.0,
            train_pos=25, train_neg=75,
        ))
        assert got.yield_ == pytest.approx((25 + 24) / (25 + 24 + 1))
        assert got.burden == pytest.approx((25 + 75 + 24 + 6) / 200)

    def test_nothing_predicted_positive(self):
        got = screening_metrics(EvalInput(
            scores=np.full(50, -1.0), labels=np.array([1] * 5 + [-1] * 45),
            threshold=0.0, train_pos=10, train_neg=40,
        ))
        assert got.burden == pytest.approx(50 / 100)

    def test_utility_endpoint(self):
        got = screening_metrics(EvalInput(
            scores=np.ones(10), labels=np.array([1] * 2 + [-1] * 8),
            threshold=0.0, train_pos=5, train_neg=0,
        ))
        # everything screened: yield 1, burden 1 -> utility 0.95
        assert got.yield_ == pytest.approx(1.0)
        assert got.burden == pytest.approx(1.0)
        assert got.utility == pytest.approx(0.95)

    def test_no_relevant_anywhere_yield_undefined(self):
        got = screening_metrics(EvalInput(
            scores=np.ones(4), labels=np.array([-1] * 4),
            threshold=0.0, train_pos=0, train_neg=6,
        ))
        assert got.yield_ is None
        assert got.utility is None

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
    def test_utility_affine_and_bounded(self, y, b):
        beta = 19.0
        u = (beta * y + (1.0 - b)) / (beta + 1.0)
        assert 0.0 <= u <= 1.0


class TestComputeReport:
    def test_all_metrics_present(self):
        rng = np.random.default_rng(0)
        scores = rng.normal(0, 1, 60)
        labels = np.where(rng.random(60) < 0.3, 1, -1)
        report = compute_report(EvalInput(scores=scores, labels=labels,
                                          threshold=0.0, train_pos=20, train_neg=40))
        d = report.as_dict()
        assert set(d) == {"precision", "recall", "f_measure", "accuracy", "auc", "auprc",
                          "am_error", "qd_error", "yield", "burden", "utility"}
        for name, value in d.items():
            if value is not None:
                assert 0.0 <= value <= 1.0, name
