"""Evaluation metrics for screening classifiers.

Eleven metrics: threshold-based (precision, recall, F, accuracy, and the
arithmetic/quadratic means of the per-class recall losses), ranking-based
(AUC as the Mann-Whitney pair statistic, AUPRC by stepwise sweep), and
screening-workload (yield, burden, utility).  Metrics whose denominators
vanish are reported as None, never silently as 0, so cross-fold averages
can exclude them with a count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .svm import ContingencyTable

#: Canonical metric names in report order; "yield" is spelled with a
#: trailing underscore in Python attributes only.
METRIC_NAMES = (
    "precision", "recall", "f_measure", "accuracy", "auc", "auprc",
    "am_error", "qd_error", "yield", "burden", "utility",
)

#: Whether larger values are better, per metric.
GAIN_METRICS = frozenset(
    ("precision", "recall", "f_measure", "accuracy", "auc", "auprc", "yield", "utility")
)
ERROR_METRICS = frozenset(("am_error", "qd_error", "burden"))


def confusion(scores, labels, threshold: float = 0.0) -> ContingencyTable:
    """Tally a contingency table; score equal to the threshold counts positive."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.size != labels.size:
        raise ValueError(f"scores ({scores.size}) and labels ({labels.size}) differ in length")
    if scores.size == 0:
        raise ValueError("cannot tally an empty prediction set")
    pred_pos = scores >= threshold
    actual_pos = labels == 1
    return ContingencyTable(
        tp=int(np.sum(pred_pos & actual_pos)),
        fp=int(np.sum(pred_pos & ~actual_pos)),
        tn=int(np.sum(~pred_pos & ~actual_pos)),
        fn=int(np.sum(~pred_pos & actual_pos)),
    )


class ClassificationMetrics(NamedTuple):
    precision: float | None
    recall: float | None
    f_measure: float | None
    accuracy: float | None
    am_error: float | None
    qd_error: float | None


def classification_metrics(table: ContingencyTable, beta: float = 1.0) -> ClassificationMetrics:
    """Threshold metrics from a contingency table; None where undefined."""
    tp, fp, tn, fn = table.tp, table.fp, table.tn, table.fn
    n = table.n
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f_measure = None
    else:
        b2 = beta * beta
        f_measure = (1 + b2) * precision * recall / (b2 * precision + recall)
    accuracy = (tp + tn) / n if n > 0 else None
    if tp + fn > 0 and fp + tn > 0:
        l_rp = fn / (tp + fn)
        l_rn = fp / (fp + tn)
        am_error = (l_rp + l_rn) / 2.0
        qd_error = float(np.sqrt((l_rp * l_rp + l_rn * l_rn) / 2.0))
    else:
        am_error = qd_error = None
    return ClassificationMetrics(precision, recall, f_measure, accuracy, am_error, qd_error)


def ranking_auc(scores, labels) -> float | None:
    """Probability a random relevant citation outranks a random irrelevant one.

    Mann-Whitney form: ties count one half.  Undefined (None) when either
    class is absent.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def ranking_auprc(scores, labels) -> float | None:
    """Area under the precision-recall curve by stepwise interpolation.

    The score axis is swept in descending order with tied scores handled
    as one block; the area is sum over blocks of delta-recall times the
    precision at the block's end.  Undefined when there are no positives.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    if n_pos == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    is_pos = (labels[order] == 1).astype(np.float64)
    block_end = np.flatnonzero(np.diff(s) != 0)
    block_end = np.concatenate([block_end, [s.size - 1]])
    tp = np.cumsum(is_pos)[block_end]
    pred = block_end + 1.0
    recall = tp / n_pos
    precision = tp / pred
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


@dataclass(frozen=True)
class EvalInput:
    """Test scores/labels plus the labeled-split counts for workload metrics.

    ``train_pos`` and ``train_neg`` play the role of the screened labeled
    set; N is the total over both splits.
    """

    scores: np.ndarray
    labels: np.ndarray
    threshold: float = 0.0
    train_pos: int = 0
    train_neg: int = 0

    def __post_init__(self):
        if len(self.scores) != len(self.labels):
            raise ValueError("scores and labels must have equal length")

    @property
    def total(self) -> int:
        return self.train_pos + self.train_neg + len(self.labels)


class ScreeningMetrics(NamedTuple):
    yield_: float | None
    burden: float | None
    utility: float | None


def screening_metrics(inp: EvalInput, beta: float = 19.0) -> ScreeningMetrics:
    """Yield, burden and their beta-weighted combination (utility).

    burden = (TP_L + TN_L + TP_U + FP_U) / N, yield = (TP_L + TP_U) /
    (TP_L + TP_U + FN_U), utility = (beta*yield + (1-burden)) / (beta+1);
    beta defaults to 19 so yield carries 19 times burden's weight.
    """
    table = confusion(inp.scores, inp.labels, inp.threshold)
    n_total = inp.total
    burden = (inp.train_pos + inp.train_neg + table.tp + table.fp) / n_total if n_total > 0 else None
    rel_total = inp.train_pos + table.tp + table.fn
    yield_ = (inp.train_pos + table.tp) / rel_total if rel_total > 0 else None
    if yield_ is None or burden is None:
        utility = None
    else:
        utility = (beta * yield_ + (1.0 - burden)) / (beta + 1.0)
    return ScreeningMetrics(yield_, burden, utility)


@dataclass(frozen=True)
class MetricReport:
    """All eleven metric values for one evaluation; None means undefined."""

    precision: float | None
    recall: float | None
    f_measure: float | None
    accuracy: float | None
    auc: float | None
    auprc: float | None
    am_error: float | None
    qd_error: float | None
    yield_: float | None
    burden: float | None
    utility: float | None

    def as_dict(self) -> dict[str, float | None]:
        out = {}
        for name in METRIC_NAMES:
            out[name] = getattr(self, "yield_" if name == "yield" else name)
        return out


def compute_report(inp: EvalInput, f_beta: float = 1.0, utility_beta: float = 19.0) -> MetricReport:
    """Evaluate every metric on one (scores, labels) test split."""
    table = confusion(inp.scores, inp.labels, inp.threshold)
    cls = classification_metrics(table, beta=f_beta)
    screen = screening_metrics(inp, beta=utility_beta)
    return MetricReport(
        precision=cls.precision,
        recall=cls.recall,
        f_measure=cls.f_measure,
        accuracy=cls.accuracy,
        auc=ranking_auc(inp.scores, inp.labels),
        auprc=ranking_auprc(inp.scores, inp.labels),
        am_error=cls.am_error,
        qd_error=cls.qd_error,
        yield_=screen.yield_,
        burden=screen.burden,
        utility=screen.utility,
    )
