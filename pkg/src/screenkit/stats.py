"""Experiment grid execution and statistical equivalence grouping.

A grid run evaluates every (dataset, method) pair under repeated
stratified k-fold CV and stores per-metric means (undefined folds
excluded with a count).  Grouping then proceeds per metric and
prevalence group: a two-factor additive model gates the comparison, and
methods are peeled off into rank groups by paired t-tests against the
current best with linear step-up (FDR) selection.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import betainc

from .corpus import PrevalenceGroup, prevalence, stratified_folds
from .methods import FeatureContext, train_method
from .metrics import ERROR_METRICS, METRIC_NAMES, EvalInput, compute_report
from .svm import score_citations

GRID_CSV_HEADER = ("dataset", "method_id", "metric", "mean", "n_defined")
FOLD_CSV_HEADER = ("dataset", "method_id", "repetition", "fold", "metric", "value")


@dataclass
class ExperimentGrid:
    """Mean metric values per (dataset, method, metric) with defined-counts."""

    datasets: tuple[str, ...]
    method_ids: tuple[int, ...]
    metrics: tuple[str, ...]
    means: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)
    repetitions: int = 0
    k: int = 0
    seed: int = 0

    def value(self, dataset: str, method_id: int, metric: str):
        return self.means.get((dataset, method_id, metric))

    def datasets_in_group(self, group: PrevalenceGroup | None) -> list[str]:
        if group is None:
            return list(self.datasets)
        return [d for d in self.datasets if self.groups.get(d) == group]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(GRID_CSV_HEADER + ("prevalence_group",))
            for d in self.datasets:
                g = self.groups.get(d)
                for m in self.method_ids:
                    for metric in self.metrics:
                        mean = self.means.get((d, m, metric))
                        writer.writerow([
                            d, m, metric,
                            "NA" if mean is None else repr(float(mean)),
                            self.counts.get((d, m, metric), 0),
                            g.value if g is not None else "",
                        ])

    @classmethod
    def from_csv(cls, path) -> "ExperimentGrid":
        datasets: list[str] = []
        method_ids: list[int] = []
        metrics: list[str] = []
        means: dict = {}
        counts: dict = {}
        groups: dict = {}
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header[:5]) != GRID_CSV_HEADER:
                raise ValueError(f"{path}: not a grid CSV (header {header})")
            for row in reader:
                d, m, metric, mean, n_def = row[:5]
                mid = int(m)
                if d not in datasets:
                    datasets.append(d)
                if mid not in method_ids:
                    method_ids.append(mid)
                if metric not in metrics:
                    metrics.append(metric)
                means[(d, mid, metric)] = None if mean == "NA" else float(mean)
                counts[(d, mid, metric)] = int(n_def)
                if len(row) > 5 and row[5]:
                    groups[d] = PrevalenceGroup(row[5])
        return cls(datasets=tuple(datasets), method_ids=tuple(method_ids),
                   metrics=tuple(metrics), means=means, counts=counts, groups=groups)


def run_experiment_grid(
    corpora,
    methods,
    repetitions: int = 50,
    k: int = 2,
    seed: int = 0,
    metrics=METRIC_NAMES,
    contexts: dict | None = None,
    threshold: float = 0.0,
    fold_rows: list | None = None,
) -> ExperimentGrid:
    """Run repeated stratified CV for every (corpus, method) pair.

    ``contexts`` may carry prebuilt FeatureContext objects keyed by corpus
    name (they are built on demand otherwise).  Training failures on a
    fold are recorded as undefined for all metrics of that fold.  Pass a
    list as ``fold_rows`` to also collect one row per (dataset, method,
    repetition, fold, metric) with "NA" for undefined values.
    """
    corpora = list(corpora)
    methods = list(methods)
    metrics = tuple(metrics)
    grid = ExperimentGrid(
        datasets=tuple(c.name for c in corpora),
        method_ids=tuple(m.id for m in methods),
        metrics=metrics,
        repetitions=repetitions,
        k=k,
        seed=seed,
    )
    for corpus in corpora:
        frac, group = prevalence(corpus)
        grid.groups[corpus.name] = group
        context = (contexts or {}).get(corpus.name) or FeatureContext.build(corpus)
        if contexts is not None:
            contexts.setdefault(corpus.name, context)
        plan = stratified_folds(corpus, repetitions, k, seed)
        labels = corpus.labels()
        for spec in methods:
            matrix = context.matrix(spec.feature_kind)
            sums = {metric: 0.0 for metric in metrics}
            defined = {metric: 0 for metric in metrics}
            for rep, fold, train_idx, test_idx in plan.splits():
                y_train = labels[train_idx]
                y_test = labels[test_idx]
                try:
                    model = train_method(spec, matrix[train_idx], y_train, matrix[test_idx])
                    scores = score_citations(model, matrix[test_idx])
                except ValueError:
                    if fold_rows is not None:
                        fold_rows.extend(
                            [corpus.name, spec.id, rep, fold, metric, "NA"]
                            for metric in metrics)
                    continue
                report = compute_report(EvalInput(
                    scores=scores, labels=y_test, threshold=threshold,
                    train_pos=int(np.sum(y_train == 1)), train_neg=int(np.sum(y_train == -1)),
                )).as_dict()
                for metric in metrics:
                    value = report[metric]
                    if value is not None:
                        sums[metric] += value
                        defined[metric] += 1
                    if fold_rows is not None:
                        fold_rows.append([corpus.name, spec.id, rep, fold, metric,
                                          "NA" if value is None else repr(float(value))])
            for metric in metrics:
                n_def = defined[metric]
                grid.means[(corpus.name, spec.id, metric)] = (sums[metric] / n_def) if n_def else None
                grid.counts[(corpus.name, spec.id, metric)] = n_def
    return grid


def _t_sf_two_sided(t: float, df: int) -> float:
    """P(|T| > |t|) for Student's t via the regularized incomplete beta."""
    if not np.isfinite(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def _f_sf(f: float, df1: int, df2: int) -> float:
    """P(F > f) via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    if not np.isfinite(f):
        return 0.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


class TTestResult(NamedTuple):
    t: float
    p: float
    zero_variance: bool = False


def paired_t_test(a, b) -> TTestResult:
    """Two-sided paired t-test on per-dataset means.

    All-zero differences give p=1 by convention; zero variance with a
    nonzero mean gives p=0 with the zero_variance flag set.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size != b.size:
        raise ValueError("paired samples must have equal length")
    if a.size < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0, True)
        return TTestResult(np.inf if mean > 0 else -np.inf, 0.0, True)
    t = mean / (sd / np.sqrt(d.size))
    return TTestResult(float(t), _t_sf_two_sided(t, d.size - 1), False)


class AnovaResult(NamedTuple):
    f_method: float
    p_method: float
    f_data: float
    p_data: float
    df_method: int
    df_data: int
    df_residual: int
    n_datasets: int
    n_methods: int


def anova_two_factor(grid: ExperimentGrid, metric: str,
                     group: PrevalenceGroup | None = None) -> AnovaResult:
    """Two-factor additive model (dataset + method) fit by least squares.

    Datasets missing any method's value for the metric are dropped.  The
    F statistic for each factor compares the full fit against the fit
    without that factor's dummies.
    """
    datasets = [
        d for d in grid.datasets_in_group(group)
        if all(grid.value(d, m, metric) is not None for m in grid.method_ids)
    ]
    n_d, n_m = len(datasets), len(grid.method_ids)
    if n_d < 2 or n_m < 2:
        raise ValueError(f"two-factor model needs >=2 datasets and >=2 methods with defined "
                         f"{metric!r} values (got {n_d} x {n_m})")
    y = np.array([[grid.value(d, m, metric) for m in grid.method_ids] for d in datasets])
    yv = y.ravel()

    def dummies(levels: int, which: np.ndarray) -> np.ndarray:
        cols = np.zeros((which.size, levels - 1))
        for lev in range(1, levels):
            cols[which == lev, lev - 1] = 1.0
        return cols

    d_idx = np.repeat(np.arange(n_d), n_m)
    m_idx = np.tile(np.arange(n_m), n_d)
    ones = np.ones((yv.size, 1))
    x_full = np.hstack([ones, dummies(n_d, d_idx), dummies(n_m, m_idx)])
    x_no_method = np.hstack([ones, dummies(n_d, d_idx)])
    x_no_data = np.hstack([ones, dummies(n_m, m_idx)])

    def sse(x):
        coef, *_ = np.linalg.lstsq(x, yv, rcond=None)
        r = yv - x @ coef
        return float(r @ r)

    sse_full = sse(x_full)
    df_resid = (n_d - 1) * (n_m - 1)
    df_method = n_m - 1
    df_data = n_d - 1
    ms_resid = sse_full / df_resid if df_resid > 0 else np.nan

    def f_stat(sse_reduced, df_factor):
        ss_factor = max(0.0, sse_reduced - sse_full)
        tiny = 1e-12 * (1.0 + abs(sse_full) + ss_factor)
        if ss_factor <= tiny:
            return 0.0  # factor explains nothing, even if residuals vanish
        if ms_resid <= tiny:
            return np.inf
        return (ss_factor / df_factor) / ms_resid

    f_method = f_stat(sse(x_no_method), df_method)
    f_data = f_stat(sse(x_no_data), df_data)
    return AnovaResult(
        f_method=float(f_method), p_method=_f_sf(f_method, df_method, df_resid),
        f_data=float(f_data), p_data=_f_sf(f_data, df_data, df_resid),
        df_method=df_method, df_data=df_data, df_residual=df_resid,
        n_datasets=n_d, n_methods=n_m,
    )


def lsu_select(p_values, alpha: float = 0.05, m: int | None = None) -> set[int]:
    """Linear step-up selection: which comparisons stay with the best method.

    With p(1) >= ... >= p(m) the ordered p-values and pos(k) = m - k + 1
    their ascending positions, the first k with p(k) <= pos(k)*alpha/m
    marks the cut: entries ordered before it are accepted (statistically
    indistinguishable from the best).  If no k qualifies, all are.
    Returns the accepted entries as indices into ``p_values``.
    """
    p = np.asarray(p_values, dtype=np.float64)
    if m is None:
        m = p.size
    if m < 1 or p.size == 0:
        return set()
    order = np.argsort(-p, kind="stable")
    for k in range(1, p.size + 1):
        pos_k = m - k + 1
        if p[order[k - 1]] <= pos_k * alpha / m:
            return {int(i) for i in order[: k - 1]}
    return {int(i) for i in order}


@dataclass(frozen=True)
class RankGroup:
    best_method: int
    methods: tuple[int, ...]
    representative_value: float | None


@dataclass(frozen=True)
class RankGroups:
    """Ordered equivalence groups for one metric within a prevalence group."""

    metric: str
    group: PrevalenceGroup | None
    alpha: float
    direction: str
    groups: tuple[RankGroup, ...]
    anova: AnovaResult | None = None

    def method_partition(self) -> list[tuple[int, ...]]:
        return [g.methods for g in self.groups]


def _metric_direction(metric: str) -> str:
    return "error" if metric in ERROR_METRICS else "gain"


def equivalence_groups(
    grid: ExperimentGrid,
    metric: str,
    group: PrevalenceGroup | None = None,
    alpha: float = 0.05,
    direction: str | None = None,
    run_anova: bool = True,
) -> RankGroups:
    """Peel methods into statistically equivalent rank groups.

    Repeatedly: take the best remaining method by group mean (ties to the
    lower id), run paired t-tests of every other remaining method against
    it over datasets where both are defined, and group those the LSU/FDR
    step keeps.  Datasets with undefined values drop out pairwise.
    """
    direction = direction or _metric_direction(metric)
    if direction not in ("gain", "error"):
        raise ValueError(f"direction must be 'gain' or 'error', got {direction!r}")
    datasets = grid.datasets_in_group(group)
    if not datasets:
        raise ValueError(f"no datasets in prevalence group {group}")
    anova = None
    if run_anova:
        try:
            anova = anova_two_factor(grid, metric, group)
            if anova.p_method > alpha:
                warnings.warn(
                    f"{metric}: no significant method effect (p={anova.p_method:.3g}); "
                    "grouping proceeds anyway"
                )
        except ValueError:
            anova = None

    def mean_of(mid: int) -> float | None:
        vals = [grid.value(d, mid, metric) for d in datasets]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None

    remaining = sorted(grid.method_ids)
    groups: list[RankGroup] = []
    while remaining:
        means = {mid: mean_of(mid) for mid in remaining}
        defined = [mid for mid in remaining if means[mid] is not None]
        if not defined:
            groups.append(RankGroup(best_method=remaining[0],
                                    methods=tuple(remaining), representative_value=None))
            break
        sign = -1.0 if direction == "gain" else 1.0
        best = min(defined, key=lambda mid: (sign * means[mid], mid))
        others = [mid for mid in remaining if mid != best]
        if not others:
            groups.append(RankGroup(best, (best,), means[best]))
            break
        pvals = []
        for mid in others:
            pairs = [
                (grid.value(d, best, metric), grid.value(d, mid, metric))
                for d in datasets
                if grid.value(d, best, metric) is not None and grid.value(d, mid, metric) is not None
            ]
            if len(pairs) < 2:
                pvals.append(1.0)  # cannot distinguish on <2 shared datasets
            else:
                a, b = zip(*pairs)
                pvals.append(paired_t_test(a, b).p)
        accepted = lsu_select(pvals, alpha=alpha)
        members = tuple(sorted([best] + [others[i] for i in accepted]))
        groups.append(RankGroup(best, members, means[best]))
        remaining = [mid for mid in remaining if mid not in members]
    return RankGroups(metric=metric, group=group, alpha=alpha,
                      direction=direction, groups=tuple(groups), anova=anova)


def rank_groups_rows(result: RankGroups) -> list[list]:
    """Flatten RankGroups into table rows (metric, group, rank, ids, value)."""
    rows = []
    for rank, g in enumerate(result.groups, start=1):
        rows.append([
            result.metric,
            result.group.value if result.group is not None else "all",
            rank,
            ";".join(str(m) for m in g.methods),
            "NA" if g.representative_value is None else repr(float(g.representative_value)),
        ])
    return rows
