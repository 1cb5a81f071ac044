from itertools import combinations_with_replacement

import numpy as np
import pytest
import scipy.stats

from screenkit.corpus import PrevalenceGroup
from screenkit.methods import METHODS, MethodSpec
from screenkit.stats import (
    ExperimentGrid,
    anova_two_factor,
    equivalence_groups,
    lsu_select,
    paired_t_test,
    rank_groups_rows,
    run_experiment_grid,
)
from screenkit.svm import LinearModel, TrainConfig
from screenkit.synth import SynthSpec, make_corpus


def grid_from_matrix(values, method_ids=None, datasets=None, metric="auc", groups=None):
    """Build an ExperimentGrid from a datasets x methods value matrix."""
    values = np.asarray(values, dtype=object)
    n_d, n_m = values.shape
    datasets = list(datasets or (f"d{i}" for i in range(n_d)))
    method_ids = list(method_ids or range(1, n_m + 1))
    grid = ExperimentGrid(datasets=tuple(datasets), method_ids=tuple(method_ids),
                          metrics=(metric,))
    for i, d in enumerate(datasets):
        for j, m in enumerate(method_ids):
            grid.means[(d, m, metric)] = values[i, j]
            grid.counts[(d, m, metric)] = 0 if values[i, j] is None else 1
    if groups:
        grid.groups.update(groups)
    return grid


def constant_negative_trainer(x_train, y_train, x_unlabeled):
    return LinearModel(weights=np.zeros(x_train.shape[1]), intercept=-1.0,
                       config=TrainConfig("hinge"))


class TestRunExperimentGrid:
    @pytest.fixture(scope="class")
    def corpus(self):
        return make_corpus(SynthSpec(n=90, n_relevant=18, name="gridc",
                                     abstract_len=(25, 40)), seed=2)

    def test_counts_evaluations(self, corpus):
        grid = run_experiment_grid([corpus], [METHODS[25]], repetitions=2, k=2, seed=0,
                                   metrics=("accuracy",),
                                   contexts={"gridc": _ctx(corpus)})
        assert grid.counts[("gridc", 25, "accuracy")] == 4

    def test_deterministic_under_seed(self, corpus):
        a = run_experiment_grid([corpus], [METHODS[25]], 2, 2, seed=5,
                                metrics=("auc", "recall"), contexts={"gridc": _ctx(corpus)})
        b = run_experiment_grid([corpus], [METHODS[25]], 2, 2, seed=5,
                                metrics=("auc", "recall"), contexts={"gridc": _ctx(corpus)})
        assert a.means == b.means

    def test_constant_classifier_accuracy_is_majority_fraction(self, corpus):
        spec = MethodSpec(id=99, label="always-no", feature_kind="w2v_row",
                          config=TrainConfig("hinge"), trainer=constant_negative_trainer)
        grid = run_experiment_grid([corpus], [spec], repetitions=3, k=2, seed=1,
                                   metrics=("accuracy",), contexts={"gridc": _ctx(corpus)})
        assert grid.means[("gridc", 99, "accuracy")] == pytest.approx(1 - 18 / 90)

    def test_csv_roundtrip(self, corpus, tmp_path):
        grid = run_experiment_grid([corpus], [METHODS[25]], 2, 2, seed=0,
                                   metrics=("auc", "precision"),
                                   contexts={"gridc": _ctx(corpus)})
        grid.to_csv(tmp_path / "grid.csv")
        back = ExperimentGrid.from_csv(tmp_path / "grid.csv")
        assert back.datasets == grid.datasets
        assert back.groups["gridc"] == grid.groups["gridc"]
        for key, value in grid.means.items():
            if value is None:
                assert back.means[key] is None
            else:
                assert back.means[key] == pytest.approx(value, abs=1e-15)


_CTXS = {}


def _ctx(corpus):
    from screenkit.methods import FeatureContext

    if corpus.name not in _CTXS:
        _CTXS[corpus.name] = FeatureContext(corpus, dim=24, min_count=5)
    return _CTXS[corpus.name]


def closed_form_two_way(values):
    """Textbook two-way ANOVA without replication (datasets x methods)."""
    y = np.asarray(values, dtype=np.float64)
    d, m = y.shape
    grand = y.mean()
    row_means = y.mean(axis=1)
    col_means = y.mean(axis=0)
    ss_rows = m * np.sum((row_means - grand) ** 2)
    ss_cols = d * np.sum((col_means - grand) ** 2)
    resid = y - row_means[:, None] - col_means[None, :] + grand
    ss_err = np.sum(resid ** 2)
    f_cols = (ss_cols / (m - 1)) / (ss_err / ((d - 1) * (m - 1)))
    f_rows = (ss_rows / (d - 1)) / (ss_err / ((d - 1) * (m - 1)))
    return f_rows, f_cols, resid


class TestAnova:
    def test_duplicated_method_no_effect(self):
        rng = np.random.default_rng(0)
        base = rng.random(8)
        grid = grid_from_matrix(np.column_stack([base, base]).astype(object))
        result = anova_two_factor(grid, "auc")
        assert result.p_method > 0.99

    def test_duplicated_method_with_noise_no_effect(self):
        rng = np.random.default_rng(7)
        base = rng.random(10)
        noisy = np.column_stack([base + rng.normal(0, 0.02, 10),
                                 base + rng.normal(0, 0.02, 10)])
        result = anova_two_factor(grid_from_matrix(noisy.astype(object)), "auc")
        assert result.p_method > 0.2

    def test_constant_shift_detected_and_matches_closed_form(self):
        rng = np.random.default_rng(1)
        base = rng.random(10)
        values = np.column_stack([base, base + 0.5 + rng.normal(0, 0.01, 10)])
        grid = grid_from_matrix(values.astype(object))
        result = anova_two_factor(grid, "auc")
        f_rows, f_cols, _ = closed_form_two_way(values)
        assert result.p_method < 0.05
        assert result.f_method == pytest.approx(f_cols, rel=1e-9)
        assert result.f_data == pytest.approx(f_rows, rel=1e-9)

    def test_residuals_orthogonal_to_factors(self):
        rng = np.random.default_rng(2)
        values = rng.random((6, 4))
        _, _, resid = closed_form_two_way(values)
        assert np.allclose(resid.sum(axis=0), 0, atol=1e-12)
        assert np.allclose(resid.sum(axis=1), 0, atol=1e-12)

    def test_p_value_against_scipy_f(self):
        rng = np.random.default_rng(3)
        values = rng.random((7, 5))
        grid = grid_from_matrix(values.astype(object))
        result = anova_two_factor(grid, "auc")
        assert result.p_method == pytest.approx(
            scipy.stats.f.sf(result.f_method, result.df_method, result.df_residual), abs=1e-12)

    def test_single_level_rejected(self):
        grid = grid_from_matrix(np.array([[0.5], [0.6]], dtype=object))
        with pytest.raises(ValueError):
            anova_two_factor(grid, "auc")


class TestPairedT:
    def test_identical_samples_p_one(self):
        result = paired_t_test([0.1, 0.2, 0.3], [0.1, 0.2, 0.3])
        assert result.p == 1.0
        assert result.zero_variance

    def test_constant_nonzero_difference(self):
        result = paired_t_test([1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 2.0, 3.0])
        assert result.p == 0.0
        assert result.zero_variance
        assert result.t == np.inf

    def test_matches_textbook_formula(self):
        a = np.array([0.71, 0.65, 0.80, 0.55, 0.90])
        b = np.array([0.66, 0.60, 0.81, 0.51, 0.82])
        d = a - b
        t_expected = d.mean() / (d.std(ddof=1) / np.sqrt(5))
        result = paired_t_test(a, b)
        assert result.t == pytest.approx(t_expected, abs=1e-9)
        assert result.p == pytest.approx(2 * scipy.stats.t.sf(abs(t_expected), 4), abs=1e-9)

    def test_antisymmetric(self):
        rng = np.random.default_rng(4)
        a, b = rng.random(9), rng.random(9)
        assert paired_t_test(a, b).t == pytest.approx(-paired_t_test(b, a).t)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            paired_t_test([1.0], [2.0])


def bh_oracle_accepted(p_values, alpha):
    """Ascending-order step-up: reject the i smallest p-values for the
    largest i with p_(i) <= i*alpha/m; the rest stay with the best."""
    p = np.asarray(p_values, dtype=np.float64)
    m = p.size
    order = np.argsort(p, kind="stable")
    k_max = 0
    for i in range(1, m + 1):
        if p[order[i - 1]] <= i * alpha / m:
            k_max = i
    rejected = set(int(j) for j in order[:k_max])
    return set(range(m)) - rejected


class TestLsuSelect:
    def test_no_rejection_groups_all(self):
        assert lsu_select([0.9, 0.9, 0.9], alpha=0.05) == {0, 1, 2}

    def test_worked_example(self):
        # descending 0.2, 0.02, 0.001: first k with p(k) <= (m-k+1)*alpha/m is k=2
        accepted = lsu_select([0.2, 0.02, 0.001], alpha=0.05)
        assert accepted == {0}

    def test_single_small_p_rejected(self):
        assert lsu_select([0.001], alpha=0.05) == set()

    def test_single_large_p_accepted(self):
        assert lsu_select([0.5], alpha=0.05) == {0}

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_exhaustive_grid_matches_oracle(self, m):
        grid_points = np.round(np.arange(0.01, 1.001, 0.01), 2)
        for combo in combinations_with_replacement(grid_points, m):
            p = list(combo)
            assert lsu_select(p, alpha=0.05) == bh_oracle_accepted(p, 0.05), p

    @pytest.mark.parametrize("m", [4, 5, 6])
    def test_sampled_grid_matches_oracle(self, m):
        rng = np.random.default_rng(m)
        for _ in range(4000):
            p = np.round(rng.integers(1, 101, m) / 100.0, 2)
            assert lsu_select(p, alpha=0.05) == bh_oracle_accepted(p, 0.05), p


class TestEquivalenceGroups:
    def test_dominant_plus_tied_pair(self):
        rng = np.random.default_rng(0)
        base = rng.uniform(0.4, 0.6, 20)
        values = np.column_stack([
            base + 0.3 + rng.normal(0, 0.005, 20),   # method A clearly best
            base + rng.normal(0, 0.005, 20),          # B
            base + rng.normal(0, 0.005, 20),          # C tied with B
        ])
        grid = grid_from_matrix(values.astype(object), method_ids=[1, 2, 3])
        result = equivalence_groups(grid, "auc", run_anova=False)
        assert result.method_partition() == [(1,), (2, 3)]

    def test_identical_methods_one_group(self):
        rng = np.random.default_rng(1)
        base = rng.random(12)
        values = np.column_stack([base, base, base])
        grid = grid_from_matrix(values.astype(object), method_ids=[4, 5, 6])
        result = equivalence_groups(grid, "auc", run_anova=False)
        assert result.method_partition() == [(4, 5, 6)]

    def test_error_metric_prefers_smallest(self):
        rng = np.random.default_rng(2)
        base = rng.uniform(0.4, 0.6, 15)
        values = np.column_stack([base + 0.3, base])  # second method has lower error
        grid = grid_from_matrix(values.astype(object), method_ids=[7, 8], metric="am_error")
        result = equivalence_groups(grid, "am_error", run_anova=False)
        assert result.groups[0].best_method == 8

    def test_partition_property(self):
        rng = np.random.default_rng(3)
        values = rng.random((10, 6))
        grid = grid_from_matrix(values.astype(object), method_ids=[1, 2, 3, 4, 5, 6])
        result = equivalence_groups(grid, "auc", run_anova=False)
        flat = [m for g in result.method_partition() for m in g]
        assert sorted(flat) == [1, 2, 3, 4, 5, 6]

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(4)
        values = rng.random((8, 4))
        g1 = grid_from_matrix(values.astype(object), method_ids=[1, 2, 3, 4])
        g2 = grid_from_matrix(values.astype(object), method_ids=[11, 12, 13, 14])
        r1 = equivalence_groups(g1, "auc", run_anova=False)
        r2 = equivalence_groups(g2, "auc", run_anova=False)
        mapped = [tuple(m + 10 for m in g) for g in r1.method_partition()]
        assert mapped == list(r2.method_partition())

    def test_prevalence_group_filter(self):
        rng = np.random.default_rng(5)
        values = rng.random((6, 2)).astype(object)
        groups = {f"d{i}": (PrevalenceGroup.LOW if i < 3 else PrevalenceGroup.HIGH)
                  for i in range(6)}
        grid = grid_from_matrix(values, groups=groups)
        low = equivalence_groups(grid, "auc", PrevalenceGroup.LOW, run_anova=False)
        assert low.group is PrevalenceGroup.LOW

    def test_undefined_values_drop_pairwise(self):
        values = np.array([
            [0.9, 0.5], [0.8, 0.4], [None, 0.45], [0.85, 0.42], [0.88, 0.41],
        ], dtype=object)
        grid = grid_from_matrix(values, method_ids=[1, 2])
        result = equivalence_groups(grid, "auc", run_anova=False)
        assert result.groups[0].best_method == 1

    def test_rows_shape(self):
        rng = np.random.default_rng(6)
        values = rng.random((8, 3)).astype(object)
        grid = grid_from_matrix(values, method_ids=[1, 2, 3])
        rows = rank_groups_rows(equivalence_groups(grid, "auc", run_anova=False))
        assert all(len(r) == 5 for r in rows)
        assert rows[0][2] == 1
