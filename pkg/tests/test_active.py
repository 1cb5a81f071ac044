import numpy as np
import pytest

from screenkit.active import ALConfig, screened_histogram, simulate, simulate_run
from screenkit.methods import METHODS, FeatureContext
from screenkit.synth import SynthSpec, make_corpus, make_separable_corpus


@pytest.fixture(scope="module")
def separable():
    corpus = make_separable_corpus(400, 24, seed=8)
    return corpus, FeatureContext(corpus, dim=32, min_count=5)


@pytest.fixture(scope="module")
def al_config():
    return ALConfig(seed_relevant=5, seed_irrelevant=45, batch_size=50, repeats=3,
                    method=METHODS[21], seed=0)


class TestSimulateRun:
    def test_separable_finishes_quickly(self, separable, al_config):
        corpus, ctx = separable
        trace = simulate_run(corpus, al_config, ctx, run_seed=1)
        # 24 relevant, 5 seeded; near-perfect ranking finds the remaining 19
        # within a few 50-citation batches
        assert trace.found[-1] == 24
        assert trace.fraction_screened <= 0.5

    def test_seed_covering_all_relevant_ends_at_iteration_zero(self):
        corpus = make_corpus(SynthSpec(n=120, n_relevant=5, abstract_len=(20, 30),
                                       name="five"), seed=1)
        ctx = FeatureContext(corpus, dim=16, min_count=5)
        config = ALConfig(seed_relevant=5, seed_irrelevant=45, repeats=1,
                          method=METHODS[21], seed=0)
        trace = simulate_run(corpus, config, ctx, run_seed=0)
        assert len(trace.screened) == 1
        assert trace.screened == (50,)
        assert trace.found == (5,)

    def test_screened_counts_step_by_batch(self, separable, al_config):
        corpus, ctx = separable
        trace = simulate_run(corpus, al_config, ctx, run_seed=2)
        assert trace.screened[0] == 50
        steps = np.diff(np.asarray(trace.screened))
        assert np.all(steps[:-1] == 50)
        assert 0 < steps[-1] <= 50

    def test_found_monotone_and_complete(self, separable, al_config):
        corpus, ctx = separable
        trace = simulate_run(corpus, al_config, ctx, run_seed=3)
        found = np.asarray(trace.found)
        assert np.all(np.diff(found) >= 0)
        assert found[-1] == corpus.n_relevant

    def test_no_citation_selected_twice(self, separable, al_config):
        corpus, ctx = separable
        trace = simulate_run(corpus, al_config, ctx, run_seed=4)
        # screened strictly increases and ends <= n
        screened = np.asarray(trace.screened)
        assert np.all(np.diff(screened) > 0)
        assert screened[-1] <= len(corpus)

    def test_seed_count_validation(self, separable):
        corpus, ctx = separable
        config = ALConfig(seed_relevant=25, seed_irrelevant=45, repeats=1,
                          method=METHODS[21], seed=0)
        with pytest.raises(ValueError, match="seed needs"):
            simulate_run(corpus, config, ctx, run_seed=0)

    def test_inclusion_curve_non_increasing(self, separable, al_config):
        corpus, ctx = separable
        trace = simulate_run(corpus, al_config, ctx, run_seed=5)
        remaining = [r for _, r in trace.inclusion_curve()]
        assert remaining == sorted(remaining, reverse=True)
        assert remaining[-1] == 0


class TestSimulate:
    def test_shared_seeds_across_repeat_counts(self, separable):
        corpus, ctx = separable
        short = simulate(corpus, ALConfig(repeats=2, method=METHODS[21], seed=7), ctx)
        longer = simulate(corpus, ALConfig(repeats=4, method=METHODS[21], seed=7), ctx)
        assert np.array_equal(short.fractions, longer.fractions[:2])

    def test_fractions_in_unit_interval(self, separable, al_config):
        corpus, ctx = separable
        result = simulate(corpus, al_config, ctx)
        assert np.all(result.fractions > 0) and np.all(result.fractions <= 1)
        assert result.mean_fraction == pytest.approx(result.fractions.mean())

    def test_collapsed_run_seeds_give_zero_variance(self, separable, al_config):
        corpus, ctx = separable
        traces = [simulate_run(corpus, al_config, ctx, run_seed=123) for _ in range(3)]
        fractions = [t.fraction_screened for t in traces]
        assert np.var(fractions) == 0.0
        assert traces[0].screened == traces[1].screened == traces[2].screened


class TestCertaintySelection:
    def test_top_batch_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(0)
        scores = rng.normal(0, 1, 200)
        top = np.argsort(-scores, kind="stable")[:50]
        transformed = np.argsort(-(np.exp(0.7 * scores) + 5), kind="stable")[:50]
        assert np.array_equal(top, transformed)


class TestScreenedHistogram:
    def test_binning(self):
        counts, edges = screened_histogram([0.35, 0.45, 0.45])
        assert counts[3] == 1  # 30-40%
        assert counts[4] == 2  # 40-50%
        assert counts.sum() == 3
        assert edges[0] == 0.0 and edges[-1] == 1.0

    def test_empty(self):
        counts, _ = screened_histogram([])
        assert np.all(counts == 0)

    def test_full_fraction_top_bin(self):
        counts, _ = screened_histogram([1.0])
        assert counts[-1] == 1

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            screened_histogram([0.0, 0.5])
