import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenkit.corpus import (
    Citation,
    Corpus,
    CorpusError,
    PrevalenceGroup,
    load_corpus,
    prevalence,
    stratified_folds,
)
from screenkit.synth import COHEN_REVIEW_SIZES, cohen_standin

from conftest import corpus_records, write_jsonl


class TestCitation:
    def test_label_must_be_binary(self):
        with pytest.raises(CorpusError):
            Citation("x", "t", "a", label=2)

    def test_empty_text_rejected(self):
        with pytest.raises(CorpusError):
            Citation("x", "  ", "", label=1)

    def test_title_only_is_accepted(self):
        # empty abstracts are allowed as long as the title carries text
        c = Citation("x", "a title", "", label=None)
        assert c.text_units == ("a title", "")


class TestLoadCorpus:
    def test_counts(self, tmp_path):
        path = write_jsonl(tmp_path / "c.jsonl", [
            {"id": "1", "title": "t1", "abstract": "a1", "label": 1},
            {"id": "2", "title": "t2", "abstract": "a2", "label": None},
            {"id": "3", "title": "t3", "abstract": "a3"},
        ])
        corpus = load_corpus(path)
        assert len(corpus) == 3
        assert corpus.n_labeled == 1
        assert len(corpus.unlabeled()) == 2
        assert corpus.ids == ("1", "2", "3")

    def test_duplicate_id_names_the_id(self, tmp_path):
        path = write_jsonl(tmp_path / "c.jsonl", [
            {"id": "a", "title": "t", "abstract": "x", "label": 1},
            {"id": "a", "title": "t2", "abstract": "y", "label": -1},
        ])
        with pytest.raises(CorpusError, match="duplicate id: a"):
            load_corpus(path)

    def test_malformed_line_reports_line_number(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"id": "1", "title": "t", "abstract": "a"}\n{oops\n')
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(str(p))

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        with pytest.raises(CorpusError, match="empty"):
            load_corpus(str(p))

    def test_csv_roundtrip(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("id,title,abstract,label\n1,T one,Abs one,1\n2,T two,Abs two,\n")
        corpus = load_corpus(str(p), format="csv")
        assert corpus[0].label == 1 and corpus[1].label is None

    def test_benchmark_sized_files_load_with_expected_counts(self, tmp_path):
        # C1-shaped file: 2544 citations of which 41 relevant
        corpus = cohen_standin("C1", seed=0)
        path = write_jsonl(tmp_path / "C1.jsonl", corpus_records(corpus))
        loaded = load_corpus(path, name="C1")
        n, rel = COHEN_REVIEW_SIZES["C1"]
        assert len(loaded) == n == 2544
        assert loaded.n_relevant == rel == 41
        assert loaded.ids == corpus.ids


class TestPrevalence:
    @pytest.mark.parametrize("review,expected_pct,expected_group", [
        ("C1", 1.61, PrevalenceGroup.LOW),
        ("C15", 13.07, PrevalenceGroup.MID),
        ("C4", 16.24, PrevalenceGroup.HIGH),
    ])
    def test_benchmark_rows(self, review, expected_pct, expected_group):
        frac, group = prevalence(cohen_standin(review, seed=0))
        assert round(100 * frac, 2) == expected_pct
        assert group is expected_group

    def test_boundary_extension(self):
        corpus = Corpus((Citation("1", "t", "a", 1), Citation("2", "t", "b", -1)))
        frac, group = prevalence(corpus)
        assert frac == 0.5
        assert group is PrevalenceGroup.HIGH

    def test_every_benchmark_row_maps_to_its_group(self):
        lows = {"C1", "C2", "C3", "C5", "C9", "C11", "C12", "C13", "C14"}
        mids = {"C6", "C8", "C15"}
        for review, (n, rel) in COHEN_REVIEW_SIZES.items():
            group = PrevalenceGroup.from_fraction(rel / n)
            if review in lows:
                assert group is PrevalenceGroup.LOW, review
            elif review in mids:
                assert group is PrevalenceGroup.MID, review
            else:
                assert group is PrevalenceGroup.HIGH, review

    def test_unlabeled_rejected(self):
        corpus = Corpus((Citation("1", "t", "a", 1), Citation("2", "t", "b", None)))
        with pytest.raises(CorpusError, match="unlabeled"):
            prevalence(corpus)

    @given(st.floats(min_value=1e-6, max_value=1.0))
    def test_grouping_total_on_unit_interval(self, frac):
        assert PrevalenceGroup.from_fraction(frac) in PrevalenceGroup


def _mini_corpus(n, n_rel, name="m"):
    cits = tuple(
        Citation(f"{name}{i}", f"title {i}", f"abstract {i}", 1 if i < n_rel else -1)
        for i in range(n)
    )
    return Corpus(cits, name=name)


class TestStratifiedFolds:
    def test_two_relevant_split_evenly(self):
        plan = stratified_folds(_mini_corpus(10, 2), repetitions=1, k=2, seed=0)
        labels = _mini_corpus(10, 2).labels()
        for fold in range(2):
            test = plan.test_indices(0, fold)
            assert np.sum(labels[test] == 1) == 1

    def test_repeated_two_fold_coverage(self):
        # n x 2: every citation appears in a test fold exactly once per repetition
        corpus = _mini_corpus(20, 6)
        plan = stratified_folds(corpus, repetitions=500, k=2, seed=3)
        counts = np.zeros(20, dtype=int)
        for rep in range(500):
            for fold in range(2):
                counts[plan.test_indices(rep, fold)] += 1
        assert np.all(counts == 500)
        assert plan.repetitions * plan.k == 1000

    def test_seed_determinism(self):
        corpus = _mini_corpus(30, 5)
        a = stratified_folds(corpus, 5, 2, seed=42)
        b = stratified_folds(corpus, 5, 2, seed=42)
        assert np.array_equal(a.assignment, b.assignment)
        c = stratified_folds(corpus, 5, 2, seed=43)
        assert not np.array_equal(a.assignment, c.assignment)

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ValueError):
            stratified_folds(_mini_corpus(3, 1), 1, 4)

    def test_no_relevant_rejected(self):
        corpus = Corpus(tuple(Citation(f"i{i}", "t", f"a{i}", -1) for i in range(6)))
        with pytest.raises(CorpusError):
            stratified_folds(corpus, 1, 2)

    @settings(max_examples=25, deadline=None)
    @given(
        n_rel=st.integers(min_value=2, max_value=15),
        n_irr=st.integers(min_value=2, max_value=40),
        k=st.integers(min_value=2, max_value=4),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    def test_partition_and_stratification(self, n_rel, n_irr, k, seed):
        n = n_rel + n_irr
        if k > n:
            return
        corpus = _mini_corpus(n, n_rel)
        labels = corpus.labels()
        plan = stratified_folds(corpus, repetitions=2, k=k, seed=seed)
        for rep in range(2):
            folds = [plan.test_indices(rep, f) for f in range(k)]
            merged = np.concatenate(folds)
            assert sorted(merged) == list(range(n))  # partition
            rel_counts = [int(np.sum(labels[f] == 1)) for f in folds]
            assert max(rel_counts) - min(rel_counts) <= 1
            sizes = [f.size for f in folds]
            assert max(sizes) - min(sizes) <= 2  # both strata balanced within 1
