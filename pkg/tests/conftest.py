import json

import numpy as np
import pytest

from screenkit.corpus import Citation, Corpus
from screenkit.synth import SynthSpec, make_corpus


@pytest.fixture
def tiny_corpus() -> Corpus:
    return Corpus((
        Citation("a", "Liver cirrhosis outcomes", "randomized trial of liver therapy", 1),
        Citation("b", "Asthma inhaler study", "inhaler dosing in adults", -1),
        Citation("c", "Liver fibrosis imaging", "elastography versus biopsy", 1),
        Citation("d", "Migraine prevention", "topiramate dose response", -1),
        Citation("e", "Hepatic screening", "ultrasound screening of the liver", -1),
    ), name="tiny")


@pytest.fixture
def small_labeled_corpus() -> Corpus:
    return make_corpus(SynthSpec(n=160, n_relevant=24, name="small",
                                 abstract_len=(30, 50)), seed=11)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return str(path)


def corpus_records(corpus, hide_labels_for=()):
    hide = set(hide_labels_for)
    return [
        {
            "id": c.id,
            "title": c.title,
            "abstract": c.abstract,
            "label": None if c.id in hide else c.label,
        }
        for c in corpus
    ]


@pytest.fixture
def jsonl_writer(tmp_path):
    def _write(records, name="corpus.jsonl"):
        return write_jsonl(tmp_path / name, records)

    return _write


def random_blobs(seed, n=200, d=12, n_pos=20, sep=1.2):
    """Linearly-structured imbalanced point clouds for SVM tests."""
    rng = np.random.default_rng(seed)
    pos = rng.normal(sep, 1.0, (n_pos, d))
    neg = rng.normal(-0.2, 1.0, (n - n_pos, d))
    x = np.vstack([pos, neg])
    y = np.array([1] * n_pos + [-1] * (n - n_pos))
    perm = rng.permutation(n)
    return x[perm], y[perm]
