"""Corpus ingestion, prevalence groups, and stratified CV folds.

Builds a synthetic screening corpus, round-trips it through JSONL, and
shows how the fold generator keeps the relevant citations balanced.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from screenkit import load_corpus, prevalence, stratified_folds
from screenkit.synth import SynthSpec, make_corpus

# Generate a review-shaped corpus: 800 citations, 64 relevant (8%).
corpus = make_corpus(SynthSpec(n=800, n_relevant=64, name="demo"), seed=1)
print(f"{corpus.name}: {len(corpus)} citations, {corpus.n_relevant} relevant")

# %% Round-trip through the JSONL interchange format.
workdir = Path(tempfile.mkdtemp())
path = workdir / "demo.jsonl"
with open(path, "w") as fh:
    for c in corpus:
        fh.write(json.dumps({"id": c.id, "title": c.title,
                             "abstract": c.abstract, "label": c.label}) + "\n")
loaded = load_corpus(path)
assert loaded.ids == corpus.ids

frac, group = prevalence(loaded)
print(f"prevalence {100 * frac:.2f}% -> {group.value} group")

# %% Repeated stratified 2-fold assignment.
plan = stratified_folds(loaded, repetitions=5, k=2, seed=0)
labels = loaded.labels()
for rep in range(2):
    counts = [int(np.sum(labels[plan.test_indices(rep, f)] == 1)) for f in range(2)]
    print(f"repetition {rep}: relevant per fold = {counts}")

# Every citation serves as test data exactly once per repetition.
seen = np.zeros(len(loaded), dtype=int)
for fold in range(2):
    seen[plan.test_indices(0, fold)] += 1
assert np.all(seen == 1)
print("fold partition verified")
