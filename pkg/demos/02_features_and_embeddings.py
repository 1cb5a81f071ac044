"""Feature extraction: uni-bigram counts and skip-gram embedding averages.

Trains a small embedding table on corpus text, inspects similarity
queries, and compares the two feature families' shapes.
"""

import numpy as np

from screenkit import (
    build_unibigram_vocab,
    embed_corpus,
    neighbors,
    normalize,
    train_skipgram,
    unibigram_matrix,
)
from screenkit.features import cosine
from screenkit.synth import SynthSpec, make_corpus

corpus = make_corpus(SynthSpec(n=600, n_relevant=90, name="feat"), seed=3)

# %% Sparse counts over unigrams + bigrams: high-dimensional by design.
vocab = build_unibigram_vocab(corpus)
counts = unibigram_matrix(corpus, vocab)
print(f"uni-bigram matrix: {counts.shape[0]} x {counts.shape[1]}, "
      f"{counts.nnz / counts.shape[0]:.0f} nonzeros per citation")

# %% Skip-gram embeddings on the same text (titles and abstracts are
# separate sentences). min_count prunes rare words.
table = train_skipgram(corpus, dim=64, window=5, min_count=10, epochs=5, seed=0)
print(f"embedding table: {len(table)} words x {table.dim} dims")

# Topic words that co-occur inside relevant abstracts cluster together.
print("cos(top000, top001) =", round(cosine(table, "top000", "top001"), 3))
print("cos(top000, top025) =", round(cosine(table, "top000", "top025"), 3))
print("nearest to top000:", [w for w, _ in neighbors(table, "top000", 5)])

# %% Citation vectors: mean of word vectors, then z-normalized per row
# and rounded to two decimals.
raw = embed_corpus(corpus, table)
row = normalize(raw, "row")
print(f"coverage: {raw.coverage.mean():.1%} of citations have in-table words")
sample = row.values[0]
print(f"row 0: mean {sample.mean():+.3f}, std {sample.std():.3f} (z-scored, 2 decimals)")
assert np.all(np.round(row.values, 2) == row.values)
