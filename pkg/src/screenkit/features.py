"""Text featurization: uni-bigram counts and averaged word embeddings.

Two feature families are produced from citation titles and abstracts:
sparse unigram+bigram count vectors over a corpus vocabulary, and dense
vectors obtained by averaging skip-gram word embeddings, optionally
z-normalized per citation (row) or per dimension (column) and rounded to
two decimals.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .corpus import Citation, Corpus

_TOKEN_RE = re.compile(r"[a-z0-9]+")

BIGRAM_SEP = " "


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens in order; no stemming, no stopwords."""
    return _TOKEN_RE.findall(text.lower())


def _unit_terms(citation: Citation) -> list[str]:
    """Unigrams and within-unit bigrams; bigrams never span title/abstract."""
    terms: list[str] = []
    for unit in citation.text_units:
        toks = tokenize(unit)
        terms.extend(toks)
        terms.extend(toks[i] + BIGRAM_SEP + toks[i + 1] for i in range(len(toks) - 1))
    return terms


@dataclass(frozen=True)
class Vocabulary:
    """Term -> contiguous index map with document frequencies."""

    index: dict[str, int]
    doc_freq: np.ndarray = field(repr=False)
    n_docs: int = 0

    @property
    def size(self) -> int:
        return len(self.index)

    def save_tsv(self, path) -> None:
        terms = sorted(self.index, key=self.index.get)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#screenkit-vocab\tv1\tn_docs={self.n_docs}\n")
            for t in terms:
                fh.write(f"{t}\t{self.index[t]}\t{int(self.doc_freq[self.index[t]])}\n")

    @classmethod
    def load_tsv(cls, path) -> "Vocabulary":
        index: dict[str, int] = {}
        dfs: dict[int, int] = {}
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if not header or header[0] != "#screenkit-vocab":
                raise ValueError(f"{path}: not a screenkit vocabulary file")
            n_docs = int(header[2].split("=", 1)[1])
            for line in fh:
                term, idx, df = line.rstrip("\n").split("\t")
                index[term] = int(idx)
                dfs[int(idx)] = int(df)
        doc_freq = np.array([dfs[i] for i in range(len(dfs))], dtype=np.int64)
        return cls(index=index, doc_freq=doc_freq, n_docs=n_docs)


@dataclass(frozen=True)
class SparseVector:
    """(index, count) pairs with strictly increasing indices."""

    indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if self.indices.size != self.counts.size:
            raise ValueError("indices and counts must have equal length")
        if self.indices.size and (np.any(np.diff(self.indices) <= 0) or np.any(self.counts <= 0)):
            raise ValueError("indices must be strictly increasing and counts positive")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)


def build_unibigram_vocab(corpus: Corpus) -> Vocabulary:
    """Vocabulary over every unigram and adjacent bigram in the corpus.

    Indices are assigned in first-seen order over the corpus' stable
    citation order, so the same corpus always yields the same vocabulary.
    """
    index: dict[str, int] = {}
    df = Counter()
    any_tokens = False
    for citation in corpus:
        terms = _unit_terms(citation)
        if terms:
            any_tokens = True
        for t in terms:
            if t not in index:
                index[t] = len(index)
        df.update(set(terms))
    if not any_tokens:
        raise ValueError(f"corpus {corpus.name!r}: no tokens in any citation")
    doc_freq = np.zeros(len(index), dtype=np.int64)
    for t, c in df.items():
        doc_freq[index[t]] = c
    return Vocabulary(index=index, doc_freq=doc_freq, n_docs=len(corpus))


def vectorize_unibigram(citation: Citation, vocab: Vocabulary) -> SparseVector:
    """Counts of in-vocabulary terms; out-of-vocabulary terms are ignored."""
    counts = Counter(vocab.index[t] for t in _unit_terms(citation) if t in vocab.index)
    if not counts:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    idx = np.array(sorted(counts), dtype=np.int64)
    return SparseVector(idx, np.array([counts[i] for i in idx], dtype=np.int64))


def unibigram_matrix(corpus: Corpus, vocab: Vocabulary) -> sp.csr_matrix:
    """Stack per-citation count vectors into an n x |vocab| CSR matrix."""
    indptr = [0]
    indices: list[np.ndarray] = []
    data: list[np.ndarray] = []
    for citation in corpus:
        vec = vectorize_unibigram(citation, vocab)
        indices.append(vec.indices)
        data.append(vec.counts.astype(np.float64))
        indptr.append(indptr[-1] + vec.nnz)
    return sp.csr_matrix(
        (np.concatenate(data) if data else np.empty(0),
         np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(corpus), vocab.size),
    )


@dataclass(frozen=True)
class EmbeddingTable:
    """Word -> d-dimensional vector map from skip-gram training."""

    words: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)
    dim: int = 0
    window: int = 5
    min_count: int = 15
    index: dict[str, int] = field(default_factory=dict, repr=False)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    def vector(self, word: str) -> np.ndarray:
        if word not in self.index:
            raise ValueError(f"word not in embedding table: {word!r}")
        return self.vectors[self.index[word]]

    def save_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"#screenkit-embeddings\tv1\tdim={self.dim}\twindow={self.window}\tmin_count={self.min_count}\n")
            for w, row in zip(self.words, self.vectors):
                fh.write(w + "\t" + "\t".join(float(v).hex() for v in row) + "\n")

    @classmethod
    def load_tsv(cls, path) -> "EmbeddingTable":
        words: list[str] = []
        rows: list[list[float]] = []
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if not header or header[0] != "#screenkit-embeddings":
                raise ValueError(f"{path}: not a screenkit embeddings file")
            meta = dict(kv.split("=", 1) for kv in header[2:])
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                words.append(parts[0])
                rows.append([float.fromhex(v) for v in parts[1:]])
        vectors = np.asarray(rows, dtype=np.float64)
        return cls(
            words=tuple(words),
            vectors=vectors,
            dim=int(meta["dim"]),
            window=int(meta["window"]),
            min_count=int(meta["min_count"]),
            index={w: i for i, w in enumerate(words)},
        )


def _sentences(corpora) -> list[list[str]]:
    sents = []
    for corpus in corpora:
        for citation in corpus:
            for unit in citation.text_units:
                toks = tokenize(unit)
                if toks:
                    sents.append(toks)
    return sents


def train_skipgram(
    corpora,
    dim: int = 100,
    window: int = 5,
    min_count: int = 15,
    epochs: int = 5,
    negatives: int = 5,
    learning_rate: float = 0.025,
    seed: int = 0,
) -> EmbeddingTable:
    """Train skip-gram-with-negative-sampling embeddings on citation text.

    Titles and abstracts are separate sentences.  Words below ``min_count``
    are dropped before windowing.  Negative targets are drawn from the
    unigram distribution raised to 0.75.  Training is single-threaded and
    bit-reproducible for a fixed seed.
    """
    if dim < 2:
        raise ValueError(f"embedding dim must be >= 2, got {dim}")
    if isinstance(corpora, Corpus):
        corpora = [corpora]
    sents = _sentences(corpora)
    counts = Counter(t for s in sents for t in s)
    kept = sorted((w for w, c in counts.items() if c >= min_count), key=lambda w: (-counts[w], w))
    if not kept:
        raise ValueError(f"no word reaches min_count={min_count} (corpus has {sum(counts.values())} tokens)")
    index = {w: i for i, w in enumerate(kept)}

    token_ids: list[int] = []
    offsets = [0]
    for s in sents:
        ids = [index[t] for t in s if t in index]
        if len(ids) > 1:
            token_ids.extend(ids)
            offsets.append(len(token_ids))
    tokens = np.asarray(token_ids, dtype=np.int32)
    offs = np.asarray(offsets, dtype=np.int64)

    freq = np.array([counts[w] for w in kept], dtype=np.float64) ** 0.75
    cdf = np.cumsum(freq / freq.sum())
    table_size = max(100_000, 50 * len(kept))
    noise_table = np.searchsorted(cdf, (np.arange(table_size) + 0.5) / table_size).astype(np.int32)

    rng = np.random.default_rng(seed)
    w_in = ((rng.random((len(kept), dim)) - 0.5) / dim).astype(np.float64)
    w_out = np.zeros((len(kept), dim), dtype=np.float64)
    _kernels.sgns_train(
        tokens, offs, w_in, w_out, noise_table,
        window, negatives, epochs, learning_rate, 1e-4, seed & 0x7FFFFFFF,
    )
    return EmbeddingTable(
        words=tuple(kept), vectors=w_in, dim=dim, window=window, min_count=min_count, index=index,
    )


def embed_citation(citation: Citation, table: EmbeddingTable) -> tuple[np.ndarray, bool]:
    """Mean embedding of the citation's in-table tokens.

    Returns (vector, covered); citations with no in-table token get the
    zero vector and covered=False rather than failing mid-pipeline.
    """
    rows = [table.index[t] for unit in citation.text_units for t in tokenize(unit) if t in table.index]
    if not rows:
        return np.zeros(table.dim), False
    return table.vectors[rows].mean(axis=0), True


@dataclass(frozen=True)
class DenseMatrix:
    """n x d citation-vector matrix tagged with its normalization state."""

    values: np.ndarray
    normalization: str = "raw"
    coverage: np.ndarray | None = None

    @property
    def shape(self):
        return self.values.shape


def embed_corpus(corpus: Corpus, table: EmbeddingTable) -> DenseMatrix:
    vectors = np.empty((len(corpus), table.dim))
    covered = np.empty(len(corpus), dtype=bool)
    for i, citation in enumerate(corpus):
        vectors[i], covered[i] = embed_citation(citation, table)
    return DenseMatrix(values=vectors, normalization="raw", coverage=covered)


def normalize(matrix: DenseMatrix, mode: str) -> DenseMatrix:
    """Z-normalize per row or per column, then round to 2 decimals.

    Population std is used; zero-variance rows/columns come out as 0.
    """
    if mode not in ("row", "col"):
        raise ValueError(f"normalization mode must be 'row' or 'col', got {mode!r}")
    if matrix.normalization != "raw":
        raise ValueError(f"matrix is already {matrix.normalization}-normalized")
    x = matrix.values
    axis = 1 if mode == "row" else 0
    mean = x.mean(axis=axis, keepdims=True)
    std = x.std(axis=axis, keepdims=True)
    out = np.where(std > 0, (x - mean) / np.where(std > 0, std, 1.0), 0.0)
    return DenseMatrix(values=np.round(out, 2), normalization=mode, coverage=matrix.coverage)


def cosine(table: EmbeddingTable, w1: str, w2: str) -> float:
    v1, v2 = table.vector(w1), table.vector(w2)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0 or n2 == 0:
        return 0.0
    return float(np.dot(v1, v2) / (n1 * n2))


def _top_k(table: EmbeddingTable, target: np.ndarray, k: int, exclude: set[str]) -> list[tuple[str, float]]:
    norms = np.linalg.norm(table.vectors, axis=1)
    tnorm = np.linalg.norm(target)
    denom = np.where(norms > 0, norms, 1.0) * (tnorm if tnorm > 0 else 1.0)
    sims = table.vectors @ target / denom
    order = np.argsort(-sims, kind="stable")
    out = []
    for i in order:
        w = table.words[i]
        if w in exclude:
            continue
        out.append((w, float(sims[i])))
        if len(out) == k:
            break
    return out


def neighbors(table: EmbeddingTable, word: str, k: int) -> list[tuple[str, float]]:
    """Top-k words by cosine similarity, excluding the query word."""
    return _top_k(table, table.vector(word), k, {word})


def analogy(table: EmbeddingTable, a: str, b: str, c: str, k: int) -> list[tuple[str, float]]:
    """Words nearest to vector(b) - vector(a) + vector(c), excluding a, b, c."""
    target = table.vector(b) - table.vector(a) + table.vector(c)
    return _top_k(table, target, k, {a, b, c})


def similarity_query(table: EmbeddingTable, kind: str, *args):
    """Dispatch cosine / neighbors / analogy queries by name (CLI surface)."""
    if kind == "cosine":
        return cosine(table, *args)
    if kind == "neighbors":
        word, k = args
        return neighbors(table, word, int(k))
    if kind == "analogy":
        a, b, c, k = args
        return analogy(table, a, b, c, int(k))
    raise ValueError(f"unknown similarity query kind: {kind!r}")
