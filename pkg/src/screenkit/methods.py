"""Method table and shared featurization context.

The 18 evaluated configurations pair a feature kind (uni-bigram counts,
row- or column-normalized embedding averages) with a training setup.
``FeatureContext`` builds every feature view of a corpus once -- the
vocabulary, the embedding table trained on all titles and abstracts, and
the normalized matrices -- so fold loops only slice rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import features as feats
from . import svm
from .corpus import Corpus

FEATURE_KINDS = ("unibi", "w2v_row", "w2v_col")


class FeatureContext:
    """All feature views of one corpus, keyed by citation id.

    Matrices are built lazily and cached; rows follow the corpus order.
    Test labels never enter the construction: the vocabulary, embedding
    table and normalization statistics use text only, which is available
    for the whole pool in a screening setting.
    """

    def __init__(self, corpus: Corpus, dim: int = 100, window: int = 5, min_count: int = 15,
                 epochs: int = 5, seed: int = 0):
        self.corpus = corpus
        self.dim = dim
        self.window = window
        self.min_count = min_count
        self.epochs = epochs
        self.seed = seed
        self._row_of = {cid: i for i, cid in enumerate(corpus.ids)}
        self._vocab = None
        self._table = None
        self._cache: dict[str, object] = {}

    @classmethod
    def build(cls, corpus: Corpus, **kwargs) -> "FeatureContext":
        return cls(corpus, **kwargs)

    @property
    def vocabulary(self) -> feats.Vocabulary:
        if self._vocab is None:
            self._vocab = feats.build_unibigram_vocab(self.corpus)
        return self._vocab

    @property
    def embedding_table(self) -> feats.EmbeddingTable:
        if self._table is None:
            self._table = feats.train_skipgram(
                self.corpus, dim=self.dim, window=self.window,
                min_count=self.min_count, epochs=self.epochs, seed=self.seed,
            )
        return self._table

    def rows(self, ids) -> np.ndarray:
        try:
            return np.array([self._row_of[cid] for cid in ids], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"citation id not in this context's corpus: {exc.args[0]!r}")

    def matrix(self, kind: str):
        """Full-corpus feature matrix for one kind (CSR for unibi, dense else)."""
        if kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {kind!r}; expected one of {FEATURE_KINDS}")
        if kind not in self._cache:
            if kind == "unibi":
                self._cache[kind] = feats.unibigram_matrix(self.corpus, self.vocabulary)
            else:
                if "w2v_raw" not in self._cache:
                    self._cache["w2v_raw"] = feats.embed_corpus(self.corpus, self.embedding_table)
                raw = self._cache["w2v_raw"]
                mode = "row" if kind == "w2v_row" else "col"
                self._cache[kind] = feats.normalize(raw, mode).values
        return self._cache[kind]


@dataclass(frozen=True)
class MethodSpec:
    """One evaluated configuration: integer id, feature kind, training setup."""

    id: int
    label: str
    feature_kind: str
    config: svm.TrainConfig
    trainer: Callable | None = None


def _spec(mid, label, kind, loss, intercept):
    return MethodSpec(mid, label, kind, svm.TrainConfig(loss=loss, use_intercept=intercept))


#: The evaluated method family.  Ids 1-11 use uni-bigram counts, 21-25
#: row-normalized embeddings, 31-35 column-normalized embeddings.
METHODS: dict[int, MethodSpec] = {
    m.id: m
    for m in (
        _spec(1, "structural-auc b=0 / unibi", "unibi", "auc", False),
        _spec(2, "structural-auc b=1 / unibi", "unibi", "auc", True),
        _spec(3, "structural-kld b=1 / unibi", "unibi", "kld", True),
        _spec(4, "structural-quadmean b=1 / unibi", "unibi", "quadmean", True),
        _spec(5, "svm default / unibi", "unibi", "hinge", True),
        _spec(6, "cost-hinge J b=0 / unibi", "unibi", "cost_hinge", False),
        _spec(7, "cost-hinge J b=1 / unibi", "unibi", "cost_hinge", True),
        _spec(11, "transductive / unibi", "unibi", "transductive", True),
        _spec(21, "structural-auc b=1 / w2v-row", "w2v_row", "auc", True),
        _spec(22, "structural-kld b=1 / w2v-row", "w2v_row", "kld", True),
        _spec(23, "structural-quadmean b=1 / w2v-row", "w2v_row", "quadmean", True),
        _spec(24, "cost-hinge J b=0 / w2v-row", "w2v_row", "cost_hinge", False),
        _spec(25, "cost-hinge J b=1 / w2v-row", "w2v_row", "cost_hinge", True),
        _spec(31, "structural-auc b=1 / w2v-col", "w2v_col", "auc", True),
        _spec(32, "structural-kld b=1 / w2v-col", "w2v_col", "kld", True),
        _spec(33, "structural-quadmean b=1 / w2v-col", "w2v_col", "quadmean", True),
        _spec(34, "cost-hinge J b=0 / w2v-col", "w2v_col", "cost_hinge", False),
        _spec(35, "cost-hinge J b=1 / w2v-col", "w2v_col", "cost_hinge", True),
    )
}


def resolve_methods(ids) -> list[MethodSpec]:
    out = []
    for mid in ids:
        if mid not in METHODS:
            raise ValueError(f"unknown method id {mid}; known: {sorted(METHODS)}")
        out.append(METHODS[mid])
    return out


def _slice_rows(matrix, rows: np.ndarray):
    return matrix[rows]


def train_method(spec: MethodSpec, x_train, y_train, x_unlabeled=None) -> svm.LinearModel:
    """Train one method on a prepared feature split."""
    if spec.trainer is not None:
        return spec.trainer(x_train, y_train, x_unlabeled)
    if spec.config.loss == "transductive":
        return svm.train_transductive(x_train, y_train, x_unlabeled, spec.config)
    return svm.train(x_train, y_train, spec.config)


def train_member_on_context(context: FeatureContext, member, rows_train: np.ndarray,
                            y_train: np.ndarray, rows_score: np.ndarray) -> np.ndarray:
    """Train an ensemble member on context rows and score another row set."""
    matrix = context.matrix(member.feature_kind)
    model = svm.train(
        _slice_rows(matrix, rows_train), y_train, member.config,
        features_unlabeled=_slice_rows(matrix, rows_score),
    )
    return svm.score_citations(model, _slice_rows(matrix, rows_score))
