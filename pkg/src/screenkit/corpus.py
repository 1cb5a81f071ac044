"""Citation data model, ingestion, prevalence accounting and stratified folds."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

RELEVANT = 1
IRRELEVANT = -1

#: Prevalence boundaries (percent).  The three observed ranges
#: (0.22-5.92, 6.79-13.07, 13.45-40.08) leave gaps, so the groups are
#: extended to contiguous half-open intervals at the lower boundary of
#: the next group: Low < 6.79 <= Mid < 13.45 <= High.
_MID_LOWER_PCT = 6.79
_HIGH_LOWER_PCT = 13.45


class CorpusError(ValueError):
    """Raised for malformed, inconsistent or unusable citation data."""


class PrevalenceGroup(Enum):
    LOW = "low"
    MID = "mid"
    HIGH = "high"

    @classmethod
    def from_fraction(cls, fraction: float) -> "PrevalenceGroup":
        """Map a prevalence fraction in (0, 1] to its group."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"prevalence must be in (0, 1], got {fraction}")
        pct = 100.0 * fraction
        if pct < _MID_LOWER_PCT:
            return cls.LOW
        if pct < _HIGH_LOWER_PCT:
            return cls.MID
        return cls.HIGH


@dataclass(frozen=True)
class Citation:
    """A single title+abstract record with an optional relevance label.

    ``label`` is +1 (relevant), -1 (irrelevant) or None (unlabeled).
    """

    id: str
    title: str
    abstract: str
    label: int | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("citation id must be nonempty")
        if not (self.title + self.abstract).strip():
            raise CorpusError(f"citation {self.id!r}: title and abstract are both empty")
        if self.label is not None and self.label not in (RELEVANT, IRRELEVANT):
            raise CorpusError(f"citation {self.id!r}: label must be +1 or -1, got {self.label!r}")

    @property
    def text_units(self) -> tuple[str, str]:
        """Title and abstract as distinct text units (n-grams never cross them)."""
        return (self.title, self.abstract)


@dataclass(frozen=True)
class Corpus:
    """An ordered, duplicate-free collection of citations."""

    citations: tuple[Citation, ...]
    name: str = "corpus"

    def __post_init__(self):
        object.__setattr__(self, "citations", tuple(self.citations))
        seen = set()
        for c in self.citations:
            if c.id in seen:
                raise CorpusError(f"duplicate id: {c.id}")
            seen.add(c.id)

    def __len__(self) -> int:
        return len(self.citations)

    def __iter__(self):
        return iter(self.citations)

    def __getitem__(self, i):
        return self.citations[i]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.citations)

    def labels(self) -> np.ndarray:
        """Label array with 0 for unlabeled citations."""
        return np.array([c.label if c.label is not None else 0 for c in self.citations], dtype=np.int64)

    def labeled(self) -> "Corpus":
        return Corpus(tuple(c for c in self.citations if c.label is not None), name=self.name)

    def unlabeled(self) -> "Corpus":
        return Corpus(tuple(c for c in self.citations if c.label is None), name=self.name)

    @property
    def n_labeled(self) -> int:
        return sum(1 for c in self.citations if c.label is not None)

    @property
    def n_relevant(self) -> int:
        return sum(1 for c in self.citations if c.label == RELEVANT)

    def subset(self, indices) -> "Corpus":
        return Corpus(tuple(self.citations[i] for i in indices), name=self.name)


def _parse_label(raw, where: str):
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise CorpusError(f"{where}: label must be 1, -1 or empty, got {raw!r}")
    if value not in (RELEVANT, IRRELEVANT):
        raise CorpusError(f"{where}: label must be 1, -1 or empty, got {raw!r}")
    return value


def load_corpus(path, format: str = "jsonl", name: str | None = None, label_field: str = "label") -> Corpus:
    """Load a corpus from a JSONL or CSV file.

    JSONL: one object per line with fields id, title, abstract and an
    optional label in {1, -1, null}.  CSV: header id,title,abstract,label
    with an empty label cell meaning unlabeled.
    """
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown corpus format: {format!r}")
    path = str(path)
    corpus_name = name if name is not None else path.rsplit("/", 1)[-1].split(".")[0]

    def build(rec, lineno):
        try:
            return Citation(
                id=str(rec["id"] if rec["id"] is not None else ""),
                title=str(rec["title"] or ""),
                abstract=str(rec["abstract"] or ""),
                label=_parse_label(rec.get(label_field), f"line {lineno}"),
            )
        except CorpusError as exc:
            raise CorpusError(f"line {lineno}: {exc}") if "line" not in str(exc) else exc

    citations: list[Citation] = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"line {lineno}: malformed JSON ({exc.msg})")
                if not isinstance(rec, dict) or "id" not in rec or "title" not in rec or "abstract" not in rec:
                    raise CorpusError(f"line {lineno}: record must have id, title and abstract")
                citations.append(build(rec, lineno))
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"id", "title", "abstract"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise CorpusError("CSV header must contain id,title,abstract[,label]")
            for lineno, rec in enumerate(reader, start=2):
                citations.append(build(rec, lineno))
    if not citations:
        raise CorpusError(f"{path}: empty corpus")
    return Corpus(tuple(citations), name=corpus_name)


def prevalence(corpus: Corpus) -> tuple[float, PrevalenceGroup]:
    """Fraction of relevant citations and its prevalence group.

    Requires a fully labeled corpus.
    """
    if len(corpus) == 0:
        raise CorpusError("cannot compute prevalence of an empty corpus")
    unlabeled = [c.id for c in corpus if c.label is None]
    if unlabeled:
        raise CorpusError(f"corpus has {len(unlabeled)} unlabeled citations (first: {unlabeled[0]})")
    fraction = corpus.n_relevant / len(corpus)
    return fraction, PrevalenceGroup.from_fraction(fraction)


@dataclass(frozen=True)
class FoldPlan:
    """Stratified test-fold assignments for repeated k-fold CV.

    ``assignment[r, i]`` is the fold index of citation i in repetition r;
    identical seeds yield identical assignments.
    """

    repetitions: int
    k: int
    seed: int
    ids: tuple[str, ...]
    assignment: np.ndarray = field(repr=False)

    def test_indices(self, repetition: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repetition] == fold)

    def train_indices(self, repetition: int, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment[repetition] != fold)

    def test_ids(self, repetition: int, fold: int) -> tuple[str, ...]:
        return tuple(self.ids[i] for i in self.test_indices(repetition, fold))

    def splits(self):
        """Yield (repetition, fold, train_indices, test_indices) in order."""
        for r in range(self.repetitions):
            for f in range(self.k):
                yield r, f, self.train_indices(r, f), self.test_indices(r, f)


def stratified_folds(corpus: Corpus, repetitions: int, k: int, seed: int = 0) -> FoldPlan:
    """Assign citations to k stratified folds, ``repetitions`` times.

    Within every repetition the folds partition the corpus and each fold's
    relevant count differs from perfect stratification by at most one.
    """
    n = len(corpus)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds corpus size n={n}")
    labels = corpus.labels()
    if np.any(labels == 0):
        raise CorpusError("stratified folds require a fully labeled corpus")
    rel = np.flatnonzero(labels == RELEVANT)
    irr = np.flatnonzero(labels == IRRELEVANT)
    if rel.size == 0:
        raise CorpusError("corpus has no relevant citations; cannot stratify")
    if rel.size < k:
        import warnings

        warnings.warn(f"only {rel.size} relevant citations for k={k} folds; some folds get none")
    rng = np.random.default_rng(seed)
    assignment = np.empty((repetitions, n), dtype=np.int64)
    for r in range(repetitions):
        for pool in (rel, irr):
            perm = rng.permutation(pool)
            assignment[r, perm] = np.arange(perm.size) % k
    return FoldPlan(repetitions=repetitions, k=k, seed=seed, ids=corpus.ids, assignment=assignment)


def perfect_strata(n_relevant: int, k: int) -> tuple[int, int]:
    """Floor/ceil of relevant-per-fold under perfect stratification."""
    return math.floor(n_relevant / k), math.ceil(n_relevant / k)
