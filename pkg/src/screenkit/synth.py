"""Seeded synthetic screening corpora.

Generates citation corpora with a controllable relevance signal: both
classes share a background vocabulary and a topic vocabulary, but
relevant citations lean toward one half of the topic words and
irrelevant ones toward the other.  ``lean`` sets how strongly (0.5 means
no signal, 1.0 means disjoint halves), so tasks range from hopeless to
margin-separable.  Includes stand-ins matched in size and prevalence to
the 15 public drug-class review datasets (C1-C15) for benchmark-shaped
experiments when the originals are not on disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Citation, Corpus

#: (total citations, relevant citations) of the public C1-C15 reviews.
COHEN_REVIEW_SIZES: dict[str, tuple[int, int]] = {
    "C1": (2544, 41), "C2": (845, 20), "C3": (296, 16), "C4": (899, 146),
    "C5": (1965, 42), "C6": (1113, 100), "C7": (368, 80), "C8": (343, 41),
    "C9": (1914, 15), "C10": (503, 136), "C11": (1330, 51), "C12": (1643, 9),
    "C13": (3377, 85), "C14": (660, 24), "C15": (306, 40),
}

#: Reviews below 5.92% prevalence.
LOW_PREVALENCE_REVIEWS = ("C1", "C2", "C3", "C5", "C9", "C11", "C12", "C13", "C14")


@dataclass(frozen=True)
class SynthSpec:
    """Shape and difficulty of a generated corpus.

    ``topic_rate`` is the per-token probability of drawing a topic word
    instead of a background word; ``lean`` is the probability that a
    topic draw comes from the class's own half of the topic vocabulary.
    """

    n: int
    n_relevant: int
    background_size: int = 900
    topic_size: int = 40
    title_len: int = 8
    abstract_len: tuple[int, int] = (60, 120)
    topic_rate: float = 0.30
    lean: float = 0.75
    name: str = "synthetic"

    def __post_init__(self):
        if not 0.5 <= self.lean <= 1.0:
            raise ValueError("lean must be in [0.5, 1.0]")
        if self.topic_size % 2:
            raise ValueError("topic_size must be even (two halves)")


def _zipf_weights(size: int) -> np.ndarray:
    w = 1.0 / np.arange(1, size + 1)
    return w / w.sum()


def _make_doc(rng, length, bg_words, bg_weights, own_half, other_half, topic_rate, lean):
    kinds = rng.random(length)
    own = rng.random(length) < lean
    out = []
    for i in range(length):
        if kinds[i] < topic_rate:
            half = own_half if own[i] else other_half
            out.append(half[rng.integers(len(half))])
        else:
            out.append(bg_words[rng.choice(len(bg_words), p=bg_weights)])
    return " ".join(out)


def make_corpus(spec: SynthSpec, seed: int = 0) -> Corpus:
    """Generate a labeled corpus; relevance assignment and text are seeded."""
    if spec.n_relevant > spec.n:
        raise ValueError("n_relevant cannot exceed n")
    rng = np.random.default_rng(seed)
    background = [f"bg{i:04d}" for i in range(spec.background_size)]
    half = spec.topic_size // 2
    rel_half = [f"top{i:03d}" for i in range(half)]
    irr_half = [f"top{i:03d}" for i in range(half, spec.topic_size)]
    bg_weights = _zipf_weights(spec.background_size)

    labels = np.full(spec.n, -1, dtype=np.int64)
    labels[rng.choice(spec.n, size=spec.n_relevant, replace=False)] = 1
    citations = []
    lo, hi = spec.abstract_len
    for i in range(spec.n):
        own, other = (rel_half, irr_half) if labels[i] == 1 else (irr_half, rel_half)
        title = _make_doc(rng, spec.title_len, background, bg_weights,
                          own, other, spec.topic_rate, spec.lean)
        abstract = _make_doc(rng, int(rng.integers(lo, hi + 1)), background, bg_weights,
                             own, other, spec.topic_rate, spec.lean)
        citations.append(Citation(
            id=f"{spec.name}-{i:05d}", title=title, abstract=abstract, label=int(labels[i]),
        ))
    return Corpus(tuple(citations), name=spec.name)


def make_separable_corpus(n: int, n_relevant: int, seed: int = 0, name: str = "separable") -> Corpus:
    """Disjoint topic halves at a high topic rate: margin-separable classes."""
    spec = SynthSpec(n=n, n_relevant=n_relevant, topic_rate=0.5, lean=1.0,
                     topic_size=20, name=name)
    return make_corpus(spec, seed=seed)


def cohen_standin(review: str, seed: int = 0, lean: float | None = None) -> Corpus:
    """Synthetic corpus matching one public review's size and prevalence.

    The default topic lean is calibrated per corpus shape: embedding
    signal scales with total token count and classifier signal with the
    number of relevant examples, so small or very-low-count reviews get
    a stronger lean to land in the same hard-but-learnable regime as
    the large ones.
    """
    if review not in COHEN_REVIEW_SIZES:
        raise ValueError(f"unknown review {review!r}; known: {sorted(COHEN_REVIEW_SIZES)}")
    n, n_rel = COHEN_REVIEW_SIZES[review]
    if lean is None:
        lean = 0.80 if (n < 600 or n_rel < 25) else 0.75
    spec = SynthSpec(n=n, n_relevant=n_rel, name=review, lean=lean)
    return make_corpus(spec, seed=seed)


def cohen_standins(reviews=None, seed: int = 0, lean: float | None = None) -> list[Corpus]:
    reviews = list(reviews) if reviews is not None else sorted(
        COHEN_REVIEW_SIZES, key=lambda r: int(r[1:])
    )
    return [cohen_standin(r, seed=seed + i, lean=lean) for i, r in enumerate(reviews)]
