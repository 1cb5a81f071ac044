"""Certainty-sampling active-learning simulation.

Each run seeds the labeled pool with a few relevant and irrelevant
citations drawn uniformly at random, then repeatedly retrains the
classifier and reveals the top-scored batch of hidden citations until
every relevant one has surfaced.  Aggregation over repeated runs yields
the screened-fraction statistics and 10%-bin histograms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .methods import METHODS, FeatureContext, MethodSpec, train_method
from .svm import score_citations


@dataclass(frozen=True)
class ALConfig:
    seed_relevant: int = 5
    seed_irrelevant: int = 45
    batch_size: int = 50
    repeats: int = 500
    method: MethodSpec = field(default_factory=lambda: METHODS[21])
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.seed_relevant < 1 or self.seed_irrelevant < 0:
            raise ValueError("seed counts must be positive")


@dataclass(frozen=True)
class ALTrace:
    """Cumulative screened/found counts per iteration of one run.

    Iteration 0 is the random seed; entries afterwards grow by at most
    one batch.  The run ends when every relevant citation is revealed.
    """

    screened: tuple[int, ...]
    found: tuple[int, ...]
    n: int
    n_relevant: int

    def __post_init__(self):
        if self.found[-1] != self.n_relevant:
            raise ValueError("trace must end with all relevant citations found")

    @property
    def fraction_screened(self) -> float:
        return self.screened[-1] / self.n

    def inclusion_curve(self) -> list[tuple[int, int]]:
        """(screened, remaining relevant) points; monotone non-increasing."""
        return [(s, self.n_relevant - f) for s, f in zip(self.screened, self.found)]


def simulate_run(corpus: Corpus, config: ALConfig, context: FeatureContext | None = None,
                 run_seed=0) -> ALTrace:
    """One certainty-sampling run over a fully labeled corpus.

    Labels are hidden from the learner and revealed on selection.  Every
    batch takes the argmax-score hidden citations (certainty sampling);
    the final batch may be smaller than batch_size.
    """
    labels = corpus.labels()
    if np.any(labels == 0):
        raise ValueError("active-learning simulation needs a fully labeled corpus")
    if context is None:
        context = FeatureContext.build(corpus)
    rel = np.flatnonzero(labels == 1)
    irr = np.flatnonzero(labels == -1)
    if rel.size < config.seed_relevant or irr.size < config.seed_irrelevant:
        raise ValueError(
            f"seed needs {config.seed_relevant} relevant / {config.seed_irrelevant} irrelevant "
            f"but corpus has {rel.size} / {irr.size}"
        )
    rng = np.random.default_rng(run_seed)
    revealed = np.zeros(len(corpus), dtype=bool)
    revealed[rng.choice(rel, size=config.seed_relevant, replace=False)] = True
    revealed[rng.choice(irr, size=config.seed_irrelevant, replace=False)] = True

    matrix = context.matrix(config.method.feature_kind)
    n_relevant = int(rel.size)
    screened = [int(revealed.sum())]
    found = [int(np.sum(revealed & (labels == 1)))]
    while found[-1] < n_relevant:
        train_idx = np.flatnonzero(revealed)
        hidden_idx = np.flatnonzero(~revealed)
        model = train_method(config.method, matrix[train_idx], labels[train_idx], matrix[hidden_idx])
        scores = score_citations(model, matrix[hidden_idx])
        order = np.argsort(-scores, kind="stable")
        batch = hidden_idx[order[: config.batch_size]]
        revealed[batch] = True
        screened.append(int(revealed.sum()))
        found.append(int(np.sum(revealed & (labels == 1))))
    return ALTrace(screened=tuple(screened), found=tuple(found),
                   n=len(corpus), n_relevant=n_relevant)


@dataclass(frozen=True)
class ALResult:
    fractions: np.ndarray
    traces: tuple[ALTrace, ...] | None = None

    @property
    def mean_fraction(self) -> float:
        return float(self.fractions.mean())


def simulate(corpus: Corpus, config: ALConfig, context: FeatureContext | None = None,
             keep_traces: bool = False) -> ALResult:
    """Repeat independent runs with counter-derived seeds and aggregate.

    Run r uses the seed sequence (config.seed, r), so per-run results do
    not depend on how many repeats are requested.
    """
    if context is None:
        context = FeatureContext.build(corpus)
    fractions = np.empty(config.repeats)
    traces = [] if keep_traces else None
    for r in range(config.repeats):
        trace = simulate_run(corpus, config, context, run_seed=np.random.SeedSequence([config.seed, r]))
        fractions[r] = trace.fraction_screened
        if keep_traces:
            traces.append(trace)
    return ALResult(fractions=fractions, traces=tuple(traces) if keep_traces else None)


def screened_histogram(fractions, n_bins: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Counts of reviews per 10%-wide screened-fraction bin.

    Fractions must lie in (0, 1]; exactly 1.0 lands in the top bin.
    Returns (counts, bin_edges).
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.size and (np.min(fractions) <= 0.0 or np.max(fractions) > 1.0):
        raise ValueError("screened fractions must lie in (0, 1]")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    counts, _ = np.histogram(fractions, bins=edges)
    return counts, edges
