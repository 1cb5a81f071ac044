"""Five-star relevance rating via an ensemble of max-margin models.

Three linear models (a structural AUC-loss SVM and two cost-weighted
hinge SVMs over embedding and uni-bigram features) score the unlabeled
citations.  Their scores are fused into one combined score per citation
from three ingredients: a signed agreement count seeded by the dominant
first member, fractional rank votes, and a normalized mean rank.  Star
cutoffs on the combined score produce the 1..5 rating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .svm import TrainConfig


@dataclass(frozen=True)
class EnsembleMember:
    config: TrainConfig
    feature_kind: str


def default_members() -> tuple[EnsembleMember, ...]:
    """Dominant AUC-loss model on row-normalized embeddings, then the two
    cost-weighted hinge models (embeddings, then uni-bigrams)."""
    return (
        EnsembleMember(TrainConfig(loss="auc", use_intercept=True), "w2v_row"),
        EnsembleMember(TrainConfig(loss="cost_hinge", use_intercept=True), "w2v_row"),
        EnsembleMember(TrainConfig(loss="cost_hinge", use_intercept=True), "unibi"),
    )


@dataclass(frozen=True)
class EnsembleConfig:
    """Members, member vote thresholds, and the score-fusion constants.

    The separation threshold ST must exceed the max rank range MR; that
    gap is what keeps positive-vote scores strictly above zero and the
    negative vote bands pairwise disjoint.
    """

    members: tuple[EnsembleMember, ...] = field(default_factory=default_members)
    member_thresholds: tuple[float, ...] | None = None
    separation_threshold: float = 1000.0
    max_range: float = 800.0
    star_cutoffs: tuple[float, float, float] = (0.0, 2000.0, 2500.0)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("ensemble needs at least one member")
        if self.member_thresholds is None:
            object.__setattr__(self, "member_thresholds", (0.0,) * len(self.members))
        if len(self.member_thresholds) != len(self.members):
            raise ValueError("one vote threshold per member required")
        if not self.separation_threshold > self.max_range:
            raise ValueError("separation threshold must exceed max rank range")
        s3, s4, s5 = self.star_cutoffs
        if not s3 < s4 < s5:
            raise ValueError("star cutoffs must be strictly increasing")


@dataclass(frozen=True)
class CombinedScore:
    """Fused ensemble score for one citation plus its ingredients."""

    citation_id: str
    score: float
    nv: int
    fv: float
    rs: float
    ns: float


@dataclass(frozen=True)
class StarRating:
    citation_id: str
    stars: int
    score: float


def rank_by_score(scores) -> np.ndarray:
    """Ranks 1..U with the highest score ranked U.

    Ties break by input order: the earlier citation gets the higher rank.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("cannot rank an empty score list")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    u = scores.size
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(u, dtype=np.int64)
    ranks[order] = u - np.arange(u)
    return ranks


def fvote(rank: float, u: int) -> float:
    """Fractional vote exp(-(U - r)/U); smooth in (about 0.36, 1.0]."""
    if not 1 <= rank <= u:
        raise ValueError(f"rank {rank} outside 1..{u}")
    return math.exp(-(u - rank) / u)


def norm_rank(mean_rank: float, u: int, max_range: float) -> float:
    """Map a mean rank in [1, U] linearly onto [0, max_range].

    The single-citation case (U=1) is defined to return max_range.
    """
    if not 1 <= mean_rank <= u:
        raise ValueError(f"mean rank {mean_rank} outside 1..{u}")
    if u == 1:
        return float(max_range)
    return (mean_rank - 1.0) / (u - 1.0) * max_range


def generate_combined_score(
    member_scores,
    thresholds=None,
    separation_threshold: float = 1000.0,
    max_range: float = 800.0,
    ids=None,
) -> list[CombinedScore]:
    """Fuse per-member score lists into combined scores.

    Per citation: the dominant member's threshold test initializes the
    vote count nv to +1 or -1; later members can only push nv further in
    that direction (increment while nv>0 on a positive vote, decrement
    while nv<0 on a negative one).  fv sums the members' fractional rank
    votes, ns is the normalized mean rank, and the combined score is
    finv*ST + ns with finv = fv when nv >= 1 and nv itself otherwise.
    """
    s = np.asarray(member_scores, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError("member_scores must be a members x citations matrix")
    m, u = s.shape
    if m < 1 or u < 1:
        raise ValueError("need at least one member and one citation")
    if thresholds is None:
        thresholds = np.zeros(m)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.size != m:
        raise ValueError(f"expected {m} member thresholds, got {thresholds.size}")
    if ids is None:
        ids = [str(i) for i in range(u)]
    if len(ids) != u:
        raise ValueError("ids length must match the number of citations")

    ranks = np.vstack([rank_by_score(s[v]) for v in range(m)])
    votes_pos = s >= thresholds[:, None]

    nv = np.where(votes_pos[0], 1, -1)
    for v in range(1, m):
        nv = np.where(votes_pos[v] & (nv > 0), nv + 1, nv)
        nv = np.where(~votes_pos[v] & (nv < 0), nv - 1, nv)

    fv = np.exp(-(u - ranks) / u).sum(axis=0)
    rs = ranks.mean(axis=0)
    if u == 1:
        ns = np.full(u, float(max_range))
    else:
        ns = (rs - 1.0) / (u - 1.0) * max_range
    finv = np.where(nv >= 1, fv, nv)
    combined = finv * separation_threshold + ns
    return [
        CombinedScore(citation_id=str(ids[i]), score=float(combined[i]), nv=int(nv[i]),
                      fv=float(fv[i]), rs=float(rs[i]), ns=float(ns[i]))
        for i in range(u)
    ]


def member_scores_matrix(labeled: Corpus, unlabeled: Corpus, config: EnsembleConfig, context=None):
    """Train every member on the labeled split and score the unlabeled one."""
    from .methods import FeatureContext, train_member_on_context

    if len(unlabeled) == 0:
        raise ValueError("relrank needs a nonempty unlabeled set")
    if context is None:
        combined = Corpus(labeled.citations + unlabeled.citations, name=labeled.name)
        context = FeatureContext.build(combined)
    rows_l = context.rows(labeled.ids)
    rows_u = context.rows(unlabeled.ids)
    y = labeled.labels()
    if np.any(y == 0):
        raise ValueError("labeled split contains unlabeled citations")
    scores = np.empty((len(config.members), len(unlabeled)))
    for v, member in enumerate(config.members):
        scores[v] = train_member_on_context(context, member, rows_l, y, rows_u)
    return scores, context


def relrank(labeled: Corpus, unlabeled: Corpus, config: EnsembleConfig | None = None,
            context=None) -> list[CombinedScore]:
    """Rate unlabeled citations with the ensemble; sorted by score descending."""
    config = config or EnsembleConfig()
    scores, _ = member_scores_matrix(labeled, unlabeled, config, context)
    combined = generate_combined_score(
        scores,
        thresholds=config.member_thresholds,
        separation_threshold=config.separation_threshold,
        max_range=config.max_range,
        ids=unlabeled.ids,
    )
    return sorted(combined, key=lambda cs: -cs.score)


def assign_stars(combined, config: EnsembleConfig | None = None) -> list[StarRating]:
    """Bucket combined scores into 1..5 stars.

    5/4/3 stars at the configured cutoffs; below the 3-star cutoff, the
    single-negative-vote band (score > MR - 2*ST) gets 2 stars and
    anything lower 1 star, using the disjoint negative score bands.
    """
    config = config or EnsembleConfig()
    s3, s4, s5 = config.star_cutoffs
    two_star_floor = -2.0 * config.separation_threshold + config.max_range
    out = []
    for cs in combined:
        if cs.score >= s5:
            stars = 5
        elif cs.score >= s4:
            stars = 4
        elif cs.score >= s3:
            stars = 3
        elif cs.score > two_star_floor:
            stars = 2
        else:
            stars = 1
        out.append(StarRating(citation_id=cs.citation_id, stars=stars, score=cs.score))
    return out
