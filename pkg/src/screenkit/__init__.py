"""screenkit: abstract-screening classifiers, star ratings and evaluation."""

from .corpus import (
    Citation,
    Corpus,
    CorpusError,
    FoldPlan,
    PrevalenceGroup,
    load_corpus,
    prevalence,
    stratified_folds,
)
from .features import (
    DenseMatrix,
    EmbeddingTable,
    SparseVector,
    Vocabulary,
    analogy,
    build_unibigram_vocab,
    cosine,
    embed_citation,
    embed_corpus,
    neighbors,
    normalize,
    similarity_query,
    tokenize,
    train_skipgram,
    unibigram_matrix,
    vectorize_unibigram,
)
from .svm import (
    ContingencyTable,
    LinearModel,
    TrainConfig,
    contingency_loss,
    default_c,
    find_most_violated,
    load_model,
    resolve_j,
    save_model,
    score_citations,
    train,
    train_multivariate,
    train_transductive,
    train_weighted_hinge,
)
from .relrank import (
    CombinedScore,
    EnsembleConfig,
    EnsembleMember,
    StarRating,
    assign_stars,
    fvote,
    generate_combined_score,
    norm_rank,
    rank_by_score,
    relrank,
)
from .metrics import (
    EvalInput,
    MetricReport,
    classification_metrics,
    compute_report,
    confusion,
    ranking_auc,
    ranking_auprc,
    screening_metrics,
)
from .stats import (
    ExperimentGrid,
    RankGroups,
    anova_two_factor,
    equivalence_groups,
    lsu_select,
    paired_t_test,
    run_experiment_grid,
)
from .active import ALConfig, ALResult, ALTrace, screened_histogram, simulate, simulate_run
from .methods import METHODS, FeatureContext, MethodSpec, resolve_methods

__version__ = "0.1.0"
