"""Linear max-margin classifiers for imbalanced screening data.

Four training families share one linear-model representation: the plain
hinge SVM, the cost-weighted hinge (false negatives on the minority class
penalized J times more), a transductive SVM using pseudo-label switching,
and structural training against multivariate contingency losses (swapped
pairs / AUC, smoothed KL divergence of class proportions, quadratic-mean
recall loss) via a one-slack cutting-plane loop.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import _kernels

HINGE_LOSSES = ("hinge", "cost_hinge")
MULTIVARIATE_LOSSES = ("auc", "kld", "quadmean")
LOSSES = HINGE_LOSSES + MULTIVARIATE_LOSSES + ("transductive",)

#: Multivariate losses enter the cutting-plane problem on a 0..100 scale,
#: which makes the default C rule for structural training (base C times
#: n/100) line up with the per-instance hinge default.
LOSS_SCALE = 100.0

MODEL_FORMAT = "screenkit-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Configuration for one classifier of the method family.

    ``use_intercept`` is the b=0/1 switch: whether a trained intercept is
    part of the decision function.  ``cost_c`` and ``j_ratio`` accept
    "auto", which resolves to the mean-norm rule and the class-count
    ratio respectively at training time.
    """

    loss: str
    use_intercept: bool = True
    cost_c: float | str = "auto"
    j_ratio: float | str = "auto"
    epsilon: float | None = None
    max_iters: int | None = None

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")

    def resolved_epsilon(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 0.01

    def resolved_max_iters(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 200 if self.loss in MULTIVARIATE_LOSSES else 1000


@dataclass(frozen=True)
class LinearModel:
    """Trained hyperplane: weights, optional intercept, decision threshold."""

    weights: np.ndarray = field(repr=False)
    intercept: float
    config: TrainConfig
    decision_threshold: float = 0.0
    resolved_c: float = 1.0
    resolved_j: float = 1.0
    objective_history: tuple = ()
    violation_history: tuple = ()
    final_slack: float = 0.0
    n_iterations: int = 0
    converged: bool = True

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class ContingencyTable:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("contingency counts must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _row_norms(features) -> np.ndarray:
    if sp.issparse(features):
        return np.sqrt(np.asarray(features.multiply(features).sum(axis=1)).ravel())
    return np.linalg.norm(np.asarray(features, dtype=np.float64), axis=1)


def default_c(features) -> float:
    """Default regularization: 1/b^2 for b the mean feature-vector 2-norm."""
    norms = _row_norms(features)
    if norms.size == 0:
        raise ValueError("cannot derive default C from an empty feature matrix")
    b = norms.mean()
    if b <= 0.0:
        raise ValueError("cannot derive default C: all feature vectors have zero norm")
    return 1.0 / (b * b)


def resolve_j(labels) -> float:
    """Minority-cost multiplier: #irrelevant / #relevant in the training labels."""
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == -1))
    if n_pos == 0:
        raise ValueError("cannot resolve J: no relevant citations in training labels")
    if n_neg == 0:
        raise ValueError("cannot resolve J: no irrelevant citations in training labels")
    return n_neg / n_pos


def _check_labels(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.float64)
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if np.unique(labels).size < 2:
        raise ValueError("training requires both classes present")
    return labels


def _augment(features, use_intercept: bool):
    if not use_intercept:
        return features
    n = features.shape[0]
    if sp.issparse(features):
        return sp.hstack([features.tocsr(), np.ones((n, 1))], format="csr")
    return np.hstack([np.asarray(features, dtype=np.float64), np.ones((n, 1))])


def _run_dcd(features, y, cost, max_epochs, tol):
    # inner_cap bounds the extra sweeps that keep the per-epoch objective
    # monotone; the common case needs exactly one sweep per epoch
    inner_cap = 400
    if sp.issparse(features):
        csr = features.tocsr()
        return _kernels.dcd_sparse(
            csr.data.astype(np.float64), csr.indices.astype(np.int64),
            csr.indptr.astype(np.int64), csr.shape[1], y, cost,
            max_epochs, tol, inner_cap,
        )
    X = np.ascontiguousarray(np.asarray(features, dtype=np.float64))
    return _kernels.dcd_dense(X, y, cost, max_epochs, tol, inner_cap)


def train_weighted_hinge(features, labels, config: TrainConfig) -> LinearModel:
    """Train a (possibly cost-weighted) hinge-loss linear SVM.

    Minimizes 0.5*||w||^2 + C * sum_i k_i * max(0, 1 - y_i(w.x_i + b))
    with k_i = J for relevant citations under cost_hinge and 1 otherwise,
    by deterministic dual coordinate descent over a fixed instance order.
    """
    if config.loss not in HINGE_LOSSES:
        raise ValueError(f"train_weighted_hinge expects a hinge-family loss, got {config.loss!r}")
    y = _check_labels(labels)
    c = default_c(features) if config.cost_c == "auto" else float(config.cost_c)
    if config.loss == "cost_hinge":
        j = resolve_j(y) if config.j_ratio == "auto" else float(config.j_ratio)
    else:
        j = 1.0
    cost = np.where(y > 0, c * j, c)
    aug = _augment(features, config.use_intercept)
    w, _alpha, obj_hist, epochs, converged = _run_dcd(
        aug, y, cost, config.resolved_max_iters(), config.resolved_epsilon()
    )
    if not converged:
        warnings.warn(
            f"weighted hinge training stopped at max_iters={config.resolved_max_iters()} "
            f"with objective {obj_hist[-1]:.6g}"
        )
    d = features.shape[1]
    return LinearModel(
        weights=np.asarray(w[:d]),
        intercept=float(w[d]) if config.use_intercept else 0.0,
        config=config,
        resolved_c=c,
        resolved_j=j,
        objective_history=tuple(obj_hist),
        n_iterations=int(epochs),
        converged=bool(converged),
    )


def contingency_loss(table: ContingencyTable, loss: str) -> float:
    """Scalar loss of a contingency table on its natural 0..1-ish scale.

    am / quadmean combine the per-class recall losses; kld is the smoothed
    Kullback-Leibler divergence between true and predicted class
    proportions with eps = 1/(2n) on both sides; error is the plain error
    rate.  The swapped-pair (AUC) loss of a hard labeling equals am.
    """
    tp, fp, tn, fn = table.tp, table.fp, table.tn, table.fn
    n = table.n
    if loss == "error":
        if n == 0:
            raise ValueError("empty contingency table")
        return (fp + fn) / n
    if loss == "kld":
        if n == 0:
            raise ValueError("empty contingency table")
        eps = 1.0 / (2.0 * n)
        denom = n + 2.0 * eps
        p_pos = (tp + fn + eps) / denom
        p_neg = (fp + tn + eps) / denom
        q_pos = (tp + fp + eps) / denom
        q_neg = (fn + tn + eps) / denom
        return p_pos * math.log(p_pos / q_pos) + p_neg * math.log(p_neg / q_neg)
    if loss in ("am", "quadmean", "auc"):
        if tp + fn == 0 or fp + tn == 0:
            raise ValueError("recall-based losses need both classes present")
        l_rp = fn / (tp + fn)
        l_rn = fp / (fp + tn)
        if loss == "quadmean":
            return math.sqrt((l_rp * l_rp + l_rn * l_rn) / 2.0)
        return (l_rp + l_rn) / 2.0
    raise ValueError(f"unknown contingency loss {loss!r}")


def _loss_grid(loss: str, n_pos: int, n_neg: int) -> np.ndarray:
    """Scaled loss for every (fn, fp) pair; shape (n_pos+1, n_neg+1)."""
    fn = np.arange(n_pos + 1, dtype=np.float64)[:, None]
    fp = np.arange(n_neg + 1, dtype=np.float64)[None, :]
    if loss in ("auc", "am"):
        return LOSS_SCALE * 0.5 * (fn / n_pos + fp / n_neg)
    if loss == "quadmean":
        return LOSS_SCALE * np.sqrt(((fn / n_pos) ** 2 + (fp / n_neg) ** 2) / 2.0)
    if loss == "kld":
        n = n_pos + n_neg
        eps = 1.0 / (2.0 * n)
        denom = n + 2.0 * eps
        p_pos = (n_pos + eps) / denom
        p_neg = (n_neg + eps) / denom
        pred_pos = (n_pos - fn) + fp
        q_pos = (pred_pos + eps) / denom
        q_neg = (n - pred_pos + eps) / denom
        return LOSS_SCALE * (p_pos * np.log(p_pos / q_pos) + p_neg * np.log(p_neg / q_neg))
    raise ValueError(f"unknown multivariate loss {loss!r}")


def find_most_violated(scores, labels, loss: str) -> tuple[np.ndarray, float]:
    """Most violated label assignment under margin rescaling.

    Maximizes scale*loss(yhat, y) + sum_i yhat_i*s_i over all 2^n label
    vectors.  Because the loss depends only on (#false negatives, #false
    positives) and, for fixed counts, the linear term is maximized by
    flipping the lowest-scored positives and highest-scored negatives,
    the search reduces to the (fn, fp) grid.  Returns the assignment and
    its violation value scale*loss + sum(yhat*s) - sum(y*s), which is 0
    when the true labeling itself is the argmax.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    pos_idx = np.flatnonzero(y == 1)
    neg_idx = np.flatnonzero(y == -1)
    n_pos, n_neg = pos_idx.size, neg_idx.size
    if n_pos == 0 or n_neg == 0:
        raise ValueError("most-violated search requires both classes present")
    pos_order = pos_idx[np.argsort(scores[pos_idx], kind="stable")]
    neg_order = neg_idx[np.argsort(-scores[neg_idx], kind="stable")]
    # linear gain of flipping the first k candidates of each class
    pos_gain = np.concatenate([[0.0], np.cumsum(-2.0 * scores[pos_order])])
    neg_gain = np.concatenate([[0.0], np.cumsum(2.0 * scores[neg_order])])
    if loss in ("auc", "am"):
        # separable in fn and fp
        best_fn = int(np.argmax(LOSS_SCALE * 0.5 * np.arange(n_pos + 1) / n_pos + pos_gain))
        best_fp = int(np.argmax(LOSS_SCALE * 0.5 * np.arange(n_neg + 1) / n_neg + neg_gain))
        value = (
            LOSS_SCALE * 0.5 * (best_fn / n_pos + best_fp / n_neg)
            + pos_gain[best_fn] + neg_gain[best_fp]
        )
    else:
        grid = _loss_grid(loss, n_pos, n_neg) + pos_gain[:, None] + neg_gain[None, :]
        flat = int(np.argmax(grid))
        best_fn, best_fp = divmod(flat, n_neg + 1)
        value = float(grid[best_fn, best_fp])
    yhat = y.astype(np.float64).copy()
    yhat[pos_order[:best_fn]] = -1.0
    yhat[neg_order[:best_fp]] = 1.0
    return yhat, float(value)


def _matvec(features, v):
    if sp.issparse(features):
        return np.asarray(features @ v).ravel()
    return np.asarray(features, dtype=np.float64) @ v


def _rmatvec(features, v):
    if sp.issparse(features):
        return np.asarray(features.T @ v).ravel()
    return np.asarray(features, dtype=np.float64).T @ v


def _solve_working_set(gram: np.ndarray, deltas: np.ndarray, c: float,
                       alpha: np.ndarray, passes: int = 2000, tol: float = 1e-10) -> np.ndarray:
    """Maximize sum(a*delta) - 0.5*a'Ga over a >= 0, sum(a) <= C.

    Cyclic coordinate ascent; each update solves the one-dimensional
    problem exactly and clips against both constraints.
    """
    k = deltas.size
    galpha = gram @ alpha
    total = float(alpha.sum())
    for _ in range(passes):
        biggest = 0.0
        for i in range(k):
            gii = gram[i, i]
            if gii <= 0.0:
                continue
            grad = deltas[i] - galpha[i]
            new = alpha[i] + grad / gii
            upper = c - (total - alpha[i])
            new = min(max(new, 0.0), max(upper, 0.0))
            step = new - alpha[i]
            if step != 0.0:
                alpha[i] = new
                total += step
                galpha += step * gram[:, i]
                biggest = max(biggest, abs(step) * math.sqrt(gii))
        if biggest < tol:
            break
    return alpha


def train_multivariate(features, labels, config: TrainConfig) -> LinearModel:
    """Cutting-plane training against a multivariate contingency loss.

    One-slack formulation: starting from an empty working set, repeatedly
    train on the current constraints, ask :func:`find_most_violated` for
    the worst label assignment, and add it while it is violated beyond the
    current slack by more than epsilon.  Progress is organized in serious
    steps: cuts that do not yet lower the maximum working-set violation
    count as null steps inside the current outer iteration, so the
    recorded per-outer-iteration violation is non-increasing.  max_iters
    caps the total number of cuts.  All bookkeeping stays in instance
    space (n-vectors), so sparse and dense features share one code path.
    """
    if config.loss not in MULTIVARIATE_LOSSES:
        raise ValueError(f"train_multivariate expects loss in {MULTIVARIATE_LOSSES}, got {config.loss!r}")
    y = _check_labels(labels)
    n = y.size
    # error-loss recommendation for structural training: base C times n/100
    c = default_c(features) * n / 100.0 if config.cost_c == "auto" else float(config.cost_c)
    aug = _augment(features, config.use_intercept)
    epsilon = config.resolved_epsilon()
    max_iters = config.resolved_max_iters()

    coeffs: list[np.ndarray] = []      # c_k = y - yhat_k (entries 0, +-2)
    margins: list[np.ndarray] = []     # u_k = X (X' c_k), so w.dPsi_k = c_k . s
    deltas: list[float] = []
    gram = np.zeros((0, 0))
    alpha = np.zeros(0)
    violations: list[float] = []
    converged = False
    iterations = 0
    xi = 0.0

    for _ in range(max_iters):
        s = np.zeros(n) if not coeffs else np.einsum("k,kn->n", alpha, np.asarray(margins))
        yhat, violation = find_most_violated(s, y, config.loss)
        xi = 0.0
        if coeffs:
            xi = max(0.0, float(max(d - float(ck @ s) for d, ck in zip(deltas, coeffs))))
        if violation <= xi + epsilon:
            converged = True
            break
        if not violations or violation < violations[-1]:
            violations.append(violation)  # serious step; cuts in between are null steps
        iterations += 1
        c_new = y - yhat
        u_new = _matvec(aug, _rmatvec(aug, c_new))
        k = len(coeffs)
        new_gram = np.empty((k + 1, k + 1))
        new_gram[:k, :k] = gram
        for i, ck in enumerate(coeffs):
            new_gram[i, k] = new_gram[k, i] = float(ck @ u_new)
        new_gram[k, k] = float(c_new @ u_new)
        gram = new_gram
        coeffs.append(c_new)
        margins.append(u_new)
        deltas.append(violation - float(yhat @ s) + float(y @ s))  # = scaled loss of yhat
        alpha = np.concatenate([alpha, [0.0]])
        alpha = _solve_working_set(gram, np.asarray(deltas), c, alpha)

    if not converged:
        last = violations[-1] if violations else float("nan")
        warnings.warn(
            f"cutting-plane training hit max_iters={max_iters} with violation {last:.6g}"
        )
    combo = np.zeros(n) if not coeffs else np.einsum("k,kn->n", alpha, np.asarray(coeffs))
    w_full = _rmatvec(aug, combo)
    d = features.shape[1]
    return LinearModel(
        weights=np.asarray(w_full[:d]),
        intercept=float(w_full[d]) if config.use_intercept else 0.0,
        config=config,
        resolved_c=c,
        resolved_j=1.0,
        violation_history=tuple(violations),
        final_slack=float(xi),
        n_iterations=iterations,
        converged=converged,
    )


def _vstack(a, b):
    if sp.issparse(a) or sp.issparse(b):
        return sp.vstack([sp.csr_matrix(a), sp.csr_matrix(b)], format="csr")
    return np.vstack([np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)])


def train_transductive(features_labeled, labels, features_unlabeled, config: TrainConfig) -> LinearModel:
    """Transductive SVM via pseudo-label switching.

    Starts from the inductive model, pseudo-labels the top unlabeled
    fraction (equal to the labeled prevalence) positive, then alternates
    between retraining and switching misclassified opposite-label
    unlabeled pairs while the unlabeled cost anneals upward from 1e-3*C,
    doubling until it reaches C.
    """
    if config.loss != "transductive":
        raise ValueError(f"train_transductive expects loss 'transductive', got {config.loss!r}")
    y = _check_labels(labels)
    inductive_cfg = replace(config, loss="hinge")
    n_u = features_unlabeled.shape[0] if features_unlabeled is not None else 0
    if n_u == 0:
        warnings.warn("transductive training fell back to inductive: unlabeled set is empty")
        model = train_weighted_hinge(features_labeled, y, inductive_cfg)
        return replace(model, config=config)

    c = default_c(features_labeled) if config.cost_c == "auto" else float(config.cost_c)
    base = train_weighted_hinge(features_labeled, y, replace(inductive_cfg, cost_c=c))
    scores_u = score_citations(base, features_unlabeled)
    frac_pos = float(np.mean(y > 0))
    num_plus = int(round(frac_pos * n_u))
    pseudo = -np.ones(n_u)
    order = np.argsort(-scores_u, kind="stable")
    pseudo[order[:num_plus]] = 1.0

    n_l = y.size
    aug = _augment(_vstack(features_labeled, features_unlabeled), config.use_intercept)
    aug_u = _augment(features_unlabeled, config.use_intercept)
    max_switch = max(100, 2 * n_u)
    eps = config.resolved_epsilon()
    max_epochs = config.resolved_max_iters()
    cost_u = max(1e-3 * c, np.finfo(np.float64).tiny)
    model_w = None
    while True:
        cost = np.concatenate([np.full(n_l, c), np.full(n_u, cost_u)])
        w, _a, _obj, _e, _conv = _run_dcd(aug, np.concatenate([y, pseudo]), cost, max_epochs, eps)
        for _ in range(max_switch):
            slack = np.maximum(0.0, 1.0 - pseudo * _matvec(aug_u, w))
            pos_mask = (pseudo > 0) & (slack > 0)
            neg_mask = (pseudo < 0) & (slack > 0)
            if not pos_mask.any() or not neg_mask.any():
                break
            i = int(np.flatnonzero(pos_mask)[np.argmax(slack[pos_mask])])
            jdx = int(np.flatnonzero(neg_mask)[np.argmax(slack[neg_mask])])
            if slack[i] + slack[jdx] <= 2.0 + 1e-9:
                break
            pseudo[i], pseudo[jdx] = -1.0, 1.0
            w, _a, _obj, _e, _conv = _run_dcd(aug, np.concatenate([y, pseudo]), cost, max_epochs, eps)
        model_w = w
        if cost_u >= c:
            break
        cost_u = min(2.0 * cost_u, c)

    d = features_labeled.shape[1]
    return LinearModel(
        weights=np.asarray(model_w[:d]),
        intercept=float(model_w[d]) if config.use_intercept else 0.0,
        config=config,
        resolved_c=c,
        resolved_j=1.0,
        n_iterations=0,
        converged=True,
    )


def train(features, labels, config: TrainConfig, features_unlabeled=None) -> LinearModel:
    """Dispatch to the trainer matching ``config.loss``."""
    if config.loss in HINGE_LOSSES:
        return train_weighted_hinge(features, labels, config)
    if config.loss in MULTIVARIATE_LOSSES:
        return train_multivariate(features, labels, config)
    return train_transductive(features, labels, features_unlabeled, config)


def score_citations(model: LinearModel, features) -> np.ndarray:
    """Signed distances w.x + b; predictions are sign(score - threshold)."""
    if features.shape[1] != model.dim:
        raise ValueError(f"feature dim {features.shape[1]} != model dim {model.dim}")
    return _matvec(features, model.weights) + model.intercept


def predict(model: LinearModel, features) -> np.ndarray:
    scores = score_citations(model, features)
    return np.where(scores >= model.decision_threshold, 1, -1)


def save_model(model: LinearModel, path) -> None:
    """Versioned text format, bit-exact round trip (weights as float hex)."""
    header = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "loss": model.config.loss,
        "use_intercept": model.config.use_intercept,
        "c": model.resolved_c,
        "j": model.resolved_j,
        "dim": model.dim,
        "threshold": model.decision_threshold,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(float(model.intercept).hex() + "\n")
        for w in model.weights:
            fh.write(float(w).hex() + "\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != MODEL_FORMAT or header.get("version") != MODEL_VERSION:
            raise ValueError(f"{path}: not a screenkit model file (or unsupported version)")
        intercept = float.fromhex(fh.readline().strip())
        weights = np.array([float.fromhex(line.strip()) for line in fh], dtype=np.float64)
    if weights.size != header["dim"]:
        raise ValueError(f"{path}: expected {header['dim']} weights, found {weights.size}")
    return LinearModel(
        weights=weights,
        intercept=intercept,
        config=TrainConfig(loss=header["loss"], use_intercept=header["use_intercept"],
                           cost_c=header["c"], j_ratio=header["j"]),
        decision_threshold=header["threshold"],
        resolved_c=header["c"],
        resolved_j=header["j"],
    )
