"""Numba inner loops for SVM coordinate descent and skip-gram training.

Everything here is single-threaded and deterministic under the seeds the
callers pass in; the wrappers in :mod:`screenkit.svm` and
:mod:`screenkit.features` own all input validation.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _primal_objective_dense(X, y, cost, w):
    obj = 0.5 * np.dot(w, w)
    n = X.shape[0]
    for i in range(n):
        s = np.dot(w, X[i])
        slack = 1.0 - y[i] * s
        if slack > 0.0:
            obj += cost[i] * slack
    return obj


@njit(cache=True)
def dcd_dense(X, y, cost, max_epochs, tol, inner_cap):
    """Dual coordinate descent for the weighted hinge SVM, dense features.

    Instances are visited in a fixed order every sweep.  An epoch is one
    or more sweeps: extra sweeps are taken (up to ``inner_cap``) whenever a
    single sweep would leave the primal objective above the previous
    epoch's value, so the recorded per-epoch objective never increases.
    Returns (w, alpha, objective_history, epochs_run, converged).
    """
    n, d = X.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    qdiag = np.empty(n)
    for i in range(n):
        qdiag[i] = np.dot(X[i], X[i])
    obj_hist = np.empty(max_epochs)
    prev_obj = np.inf
    epochs_run = 0
    converged = False
    for epoch in range(max_epochs):
        obj = prev_obj
        for sweep in range(inner_cap):
            max_pg = 0.0
            for i in range(n):
                if qdiag[i] <= 0.0:
                    continue
                G = y[i] * np.dot(w, X[i]) - 1.0
                U = cost[i]
                a = alpha[i]
                if a <= 0.0:
                    pg = min(G, 0.0)
                elif a >= U:
                    pg = max(G, 0.0)
                else:
                    pg = G
                apg = abs(pg)
                if apg > max_pg:
                    max_pg = apg
                if apg > 1e-14:
                    new_a = a - G / qdiag[i]
                    if new_a < 0.0:
                        new_a = 0.0
                    elif new_a > U:
                        new_a = U
                    delta = (new_a - a) * y[i]
                    if delta != 0.0:
                        alpha[i] = new_a
                        for j in range(d):
                            w[j] += delta * X[i, j]
            obj = _primal_objective_dense(X, y, cost, w)
            if max_pg < tol:
                converged = True
                break
            if obj <= prev_obj + 1e-12:
                break
        obj_hist[epoch] = obj
        prev_obj = obj
        epochs_run = epoch + 1
        if converged:
            break
    return w, alpha, obj_hist[:epochs_run], epochs_run, converged


@njit(cache=True)
def _primal_objective_sparse(data, indices, indptr, y, cost, w):
    obj = 0.5 * np.dot(w, w)
    n = y.shape[0]
    for i in range(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * w[indices[p]]
        slack = 1.0 - y[i] * s
        if slack > 0.0:
            obj += cost[i] * slack
    return obj


@njit(cache=True)
def dcd_sparse(data, indices, indptr, n_features, y, cost, max_epochs, tol, inner_cap):
    """CSR variant of :func:`dcd_dense` (same schedule and guarantees)."""
    n = y.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(n_features)
    qdiag = np.empty(n)
    for i in range(n):
        s = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            s += data[p] * data[p]
        qdiag[i] = s
    obj_hist = np.empty(max_epochs)
    prev_obj = np.inf
    epochs_run = 0
    converged = False
    for epoch in range(max_epochs):
        obj = prev_obj
        for sweep in range(inner_cap):
            max_pg = 0.0
            for i in range(n):
                if qdiag[i] <= 0.0:
                    continue
                s = 0.0
                for p in range(indptr[i], indptr[i + 1]):
                    s += data[p] * w[indices[p]]
                G = y[i] * s - 1.0
                U = cost[i]
                a = alpha[i]
                if a <= 0.0:
                    pg = min(G, 0.0)
                elif a >= U:
                    pg = max(G, 0.0)
                else:
                    pg = G
                apg = abs(pg)
                if apg > max_pg:
                    max_pg = apg
                if apg > 1e-14:
                    new_a = a - G / qdiag[i]
                    if new_a < 0.0:
                        new_a = 0.0
                    elif new_a > U:
                        new_a = U
                    delta = (new_a - a) * y[i]
                    if delta != 0.0:
                        alpha[i] = new_a
                        for p in range(indptr[i], indptr[i + 1]):
                            w[indices[p]] += delta * data[p]
            obj = _primal_objective_sparse(data, indices, indptr, y, cost, w)
            if max_pg < tol:
                converged = True
                break
            if obj <= prev_obj + 1e-12:
                break
        obj_hist[epoch] = obj
        prev_obj = obj
        epochs_run = epoch + 1
        if converged:
            break
    return w, alpha, obj_hist[:epochs_run], epochs_run, converged


@njit(cache=True)
def sgns_train(tokens, offsets, w_in, w_out, noise_table, window, negatives,
               epochs, lr0, lr_min, seed):
    """Skip-gram with negative sampling, in-place on w_in / w_out.

    ``tokens`` holds vocabulary ids for all sentences back to back and
    ``offsets`` delimits sentences; context windows never cross sentence
    boundaries.  The window size is drawn uniformly from 1..window per
    center word and the learning rate decays linearly over the total
    number of center-word visits.
    """
    np.random.seed(seed)
    dim = w_in.shape[1]
    table_size = noise_table.shape[0]
    n_sentences = offsets.shape[0] - 1
    total = float(epochs) * float(tokens.shape[0]) + 1.0
    processed = 0.0
    neu = np.empty(dim)
    for _epoch in range(epochs):
        for s in range(n_sentences):
            start = offsets[s]
            end = offsets[s + 1]
            for pos in range(start, end):
                center = tokens[pos]
                lr = lr0 * (1.0 - processed / total)
                if lr < lr_min:
                    lr = lr_min
                processed += 1.0
                b = 1 + np.random.randint(0, window)
                lo = pos - b
                if lo < start:
                    lo = start
                hi = pos + b + 1
                if hi > end:
                    hi = end
                for cpos in range(lo, hi):
                    if cpos == pos:
                        continue
                    context = tokens[cpos]
                    for j in range(dim):
                        neu[j] = 0.0
                    for k in range(negatives + 1):
                        if k == 0:
                            target = context
                            label = 1.0
                        else:
                            target = noise_table[np.random.randint(0, table_size)]
                            if target == context:
                                continue
                            label = 0.0
                        f = 0.0
                        for j in range(dim):
                            f += w_in[center, j] * w_out[target, j]
                        if f > 8.0:
                            g = (label - 1.0) * lr
                        elif f < -8.0:
                            g = label * lr
                        else:
                            g = (label - 1.0 / (1.0 + np.exp(-f))) * lr
                        for j in range(dim):
                            neu[j] += g * w_out[target, j]
                            w_out[target, j] += g * w_in[center, j]
                    for j in range(dim):
                        w_in[center, j] += neu[j]
